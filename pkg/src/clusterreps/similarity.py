"""Pairwise similarity measures and an evaluation counter.

A measure answers ``s(i, j)`` for ItemIds of one payload store.  It is used
through :class:`CountingSimilarity`, which caches every unordered pair it has
evaluated and counts only cache misses; that count drives the relative cost
``S = count / (n (n - 1) / 2)``.
"""

from __future__ import annotations

import threading

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError, FormatError

__all__ = [
    "SimilarityMeasure",
    "CosineDense",
    "CosineSparse",
    "NegEuclidean",
    "MatrixSimilarity",
    "CountingSimilarity",
    "cosine",
    "s_ratio",
    "similarity_for",
]

_CHUNK = 8192
_BLOCK_MAX = 25_000_000  # entries of a dense block product


def _block_plan(i, j):
    """Unique ids and inverse maps when a block product beats per-pair work."""
    ui, inv_i = np.unique(i, return_inverse=True)
    uj, inv_j = np.unique(j, return_inverse=True)
    cells = ui.size * uj.size
    if cells <= _BLOCK_MAX and cells <= 8 * i.size:
        return ui, inv_i, uj, inv_j
    return None


class SimilarityMeasure:
    """Base class.  Subclasses implement :meth:`pairs` and :meth:`against`."""

    kind = "abstract"

    def __init__(self, n_items):
        self.n_items = int(n_items)

    def pairs(self, i, j):
        """Similarities of item pairs ``(i[t], j[t])``; vectorized."""
        raise NotImplementedError

    def against(self, queries, ids):
        """Matrix of similarities between query payloads and items ``ids``."""
        raise NotImplementedError

    def __call__(self, i, j):
        return float(self.pairs(np.array([i]), np.array([j]))[0])


def _row_normalized_dense(X):
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1)
    safe = np.where(norms > 0, norms, 1.0)
    return X / safe[:, None], norms


class CosineDense(SimilarityMeasure):
    kind = "cosine-dense"

    def __init__(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ConfigError("dense payload must be a 2-D array")
        super().__init__(X.shape[0])
        self._unit, self._norms = _row_normalized_dense(X)

    def _check(self, ids):
        if np.any(self._norms[ids] == 0):
            bad = int(np.asarray(ids)[self._norms[ids] == 0][0])
            raise DomainError(f"cosine similarity undefined for zero vector (item {bad})")

    def pairs(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        self._check(i)
        self._check(j)
        plan = _block_plan(i, j)
        if plan is not None:
            ui, inv_i, uj, inv_j = plan
            block = self._unit[ui] @ self._unit[uj].T
            return np.clip(block[inv_i, inv_j], -1.0, 1.0)
        out = np.empty(i.size, dtype=np.float64)
        for lo in range(0, i.size, _CHUNK):
            hi = lo + _CHUNK
            out[lo:hi] = np.einsum("ij,ij->i", self._unit[i[lo:hi]], self._unit[j[lo:hi]])
        return np.clip(out, -1.0, 1.0)

    def against(self, queries, ids):
        Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        ids = np.asarray(ids, dtype=np.int64)
        self._check(ids)
        Qn, qn = _row_normalized_dense(Q)
        if np.any(qn == 0):
            raise DomainError("cosine similarity undefined for zero query vector")
        return np.clip(Qn @ self._unit[ids].T, -1.0, 1.0)


class CosineSparse(SimilarityMeasure):
    kind = "cosine-sparse"

    def __init__(self, X):
        X = sp.csr_matrix(X, dtype=np.float64)
        super().__init__(X.shape[0])
        self._norms = np.sqrt(np.asarray(X.multiply(X).sum(axis=1)).ravel())
        inv = np.where(self._norms > 0, 1.0 / np.where(self._norms > 0, self._norms, 1.0), 0.0)
        self._unit = sp.csr_matrix(sp.diags(inv) @ X)

    def _check(self, ids):
        zero = self._norms[ids] == 0
        if np.any(zero):
            raise DomainError(f"cosine similarity undefined for zero vector (item {int(np.asarray(ids)[zero][0])})")

    def pairs(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        self._check(i)
        self._check(j)
        plan = _block_plan(i, j)
        if plan is not None:
            ui, inv_i, uj, inv_j = plan
            block = (self._unit[ui] @ self._unit[uj].T).toarray()
            return np.clip(block[inv_i, inv_j], -1.0, 1.0)
        out = np.empty(i.size, dtype=np.float64)
        for lo in range(0, i.size, _CHUNK):
            hi = lo + _CHUNK
            prod = self._unit[i[lo:hi]].multiply(self._unit[j[lo:hi]])
            out[lo:hi] = np.asarray(prod.sum(axis=1)).ravel()
        return np.clip(out, -1.0, 1.0)

    def against(self, queries, ids):
        Q = sp.csr_matrix(queries, dtype=np.float64)
        ids = np.asarray(ids, dtype=np.int64)
        self._check(ids)
        qn = np.sqrt(np.asarray(Q.multiply(Q).sum(axis=1)).ravel())
        if np.any(qn == 0):
            raise DomainError("cosine similarity undefined for zero query vector")
        if Q.shape[1] < self._unit.shape[1]:
            Q = sp.csr_matrix((Q.data, Q.indices, Q.indptr), shape=(Q.shape[0], self._unit.shape[1]))
        elif Q.shape[1] > self._unit.shape[1]:
            Q = Q[:, : self._unit.shape[1]]  # dimensions unseen in the store contribute nothing
        sims = (sp.diags(1.0 / qn) @ Q) @ self._unit[ids].T
        return np.clip(sims.toarray(), -1.0, 1.0)


class NegEuclidean(SimilarityMeasure):
    """``s(a, b) = -||a - b||``; a similarity for low-dimensional geometric data."""

    kind = "neg-euclidean"

    def __init__(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise ConfigError("dense payload must be a 2-D array")
        super().__init__(X.shape[0])
        self._X = X

    def pairs(self, i, j):
        i = np.asarray(i, dtype=np.int64)
        j = np.asarray(j, dtype=np.int64)
        out = np.empty(i.size, dtype=np.float64)
        for lo in range(0, i.size, _CHUNK):
            hi = lo + _CHUNK
            diff = self._X[i[lo:hi]] - self._X[j[lo:hi]]
            out[lo:hi] = -np.sqrt(np.einsum("ij,ij->i", diff, diff))
        return out

    def against(self, queries, ids):
        Q = np.atleast_2d(np.asarray(queries, dtype=np.float64))
        Y = self._X[np.asarray(ids, dtype=np.int64)]
        sq = (Q * Q).sum(1)[:, None] + (Y * Y).sum(1)[None, :] - 2.0 * Q @ Y.T
        return -np.sqrt(np.maximum(sq, 0.0))


class MatrixSimilarity(SimilarityMeasure):
    """Lookup into a precomputed symmetric similarity matrix."""

    kind = "matrix-lookup"

    def __init__(self, M):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise FormatError("matrix not square")
        if not np.all(np.isfinite(M)):
            raise FormatError("matrix has non-finite entries")
        if not np.array_equal(M, M.T):
            raise FormatError("matrix not symmetric")
        super().__init__(M.shape[0])
        self.matrix = M

    def pairs(self, i, j):
        return self.matrix[np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64)]

    def against(self, queries, ids):
        q = np.atleast_1d(np.asarray(queries, dtype=np.int64))
        return self.matrix[np.ix_(q, np.asarray(ids, dtype=np.int64))]


def similarity_for(ds, kind=None):
    """Default measure for a dataset's payload (cosine unless told otherwise)."""
    if ds.payload is None:
        raise ConfigError("opaque datasets come with their own matrix similarity")
    if kind in (None, "cosine"):
        return CosineSparse(ds.payload) if sp.issparse(ds.payload) else CosineDense(ds.payload)
    if kind in ("euclidean", "neg-euclidean"):
        if sp.issparse(ds.payload):
            raise ConfigError("neg-euclidean needs dense vectors")
        return NegEuclidean(ds.payload)
    raise ConfigError(f"unknown similarity {kind!r}")


def cosine(a, b):
    """Cosine similarity of two feature vectors of the same kind.

    Dense vectors are 1-D arrays; sparse vectors are single-row scipy sparse
    matrices.  Integers (opaque handles) carry no coordinates.
    """
    a_sparse, b_sparse = sp.issparse(a), sp.issparse(b)
    for v in (a, b):
        if isinstance(v, (int, np.integer)):
            raise TypeError("opaque handles have no coordinates")
    if a_sparse != b_sparse:
        raise TypeError("cannot mix dense and sparse vectors")
    if a_sparse:
        a = sp.csr_matrix(a)
        b = sp.csr_matrix(b)
        if a.shape != b.shape:
            raise DomainError("sparse vectors differ in dimension")
        dot = float(a.multiply(b).sum())
        na = float(np.sqrt(a.multiply(a).sum()))
        nb = float(np.sqrt(b.multiply(b).sum()))
    else:
        a = np.asarray(a, dtype=np.float64).ravel()
        b = np.asarray(b, dtype=np.float64).ravel()
        if a.shape != b.shape:
            raise DomainError("dense vectors differ in dimension")
        dot, na, nb = float(a @ b), float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0 or nb == 0:
        raise DomainError("cosine similarity undefined for zero vector")
    return min(1.0, max(-1.0, dot / (na * nb)))


class CountingSimilarity:
    """Caching, counting wrapper around a symmetric :class:`SimilarityMeasure`.

    ``count`` is the number of distinct unordered pairs evaluated.  Item-pair
    methods are thread-safe.  Query evaluations (:meth:`evaluate_queries`)
    compare outside samples to stored items; they are counted one per
    comparison and never cached.
    """

    def __init__(self, inner):
        self.inner = inner
        self._base = np.int64(max(inner.n_items, 1))
        self._keys = np.empty(0, dtype=np.int64)
        self._vals = np.empty(0, dtype=np.float64)
        self._pending = {}
        self._lock = threading.RLock()
        self.count = 0
        self.query_count = 0

    def __len__(self):
        return self._keys.size + len(self._pending)

    def _key(self, i, j):
        i, j = int(i), int(j)
        if i == j:
            raise DomainError(f"self-similarity requested for item {i}")
        if not (0 <= i < self.inner.n_items and 0 <= j < self.inner.n_items):
            raise DomainError(f"item id out of range: ({i}, {j})")
        lo, hi = (i, j) if i < j else (j, i)
        return lo * int(self._base) + hi

    def _flush(self):
        if not self._pending:
            return
        keys = np.fromiter(self._pending.keys(), dtype=np.int64, count=len(self._pending))
        vals = np.fromiter(self._pending.values(), dtype=np.float64, count=len(self._pending))
        order = np.argsort(keys)
        self._insert(keys[order], vals[order])
        self._pending.clear()

    def _insert(self, keys, vals):
        pos = np.searchsorted(self._keys, keys)
        self._keys = np.insert(self._keys, pos, keys)
        self._vals = np.insert(self._vals, pos, vals)

    def _lookup(self, key):
        pos = np.searchsorted(self._keys, key)
        if pos < self._keys.size and self._keys[pos] == key:
            return float(self._vals[pos])
        return None

    def evaluate(self, i, j):
        """``s(i, j)``; counted once per unordered pair."""
        key = self._key(i, j)
        with self._lock:
            if key in self._pending:
                return self._pending[key]
            hit = self._lookup(key)
            if hit is not None:
                return hit
            lo, hi = divmod(key, int(self._base))
            val = float(self.inner.pairs(np.array([lo]), np.array([hi]))[0])
            self._pending[key] = val
            self.count += 1
            return val

    def evaluate_pairs(self, i, j):
        """Vectorized :meth:`evaluate` for aligned id arrays."""
        i = np.asarray(i, dtype=np.int64).ravel()
        j = np.asarray(j, dtype=np.int64).ravel()
        if i.shape != j.shape:
            raise DomainError("id arrays differ in length")
        if i.size == 0:
            return np.empty(0, dtype=np.float64)
        if np.any(i == j):
            raise DomainError("self-similarity requested")
        n = self.inner.n_items
        if min(i.min(), j.min()) < 0 or max(i.max(), j.max()) >= n:
            raise DomainError("item id out of range")
        keys = np.minimum(i, j) * self._base + np.maximum(i, j)
        uniq, inverse = np.unique(keys, return_inverse=True)
        with self._lock:
            self._flush()
            pos = np.searchsorted(self._keys, uniq)
            clipped = np.minimum(pos, max(self._keys.size - 1, 0))
            found = (pos < self._keys.size) & (self._keys[clipped] == uniq) if self._keys.size else np.zeros(uniq.size, bool)
            vals = np.empty(uniq.size, dtype=np.float64)
            vals[found] = self._vals[pos[found]]
            missing = uniq[~found]
            if missing.size:
                fresh = self.inner.pairs(missing // self._base, missing % self._base)
                vals[~found] = fresh
                self._insert(missing, fresh)
                self.count += int(missing.size)
        return vals[inverse]

    def evaluate_queries(self, queries, ids):
        """Similarities of query payloads to stored items ``ids``."""
        ids = np.asarray(ids, dtype=np.int64)
        sims = np.asarray(self.inner.against(queries, ids), dtype=np.float64)
        with self._lock:
            self.query_count += int(sims.size)
        return sims

    def cached(self, i, j):
        """Cached ``s(i, j)`` or ``None``; never evaluates or counts."""
        key = self._key(i, j)
        with self._lock:
            if key in self._pending:
                return self._pending[key]
            return self._lookup(key)


def s_ratio(cs, n):
    """Relative similarity cost: evaluations over the ``n (n - 1) / 2`` full matrix."""
    if n < 2:
        raise DomainError("s_ratio needs n >= 2")
    count = cs.count if isinstance(cs, CountingSimilarity) else int(cs)
    return count / (n * (n - 1) / 2)
