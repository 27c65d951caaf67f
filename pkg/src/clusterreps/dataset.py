"""Labeled datasets: loading, writing, stratified splitting and toy generators.

Items are identified by their *ItemId*, the 0-based position in ingestion
order.  Subsets produced by :func:`split_train_test` keep the original ids and
share the payload store of the dataset they were cut from, so a similarity
measure built once for the loaded data answers queries for every subset and
"lowest index" tie-breaking means the same thing everywhere.
"""

from __future__ import annotations

import csv
import gzip
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError, FormatError, ParseError

__all__ = [
    "Cluster",
    "LabeledDataset",
    "load_dense_csv",
    "load_sparse_records",
    "load_similarity_matrix",
    "save_dense_csv",
    "save_sparse_records",
    "save_similarity_matrix",
    "split_train_test",
    "gen_synthetic",
    "gen_similarity_matrix",
    "stratified_subset",
]


@dataclass(frozen=True)
class Cluster:
    """Members of one cluster, ascending ItemIds."""

    label: str
    member_ids: np.ndarray

    def __post_init__(self):
        ids = np.asarray(self.member_ids, dtype=np.int64)
        if ids.ndim != 1 or ids.size == 0:
            raise DomainError(f"cluster {self.label!r} is empty")
        if np.any(np.diff(ids) <= 0):
            raise DomainError(f"cluster {self.label!r}: member ids must be strictly ascending")
        object.__setattr__(self, "member_ids", ids)

    def __len__(self):
        return int(self.member_ids.size)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Items with cluster labels.

    ``payload`` is the feature store indexed by ItemId: a dense ``(N, d)``
    array, a CSR matrix, or ``None`` for opaque items that are only known
    through a precomputed similarity matrix.  ``ids`` lists the ItemIds that
    belong to this dataset (ascending) and ``labels`` is aligned with it.
    """

    ids: np.ndarray
    labels: np.ndarray
    payload: object = None
    name: str = ""
    names: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        ids = np.asarray(self.ids, dtype=np.int64)
        labels = np.asarray([str(lab) for lab in self.labels], dtype=object)
        if ids.shape != labels.shape:
            raise DomainError("ids and labels differ in length")
        if ids.size and np.any(np.diff(ids) <= 0):
            raise DomainError("dataset ids must be strictly ascending")
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return int(self.ids.size)

    @property
    def kind(self):
        if self.payload is None:
            return "opaque"
        return "sparse" if sp.issparse(self.payload) else "dense"

    @property
    def dim(self):
        return None if self.payload is None else int(self.payload.shape[1])

    @property
    def n_items(self):
        """Size of the underlying payload store (bound on ItemIds)."""
        if self.payload is None:
            return int(self.ids.max()) + 1 if self.ids.size else 0
        return int(self.payload.shape[0])

    def features(self, ids=None):
        """Payload rows for ``ids`` (default: this dataset's items).

        For opaque datasets the ids themselves are returned; they are the
        handles a matrix-lookup similarity understands.
        """
        ids = self.ids if ids is None else np.asarray(ids, dtype=np.int64)
        if self.payload is None:
            return ids.copy()
        return self.payload[ids]

    def label_set(self):
        return sorted(set(self.labels.tolist()))

    def clusters(self):
        """Clusters induced by the labels, in sorted label order."""
        out = []
        for lab in self.label_set():
            out.append(Cluster(lab, self.ids[self.labels == lab]))
        return out

    def label_of(self):
        """Mapping ItemId -> label."""
        return dict(zip(self.ids.tolist(), self.labels.tolist()))

    def subset(self, ids, name=None):
        ids = np.sort(np.asarray(ids, dtype=np.int64))
        pos = np.searchsorted(self.ids, ids)
        if np.any(pos >= self.ids.size) or np.any(self.ids[np.minimum(pos, self.ids.size - 1)] != ids):
            raise DomainError("subset ids are not members of the dataset")
        return LabeledDataset(
            ids, self.labels[pos], self.payload, name or self.name, self.names
        )


# ----------------------------------------------------------------------------
# file helpers


def _open_text(path, mode="r", gz=None):
    path = os.fspath(path)
    if path.endswith(".gz") if gz is None else gz:
        if mode == "w":
            # fixed header (no name, zero mtime) keeps output byte-reproducible
            raw = open(path, "wb")
            zf = gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0)
            zf.myfileobj = raw  # closed together with the gzip stream
            return io.TextIOWrapper(zf, encoding="utf-8", newline="")
        return io.TextIOWrapper(gzip.open(path, mode + "b"), encoding="utf-8", newline="")
    return open(path, mode, encoding="utf-8", newline="")


def _parse_float(text, line, what="value"):
    try:
        value = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {what} {text!r}", line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} {text!r}", line)
    return value


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    tmp = f"{path}.tmp{os.getpid()}"
    try:
        with _open_text(tmp, "w", gz=path.endswith(".gz")) as fh:
            fh.write(text)
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


# ----------------------------------------------------------------------------
# dense CSV


def load_dense_csv(path, label_column="label", name=None):
    """Read a header-row CSV of numeric features plus one label column.

    ``label_column`` is a header name or a 0-based column index.  ItemId i is
    data row i.  Leading ``#`` lines are comments.  Files ending in ``.gz``
    are decompressed on the fly.
    """
    with _open_text(path) as fh:
        skipped = 0
        pos = fh.tell()
        line = fh.readline()
        while line.startswith("#"):
            skipped += 1
            pos = fh.tell()
            line = fh.readline()
        fh.seek(pos)
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("no data rows") from None
        if isinstance(label_column, (int, np.integer)):
            lab_idx = int(label_column)
            if not -len(header) <= lab_idx < len(header):
                raise ConfigError(f"label column index {lab_idx} out of range")
            lab_idx %= len(header)
        else:
            if label_column not in header:
                raise ConfigError(f"label column {label_column!r} not in header")
            lab_idx = header.index(label_column)
        width = len(header)
        feat_cols = [c for c in range(width) if c != lab_idx]
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=skipped + 2):
            if not row:
                continue
            if len(row) != width:
                raise ParseError(f"expected {width} cells, got {len(row)}", lineno)
            try:
                values = [float(row[c]) for c in feat_cols]
            except ValueError:
                bad = next(c for c in feat_cols if not _is_float(row[c]))
                raise ParseError(f"non-numeric cell {row[bad]!r}", lineno) from None
            if not all(math.isfinite(v) for v in values):
                raise ParseError("non-finite cell", lineno)
            rows.append(values)
            labels.append(row[lab_idx])
    if not rows:
        raise ParseError("no data rows")
    X = np.asarray(rows, dtype=np.float64).reshape(len(rows), len(feat_cols))
    ds_name = name if name is not None else os.path.basename(os.fspath(path))
    return LabeledDataset(np.arange(len(rows)), labels, X, ds_name)


def _is_float(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def save_dense_csv(ds, path, feature_names=None, label_name="label", header=None):
    """Write ``ds`` as CSV; ``header`` lines go first as ``# `` comments."""
    if ds.kind != "dense":
        raise DomainError("save_dense_csv needs a dense dataset")
    X = ds.features()
    d = X.shape[1]
    names = feature_names or [f"x{j}" for j in range(d)]
    buf = io.StringIO()
    for h in header or []:
        buf.write(f"# {h}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([*names, label_name])
    for row, lab in zip(X, ds.labels):
        writer.writerow([*(repr(float(v)) for v in row), lab])
    atomic_write_text(path, buf.getvalue())


# ----------------------------------------------------------------------------
# sparse records


def load_sparse_records(path, name=None):
    """Read ``id<TAB>label<TAB>idx:val idx:val ...`` records.

    Indices must be strictly ascending within a record and values finite and
    nonzero.  The dimensionality is one more than the largest index seen.
    """
    indptr, indices, values, labels, names = [0], [], [], [], []
    with _open_text(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ParseError("expected id<TAB>label<TAB>pairs", lineno)
            rec_id, label = parts[0], parts[1]
            prev = -1
            for tok in (parts[2].split() if len(parts) == 3 else []):
                idx_text, sep, val_text = tok.partition(":")
                if not sep:
                    raise ParseError(f"bad pair {tok!r}", lineno)
                try:
                    idx = int(idx_text)
                except ValueError:
                    raise ParseError(f"bad index {idx_text!r}", lineno) from None
                if idx < 0:
                    raise ParseError(f"negative index {idx}", lineno)
                if idx <= prev:
                    raise ParseError("indices not sorted", lineno)
                val = _parse_float(val_text, lineno)
                if val == 0.0:
                    raise ParseError(f"explicit zero at index {idx}", lineno)
                prev = idx
                indices.append(idx)
                values.append(val)
            indptr.append(len(indices))
            labels.append(label)
            names.append(rec_id)
    if not labels:
        raise ParseError("no data rows")
    dim = (max(indices) + 1) if indices else 1
    X = sp.csr_matrix(
        (np.asarray(values, dtype=np.float64), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(labels), dim),
    )
    ds_name = name if name is not None else os.path.basename(os.fspath(path))
    return LabeledDataset(np.arange(len(labels)), labels, X, ds_name, tuple(names))


def save_sparse_records(ds, path):
    if ds.kind != "sparse":
        raise DomainError("save_sparse_records needs a sparse dataset")
    X = sp.csr_matrix(ds.features())
    X.sort_indices()
    names = ds.names
    lines = []
    for row, (item, lab) in enumerate(zip(ds.ids, ds.labels)):
        lo, hi = X.indptr[row], X.indptr[row + 1]
        pairs = " ".join(f"{j}:{float(v)!r}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi]))
        rec = names[item] if names is not None else str(item)
        lines.append(f"{rec}\t{lab}\t{pairs}\n")
    atomic_write_text(path, "".join(lines))


# ----------------------------------------------------------------------------
# similarity matrix


def load_similarity_matrix(path, name=None):
    """Read an ``n x n`` similarity matrix followed by ``n`` id/label lines.

    Returns ``(dataset, MatrixSimilarity)``; the dataset items are opaque.
    """
    from .similarity import MatrixSimilarity

    with _open_text(path) as fh:
        lines = [ln.rstrip("\r\n") for ln in fh]
    lines = [ln for ln in lines if ln.strip() and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty matrix file")
    try:
        n = int(lines[0].strip())
    except ValueError:
        raise FormatError("first line must be the item count", 1) from None
    if n < 1:
        raise FormatError("item count must be positive", 1)
    body = lines[1:]
    M = np.empty((n, n), dtype=np.float64)
    rows_seen = 0
    for row_no, line in enumerate(body[:n]):
        if "\t" in line:
            break
        cells = line.split()
        if len(cells) != n:
            raise FormatError(f"matrix not square: row has {len(cells)} entries, expected {n}", row_no + 2)
        M[row_no] = [_parse_float(c, row_no + 2) for c in cells]
        rows_seen += 1
    if rows_seen != n:
        raise FormatError(f"matrix not square: {rows_seen} rows, expected {n}")
    meta = body[n:]
    if len(meta) != n:
        raise FormatError(f"expected {n} id/label lines, got {len(meta)}")
    names, labels = [], []
    for off, line in enumerate(meta):
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError("expected id<TAB>label", n + 2 + off)
        names.append(parts[0])
        labels.append(parts[1])
    ds_name = name if name is not None else os.path.basename(os.fspath(path))
    ds = LabeledDataset(np.arange(n), labels, None, ds_name, tuple(names))
    return ds, MatrixSimilarity(M)


def save_similarity_matrix(ds, matrix, path):
    M = np.asarray(matrix, dtype=np.float64)
    n = M.shape[0]
    if M.shape != (n, n) or len(ds) != n:
        raise DomainError("matrix must be n x n for an n-item dataset")
    names = ds.names or tuple(str(i) for i in ds.ids)
    parts = [f"{n}\n"]
    parts.extend(" ".join(repr(float(v)) for v in row) + "\n" for row in M)
    parts.extend(f"{names[i]}\t{lab}\n" for i, lab in zip(ds.ids, ds.labels))
    atomic_write_text(path, "".join(parts))


# ----------------------------------------------------------------------------
# splitting


def _round_half_up(x):
    return int(math.floor(x + 0.5))


def split_train_test(ds, test_fraction=0.2, seed=42):
    """Stratified split keeping at least one item per cluster on each side.

    Each cluster contributes ``round(n_c * test_fraction)`` test items,
    clamped to ``[1, n_c - 1]``.  Both halves keep ascending ItemIds.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ConfigError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    test_ids = []
    for cl in ds.clusters():
        n_c = len(cl)
        if n_c < 2:
            raise DomainError(f"cluster {cl.label!r} has a single member and cannot be split")
        n_test = min(max(_round_half_up(n_c * test_fraction), 1), n_c - 1)
        test_ids.append(rng.permutation(cl.member_ids)[:n_test])
    test = np.sort(np.concatenate(test_ids))
    train = np.setdiff1d(ds.ids, test, assume_unique=True)
    return ds.subset(train, f"{ds.name}[train]"), ds.subset(test, f"{ds.name}[test]")


def stratified_subset(ds, per_cluster, seed=0):
    """At most ``per_cluster`` uniformly drawn members of every cluster."""
    rng = np.random.default_rng(seed)
    keep = []
    for cl in ds.clusters():
        m = min(per_cluster, len(cl))
        keep.append(rng.choice(cl.member_ids, size=m, replace=False))
    return ds.subset(np.concatenate(keep), ds.name)


# ----------------------------------------------------------------------------
# synthetic data


def _blobs(params, rng):
    centers = np.asarray(params.get("centers", [(0.0, 0.0), (5.0, 5.0)]), dtype=np.float64)
    sizes = params.get("sizes", 100)
    if np.isscalar(sizes):
        sizes = [int(sizes)] * len(centers)
    sigma = params.get("sigma", 0.1)
    sigma = np.broadcast_to(np.asarray(sigma, dtype=np.float64), (len(centers),))
    if len(sizes) != len(centers):
        raise ConfigError("one size per blob center is required")
    if min(sizes) < 1 or np.any(sigma < 0):
        raise ConfigError("sizes must be >= 1 and sigma >= 0")
    X = np.concatenate([c + sg * rng.standard_normal((m, centers.shape[1])) for c, m, sg in zip(centers, sizes, sigma)])
    y = np.repeat([f"blob{i}" for i in range(len(sizes))], sizes)
    n_out = int(params.get("outliers", 0))
    if n_out > 0:
        X, y = _with_outliers(X, y, centers, n_out, params, rng)
    return X, y


def _with_outliers(X, y, centers, m, params, rng):
    """Append ``m`` points labeled ``blob{owner}`` spread evenly over a disk around blob ``near``."""
    owner = int(params.get("outlier_blob", 0))
    near = int(params.get("outlier_near", 1 if len(centers) > 1 else 0))
    radius = float(params.get("outlier_radius", 3.0))
    if not (0 <= owner < len(centers) and 0 <= near < len(centers)) or radius <= 0:
        raise ConfigError("outlier_blob/outlier_near must name blobs and outlier_radius must be > 0")
    if centers.shape[1] != 2:
        raise ConfigError("outliers are only defined for 2-D blobs")
    # sunflower layout: roughly equal spacing, no two outliers close together
    i = np.arange(m)
    r = radius * np.sqrt((i + 0.5) / m)
    theta = i * np.pi * (3.0 - np.sqrt(5.0)) + rng.uniform(0.0, 2 * np.pi)
    pts = centers[near] + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    return np.concatenate([X, pts]), np.concatenate([y, np.repeat(f"blob{owner}", m)])


def _spirals(params, rng):
    n = int(params.get("n", 255))
    noise = float(params.get("noise", 0.05))
    turns = float(params.get("turns", 1.5))
    if n < 2 or noise < 0:
        raise ConfigError("two-spirals needs n >= 2 and noise >= 0")
    sizes = [n - n // 2, n // 2]
    Xs, ys = [], []
    for arm, m in enumerate(sizes):
        # sqrt spreads points evenly along the arm length
        t = np.sqrt(rng.uniform(0.02, 1.0, m)) * turns * 2 * np.pi
        phase = arm * np.pi
        pts = np.column_stack([t * np.cos(t + phase), t * np.sin(t + phase)]) / (turns * 2 * np.pi)
        Xs.append(pts + noise * rng.standard_normal((m, 2)))
        ys.extend([f"spiral{arm}"] * m)
    return np.concatenate(Xs), np.asarray(ys)


def gen_similarity_matrix(sizes, homogeneities, seed=42, cross=(-0.2, 0.05), spread=0.1):
    """Labeled opaque dataset plus a symmetric similarity matrix with set cluster means.

    Within cluster ``c`` the off-diagonal similarities scatter uniformly
    around ``homogeneities[c]`` (by at most ``spread``, less near +-1) and are
    shifted so their mean hits the target; similarities across clusters are
    uniform on ``cross``.  The diagonal is 1.  Labels are ``c0, c1, ...`` and
    items are shuffled so clusters interleave in ItemId order.
    """
    from .similarity import MatrixSimilarity

    sizes = [int(m) for m in sizes]
    if len(sizes) != len(homogeneities) or min(sizes) < 1:
        raise ConfigError("one homogeneity per cluster and sizes >= 1 are required")
    rng = np.random.default_rng(seed)
    n = sum(sizes)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    labels = labels[rng.permutation(n)]
    M = rng.uniform(cross[0], cross[1], (n, n))
    for c, h in enumerate(homogeneities):
        if not -1.0 <= h <= 1.0:
            raise ConfigError("homogeneities must lie in [-1, 1]")
        idx = np.flatnonzero(labels == c)
        m = idx.size
        a = min(spread, 1.0 - h, 1.0 + h)
        block = h + a * rng.uniform(-1.0, 1.0, (m, m))
        if m > 1:
            iu = np.triu_indices(m, 1)
            block[iu] += h - block[iu].mean()
        M[np.ix_(idx, idx)] = np.clip(block, -1.0, 1.0)
    M = np.triu(M, 1)
    M = M + M.T
    np.fill_diagonal(M, 1.0)
    ds = LabeledDataset(np.arange(n), [f"c{c}" for c in labels], None, "similarity-matrix")
    return ds, MatrixSimilarity(M)


_GENERATORS = {"gaussian-blobs": _blobs, "two-spirals": _spirals}


def gen_synthetic(kind, params=None, seed=42):
    """Small 2-D labeled datasets for demos and tests.

    ``gaussian-blobs`` takes ``centers``, ``sizes`` (int or per-blob list) and
    ``sigma``, and optionally ``outliers`` (count) with ``outlier_blob``,
    ``outlier_near`` and ``outlier_radius``: that many extra members of one
    blob placed evenly on a disk around another blob's center; ``two-spirals`` takes ``n`` (total points), ``noise`` and
    ``turns``.
    """
    try:
        gen = _GENERATORS[kind]
    except KeyError:
        raise ConfigError(f"unknown synthetic kind {kind!r}; choose from {sorted(_GENERATORS)}") from None
    X, y = gen(dict(params or {}), np.random.default_rng(seed))
    return LabeledDataset(np.arange(len(y)), y, X, kind)
