"""Reverse k-NN graphs with similarity-threshold pruning, and cluster homogeneity."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = [
    "ReverseGraph",
    "homogeneity",
    "approx_homogeneity",
    "reverse_and_prune",
    "auto_tau",
    "EXACT_HOMOGENEITY_MAX",
]

# clusters up to this size get the exact mean pairwise similarity as tau
EXACT_HOMOGENEITY_MAX = 2000


def _member_ids(cluster):
    return np.asarray(getattr(cluster, "member_ids", cluster), dtype=np.int64)


def homogeneity(cluster, cs):
    """Mean similarity over all ordered pairs of distinct members.

    The counter caches unordered pairs, so for the symmetric measures used
    here this is the mean over the ``n (n - 1) / 2`` unordered pairs.
    """
    ids = _member_ids(cluster)
    if ids.size < 2:
        raise DomainError("homogeneity needs at least two members")
    iu, ju = np.triu_indices(ids.size, 1)
    vals = cs.evaluate_pairs(ids[iu], ids[ju])
    return math.fsum(vals.tolist()) / vals.size


def approx_homogeneity(cluster, cs, fraction=0.05, seed=42):
    """Homogeneity of a seeded uniform sample of ``max(2, ceil(fraction n))`` members."""
    ids = _member_ids(cluster)
    if ids.size < 2:
        raise DomainError("homogeneity needs at least two members")
    if not 0.0 < fraction <= 1.0:
        raise DomainError("fraction must lie in (0, 1]")
    m = min(ids.size, max(2, math.ceil(fraction * ids.size)))
    if m == ids.size:
        return homogeneity(ids, cs)
    sample = np.sort(np.random.default_rng(seed).choice(ids, size=m, replace=False))
    return homogeneity(sample, cs)


def auto_tau(cluster, cs, seed=42, fraction=0.05):
    """Exact homogeneity for small clusters, sampled estimate for large ones."""
    ids = _member_ids(cluster)
    if ids.size <= EXACT_HOMOGENEITY_MAX:
        return homogeneity(ids, cs)
    return approx_homogeneity(ids, cs, fraction, seed)


@dataclass(frozen=True, eq=False)
class ReverseGraph:
    """Reverse neighborhoods in CSR layout.

    ``members[indptr[r]:indptr[r+1]]`` are the items that list ``nodes[r]``
    among their k nearest neighbors with similarity at least ``tau``, sorted
    by descending weight and then ascending ItemId.
    """

    nodes: np.ndarray
    indptr: np.ndarray
    members: np.ndarray
    weights: np.ndarray
    tau: float

    @property
    def n(self):
        return int(self.nodes.size)

    @property
    def n_edges(self):
        return int(self.members.size)

    def degrees(self):
        return np.diff(self.indptr)

    def reverse_of(self, item):
        row = int(np.searchsorted(self.nodes, item))
        if row >= self.nodes.size or self.nodes[row] != item:
            raise DomainError(f"item {item} is not a node of the graph")
        lo, hi = self.indptr[row], self.indptr[row + 1]
        return list(zip(self.members[lo:hi].tolist(), self.weights[lo:hi].tolist()))

    def as_dict(self):
        return {
            int(node): self.members[self.indptr[r] : self.indptr[r + 1]].tolist()
            for r, node in enumerate(self.nodes)
        }

    @classmethod
    def from_lists(cls, nodes, lists, tau=-math.inf):
        """Build from ``{node: [(member, weight), ...]}``; used for hand-made graphs."""
        nodes = np.asarray(sorted(nodes), dtype=np.int64)
        indptr, members, weights = [0], [], []
        for node in nodes.tolist():
            entries = sorted(lists.get(node, []), key=lambda e: (-e[1], e[0]))
            members.extend(m for m, _ in entries)
            weights.extend(w for _, w in entries)
            indptr.append(len(members))
        return cls(
            nodes,
            np.asarray(indptr, dtype=np.int64),
            np.asarray(members, dtype=np.int64),
            np.asarray(weights, dtype=np.float64),
            float(tau),
        )


def reverse_and_prune(g, tau):
    """Reverse every edge ``x -> r`` of ``g`` into ``r -> x``, keeping weight >= tau."""
    n, width = g.neighbors.shape
    src = np.repeat(g.nodes, width)
    dst = g.neighbors.ravel()
    w = g.weights.ravel()
    keep = w >= tau
    src, dst, w = src[keep], dst[keep], w[keep]
    row = np.searchsorted(g.nodes, dst)
    order = np.lexsort((src, -w, row))
    row, src, w = row[order], src[order], w[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(row, minlength=n), out=indptr[1:])
    return ReverseGraph(g.nodes.copy(), indptr, src, w, float(tau))
