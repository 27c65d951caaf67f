"""Nearest prototype classification.

A query gets the label of the prototype holding the representative most
similar to it; among equally similar representatives the lowest ItemId wins,
whichever prototype it belongs to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

__all__ = ["PrototypeSet", "classify", "batch_classify", "classify_details"]

_QUERY_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class PrototypeSet:
    """Union of per-cluster prototypes, representatives sorted by ItemId."""

    prototypes: tuple
    rep_ids: np.ndarray
    rep_labels: np.ndarray

    @classmethod
    def from_prototypes(cls, prototypes):
        prototypes = tuple(prototypes)
        labels = [p.cluster_label for p in prototypes]
        if len(set(labels)) != len(labels):
            raise DomainError("prototypes must have distinct cluster labels")
        ids, labs = [], []
        for p in prototypes:
            ids.extend(p.representatives)
            labs.extend([p.cluster_label] * len(p.representatives))
        ids = np.asarray(ids, dtype=np.int64)
        if np.unique(ids).size != ids.size:
            raise DomainError("representatives must be disjoint across prototypes")
        order = np.argsort(ids, kind="stable")
        return cls(prototypes, ids[order], np.asarray(labs, dtype=object)[order])

    def __len__(self):
        return int(self.rep_ids.size)


def _n_queries(queries):
    return queries.shape[0] if hasattr(queries, "shape") and len(queries.shape) == 2 else len(queries)


def classify_details(queries, ps, cs):
    """Label, best representative and its similarity for every query row.

    ``queries`` holds payload rows (dense array, sparse matrix, or ItemIds for
    matrix-lookup similarities).  Exactly ``len(queries) * len(ps)``
    similarity evaluations are made.
    """
    if len(ps) == 0:
        raise DomainError("empty prototype set")
    m = _n_queries(queries)
    labels = np.empty(m, dtype=object)
    best = np.empty(m, dtype=np.int64)
    best_sim = np.empty(m, dtype=np.float64)
    for lo in range(0, m, _QUERY_CHUNK):
        hi = min(lo + _QUERY_CHUNK, m)
        sims = cs.evaluate_queries(queries[lo:hi], ps.rep_ids)
        # argmax returns the first maximum, i.e. the lowest ItemId
        arg = np.argmax(sims, axis=1)
        labels[lo:hi] = ps.rep_labels[arg]
        best[lo:hi] = ps.rep_ids[arg]
        best_sim[lo:hi] = sims[np.arange(hi - lo), arg]
    return labels, best, best_sim


def classify(x, ps, cs):
    """``(label, best_rep, best_sim)`` for a single query payload."""
    if hasattr(x, "ndim") and getattr(x, "ndim", 0) == 1:
        x = x[None, :]
    elif isinstance(x, (int, np.integer)):
        x = np.array([x])
    labels, best, sims = classify_details(x, ps, cs)
    return labels[0], int(best[0]), float(sims[0])


def batch_classify(queries, ps, cs):
    """Labels only; an empty query list gives an empty list."""
    if _n_queries(queries) == 0:
        return []
    return classify_details(queries, ps, cs)[0].tolist()
