"""k-NN graphs of a single cluster: brute force and NN-Descent.

Neighbor lists are ordered by descending similarity, ties broken by the lower
ItemId.  All similarity values come from a :class:`CountingSimilarity`, so
stored weights are exactly the cached values and the counter measures the
construction cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

__all__ = ["KnnGraph", "NnDescentParams", "exact_knn", "nn_descent", "graph_recall"]


@dataclass(frozen=True, eq=False)
class KnnGraph:
    """Directed k-NN graph; row ``r`` holds the neighbors of ``nodes[r]``."""

    k: int
    nodes: np.ndarray
    neighbors: np.ndarray
    weights: np.ndarray
    info: dict = field(default_factory=dict, compare=False)

    @property
    def n(self):
        return int(self.nodes.size)

    def neighbors_of(self, item):
        row = int(np.searchsorted(self.nodes, item))
        if row >= self.nodes.size or self.nodes[row] != item:
            raise DomainError(f"item {item} is not a node of the graph")
        return list(zip(self.neighbors[row].tolist(), self.weights[row].tolist()))

    def same_as(self, other):
        return (
            self.k == other.k
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.neighbors, other.neighbors)
            and np.array_equal(self.weights, other.weights)
        )

    def dump(self):
        """One line per node: ``id: nbr:weight nbr:weight ...``."""
        lines = []
        for node, nbrs, ws in zip(self.nodes, self.neighbors, self.weights):
            body = " ".join(f"{int(q)}:{float(w)!r}" for q, w in zip(nbrs, ws))
            lines.append(f"{int(node)}: {body}".rstrip())
        return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class NnDescentParams:
    k: int = 10
    rho: float = 0.7
    delta_nn: float = 0.001
    seed: int = 42
    max_iters: int = 30

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0.0 < self.rho <= 1.0:
            raise ConfigError("rho must lie in (0, 1]")
        if not 0.0 < self.delta_nn < 1.0:
            raise ConfigError("delta_nn must lie in (0, 1)")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be >= 1")


def _cluster_ids(cluster):
    ids = np.asarray(getattr(cluster, "member_ids", cluster), dtype=np.int64)
    if ids.size < 2:
        raise DomainError("a k-NN graph needs at least two items")
    return ids


def exact_knn(cluster, cs, k):
    """Brute-force k-NN graph; evaluates every unordered pair once."""
    if k < 1:
        raise ConfigError("k must be >= 1")
    ids = _cluster_ids(cluster)
    n = ids.size
    width = min(k, n - 1)
    iu, ju = np.triu_indices(n, 1)
    vals = cs.evaluate_pairs(ids[iu], ids[ju])
    S = np.full((n, n), -np.inf)
    S[iu, ju] = vals
    S[ju, iu] = vals
    del iu, ju
    # stable sort of -S keeps ascending column order among equal similarities
    order = np.argsort(-S, axis=1, kind="stable")[:, :width]
    weights = np.take_along_axis(S, order, axis=1)
    return KnnGraph(k, ids, ids[order], weights, {"method": "exact"})


def _group_offsets(group, n_groups):
    counts = np.bincount(group, minlength=n_groups)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    return counts, starts


def _rank_in_group(group_sorted, n_groups):
    """Position of each entry within its group (input sorted by group)."""
    _, starts = _group_offsets(group_sorted, n_groups)
    return np.arange(group_sorted.size) - starts[group_sorted]


def _pairs_within_groups(group_a, item_a, group_b, item_b, n_groups):
    """All ``(a, b)`` with ``a`` and ``b`` in the same group.

    ``group_b`` must be sorted; ``group_a`` may be in any order.
    """
    counts_b, starts_b = _group_offsets(group_b, n_groups)
    reps = counts_b[group_a]
    total = int(reps.sum())
    if total == 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    left = np.repeat(item_a, reps)
    first = np.repeat(starts_b[group_a], reps)
    offset = np.arange(total) - np.repeat(np.cumsum(reps) - reps, reps)
    return left, item_b[first + offset]


def _sample_per_group(group, item, n_groups, size, rng):
    """Up to ``size`` uniformly chosen entries per group."""
    if group.size == 0:
        return group, item
    order = np.lexsort((rng.random(group.size), group))
    g, it = group[order], item[order]
    keep = _rank_in_group(g, n_groups) < size
    return g[keep], it[keep]


def nn_descent(cluster, cs, params=None):
    """Approximate k-NN graph by NN-Descent with new/old flags and sampling.

    Each round builds, for every node, a "new" candidate set (a ``rho*k``
    sample of its new-flagged neighbors plus a ``rho*k`` sample of new
    reverse neighbors) and an "old" set (old-flagged neighbors plus a
    ``rho*k`` sample of old reverse neighbors), evaluates new-new and
    new-old pairs, and merges them into both endpoints' lists.  It stops when
    fewer than ``delta_nn * n * k`` list entries changed in a round, or after
    ``max_iters`` rounds.  When ``k >= n - 1`` the exact graph is returned.
    """
    params = params or NnDescentParams()
    ids = _cluster_ids(cluster)
    n, k = ids.size, params.k
    if k >= n - 1:
        g = exact_knn(ids, cs, k)
        g.info["method"] = "exact-fallback"
        return g
    rng = np.random.default_rng(params.seed)
    sample_size = max(1, int(params.rho * k))

    # random initial lists: k distinct non-self neighbors per node
    nbr = np.empty((n, k), dtype=np.int64)
    for v in range(n):
        pick = rng.choice(n - 1, size=k, replace=False)
        nbr[v] = pick + (pick >= v)
    rows = np.repeat(np.arange(n), k)
    sim = cs.evaluate_pairs(ids[rows], ids[nbr.ravel()]).reshape(n, k)
    order = np.lexsort((nbr, -sim), axis=1)
    nbr = np.take_along_axis(nbr, order, axis=1)
    sim = np.take_along_axis(sim, order, axis=1)
    is_new = np.ones((n, k), dtype=bool)

    history = []
    for _ in range(params.max_iters):
        flat_rows = rows
        flat_nbr = nbr.ravel()
        flat_new = is_new.ravel()

        # forward sets: all old neighbors, a sample of the new ones
        old_rows, old_items = flat_rows[~flat_new], flat_nbr[~flat_new]
        new_pos = np.flatnonzero(flat_new)
        r_new, i_new = _sample_per_group(flat_rows[new_pos], new_pos, n, sample_size, rng)
        is_new.flat[i_new] = False
        new_rows, new_items = r_new, flat_nbr[i_new]

        # reverse sets, sampled
        rev_old_rows, rev_old_items = _sample_per_group(old_items, old_rows, n, sample_size, rng)
        rev_new_rows, rev_new_items = _sample_per_group(new_items, new_rows, n, sample_size, rng)
        cand_new = _unique_group_items(
            np.concatenate((new_rows, rev_new_rows)), np.concatenate((new_items, rev_new_items)), n
        )
        cand_old = _unique_group_items(
            np.concatenate((old_rows, rev_old_rows)), np.concatenate((old_items, rev_old_items)), n
        )

        # local joins: new x new (each unordered pair once) and new x old
        a1, b1 = _pairs_within_groups(cand_new[0], cand_new[1], cand_new[0], cand_new[1], n)
        keep = a1 < b1
        a2, b2 = _pairs_within_groups(cand_new[0], cand_new[1], cand_old[0], cand_old[1], n)
        keep2 = a2 != b2
        a = np.concatenate((a1[keep], a2[keep2]))
        b = np.concatenate((b1[keep], b2[keep2]))
        if a.size == 0:
            history.append(0)
            break
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        pair_keys = np.unique(lo * n + hi)
        lo, hi = pair_keys // n, pair_keys % n
        s = cs.evaluate_pairs(ids[lo], ids[hi])

        nbr, sim, is_new, changed = _merge_updates(
            nbr, sim, is_new, np.concatenate((lo, hi)), np.concatenate((hi, lo)), np.concatenate((s, s)), n, k
        )
        history.append(changed)
        if changed < params.delta_nn * n * k:
            break

    return KnnGraph(
        k, ids, ids[nbr], sim, {"method": "nn-descent", "iterations": len(history), "updates": history}
    )


def _unique_group_items(group, item, n):
    keys = np.unique(group * n + item)
    return keys // n, keys % n


def _merge_updates(nbr, sim, is_new, p, q, s, n, k):
    """Merge proposals ``q -> p`` into the top-k lists; count survivors."""
    # only proposals that beat the current last entry can enter a list
    worst_s, worst_q = sim[p, -1], nbr[p, -1]
    fits = (s > worst_s) | ((s == worst_s) & (q < worst_q))
    p, q, s = p[fits], q[fits], s[fits]
    cur_p = np.repeat(np.arange(n), k)
    all_p = np.concatenate((cur_p, p))
    all_q = np.concatenate((nbr.ravel(), q))
    all_s = np.concatenate((sim.ravel(), s))
    all_new = np.concatenate((is_new.ravel(), np.ones(p.size, dtype=bool)))
    proposed = np.concatenate((np.zeros(cur_p.size, dtype=bool), np.ones(p.size, dtype=bool)))

    # drop proposals for edges already present (existing entries sort first)
    order = np.lexsort((proposed, all_q, all_p))
    key = all_p[order] * n + all_q[order]
    first = np.ones(key.size, dtype=bool)
    first[1:] = key[1:] != key[:-1]
    order = order[first]
    all_p, all_q, all_s, all_new, proposed = (
        all_p[order], all_q[order], all_s[order], all_new[order], proposed[order]
    )

    order = np.lexsort((all_q, -all_s, all_p))
    all_p, all_q, all_s, all_new, proposed = (
        all_p[order], all_q[order], all_s[order], all_new[order], proposed[order]
    )
    top = _rank_in_group(all_p, n) < k
    changed = int(np.count_nonzero(proposed & top))
    return (
        all_q[top].reshape(n, k),
        all_s[top].reshape(n, k),
        all_new[top].reshape(n, k),
        changed,
    )


def graph_recall(approx, exact):
    """Mean fraction of each node's exact neighbors found by ``approx``."""
    if not np.array_equal(approx.nodes, exact.nodes):
        raise DomainError("graphs have different node sets")
    if approx.neighbors.shape != exact.neighbors.shape:
        raise DomainError("graphs have different neighbor-list lengths")
    width = exact.neighbors.shape[1]
    if width == 0:
        return 1.0
    hits = 0
    for a_row, e_row in zip(approx.neighbors, exact.neighbors):
        hits += np.intersect1d(a_row, e_row, assume_unique=True).size
    return hits / (exact.n * width)
