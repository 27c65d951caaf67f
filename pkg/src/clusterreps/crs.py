"""Cluster representatives selection by greedy cover of a reverse k-NN graph.

For one cluster: build its k-NN graph (NN-Descent or brute force), reverse it,
drop edges weaker than ``tau`` (by default the cluster homogeneity), then
repeatedly pick the member whose reverse neighborhood covers the most
still-uncovered members until an ``epsilon`` fraction of the cluster is
covered.  A representative always covers itself.
"""

from __future__ import annotations

import heapq
import math
import os
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, ParseError
from .knn import NnDescentParams, exact_knn, nn_descent
from .reverse import approx_homogeneity, auto_tau, homogeneity, reverse_and_prune

__all__ = [
    "CrsParams",
    "Prototype",
    "greedy_cover",
    "build_reverse_graph",
    "select_representatives",
    "format_prototypes",
    "parse_prototypes",
    "read_prototypes",
]

TAU_MODES = ("auto", "exact", "approx")


@dataclass(frozen=True)
class CrsParams:
    """Parameters of the selection.

    ``tau`` is ``"auto"`` (exact homogeneity up to 2000 members, a 5 %
    sample above), ``"exact"``, ``"approx"`` (always sampled) or a number.
    ``score="weight"`` ranks candidates by the summed weight of the
    uncovered members they cover instead of their number; it is meant for
    non-negative similarities.
    """

    k: int = 10
    epsilon: float = 0.95
    tau: object = "auto"
    graph: str = "nn-descent"
    rho: float = 0.7
    delta_nn: float = 0.001
    max_iters: int = 30
    seed: int = 42
    score: str = "count"
    tau_fraction: float = 0.05

    def __post_init__(self):
        if not isinstance(self.k, (int, np.integer)) or self.k < 1:
            raise ConfigError("k must be a positive integer")
        if not 0.0 < self.epsilon <= 1.0:
            raise ConfigError("epsilon must lie in (0, 1]")
        if self.graph not in ("nn-descent", "exact"):
            raise ConfigError(f"unknown graph mode {self.graph!r}")
        if self.score not in ("count", "weight"):
            raise ConfigError(f"unknown score {self.score!r}")
        if isinstance(self.tau, str):
            if self.tau not in TAU_MODES:
                raise ConfigError(f"tau must be a number or one of {TAU_MODES}")
        elif not math.isfinite(float(self.tau)):
            raise ConfigError("fixed tau must be finite")
        if not 0.0 < self.tau_fraction <= 1.0:
            raise ConfigError("tau_fraction must lie in (0, 1]")
        self.nn_params()  # validates rho, delta_nn, max_iters

    def nn_params(self):
        return NnDescentParams(self.k, self.rho, self.delta_nn, self.seed, self.max_iters)

    def with_seed(self, seed):
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class Prototype:
    """Representatives of one cluster in selection order."""

    cluster_label: str
    representatives: tuple
    covered_fraction: float
    params: dict = field(default_factory=dict)
    cluster_size: int = 0
    calls: int = 0
    graph_calls: int = 0

    def __len__(self):
        return len(self.representatives)

    @property
    def fraction(self):
        return len(self.representatives) / self.cluster_size if self.cluster_size else float("nan")


# ----------------------------------------------------------------------------
# greedy cover


def greedy_cover(rg, cluster_size, epsilon, score="count"):
    """Pick representatives on ``rg`` until ``epsilon`` of the cluster is covered.

    Candidates are ranked by the number of uncovered members in their
    reverse neighborhood (plus one if the candidate itself is uncovered),
    then by the summed weight of those neighbors, then by lower ItemId.
    Returns ``(representatives, covered_fraction)``.
    """
    if not 0.0 < epsilon <= 1.0:
        raise ConfigError("epsilon must lie in (0, 1]")
    if rg.n != cluster_size or cluster_size < 1:
        raise ConfigError("reverse graph must cover the whole, non-empty cluster")
    rows = np.searchsorted(rg.nodes, rg.members)
    if score == "weight":
        reps, covered = _cover_by_weight(rg, rows, cluster_size, epsilon)
    else:
        adj = [rows[rg.indptr[r] : rg.indptr[r + 1]].tolist() for r in range(rg.n)]
        wts = [rg.weights[rg.indptr[r] : rg.indptr[r + 1]].tolist() for r in range(rg.n)]
        reps, covered = _cover_by_count(adj, wts, rg.nodes.tolist(), cluster_size, epsilon)
    return [int(rg.nodes[r]) for r in reps], covered / cluster_size


def _cover_by_count(adj, wts, node_ids, size, epsilon):
    uncovered = [True] * size
    n_covered = 0
    reps = []

    def key(r):
        hit = [w for c, w in zip(adj[r], wts[r]) if uncovered[c]]
        return (-(len(hit) + uncovered[r]), -math.fsum(hit), node_ids[r], r)

    # ranking keys only decrease as members get covered, so stale heap
    # entries are upper bounds and lazy re-evaluation is exact
    heap = [key(r) for r in range(size)]
    heapq.heapify(heap)
    while n_covered / size < epsilon:
        entry = heapq.heappop(heap)
        r = entry[3]
        fresh = key(r)
        if fresh != entry:
            heapq.heappush(heap, fresh)
            continue
        reps.append(r)
        for c in [r, *adj[r]]:
            if uncovered[c]:
                uncovered[c] = False
                n_covered += 1
    return reps, n_covered


def _cover_by_weight(rg, rows, size, epsilon):
    edge_row = np.repeat(np.arange(size), rg.degrees())
    uncovered = np.ones(size, dtype=bool)
    is_rep = np.zeros(size, dtype=bool)
    reps = []
    while (size - np.count_nonzero(uncovered)) / size < epsilon:
        live = uncovered[rows]
        wsum = np.bincount(edge_row, weights=np.where(live, rg.weights, 0.0), minlength=size)
        count = np.bincount(edge_row, weights=live, minlength=size) + uncovered
        order = np.lexsort((rg.nodes, -count, -wsum))
        r = int(order[~is_rep[order]][0])
        reps.append(r)
        is_rep[r] = True
        uncovered[r] = False
        uncovered[rows[rg.indptr[r] : rg.indptr[r + 1]]] = False
    return reps, size - int(np.count_nonzero(uncovered))


# ----------------------------------------------------------------------------
# end-to-end selection


def _resolve_tau(ids, cs, params):
    if params.tau == "auto":
        return auto_tau(ids, cs, params.seed, params.tau_fraction)
    if params.tau == "exact":
        return homogeneity(ids, cs)
    if params.tau == "approx":
        return approx_homogeneity(ids, cs, params.tau_fraction, params.seed)
    return float(params.tau)


def build_reverse_graph(cluster, cs, params):
    """k-NN graph per ``params.graph``, then reversal pruned at the resolved tau."""
    ids = np.asarray(getattr(cluster, "member_ids", cluster), dtype=np.int64)
    if params.graph == "exact":
        g = exact_knn(ids, cs, params.k)
    else:
        g = nn_descent(ids, cs, params.nn_params())
    graph_calls = cs.count
    tau = _resolve_tau(ids, cs, params)
    return reverse_and_prune(g, tau), graph_calls


def select_representatives(cluster, cs, params=None, return_graph=False):
    """Prototype of ``cluster`` (a :class:`~clusterreps.dataset.Cluster`)."""
    params = params or CrsParams()
    ids = cluster.member_ids
    start = cs.count
    echo = {"method": "crs", "k": params.k, "epsilon": params.epsilon, "seed": params.seed}
    if ids.size == 1:
        proto = Prototype(cluster.label, (int(ids[0]),), 1.0, {**echo, "tau": None}, 1, 0, 0)
        return (proto, None) if return_graph else proto
    rg, graph_calls = build_reverse_graph(ids, cs, params)
    reps, covered = greedy_cover(rg, ids.size, params.epsilon, params.score)
    echo["tau"] = rg.tau
    proto = Prototype(
        cluster.label,
        tuple(reps),
        covered,
        echo,
        int(ids.size),
        cs.count - start,
        graph_calls - start,
    )
    return (proto, rg) if return_graph else proto


# ----------------------------------------------------------------------------
# serialization


def _fmt(value):
    if value is None:
        return "-"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_prototypes(prototypes, header=None):
    """``label<TAB>epsilon<TAB>k<TAB>tau<TAB>covered_fraction<TAB>id,id,...`` lines.

    ``header`` lines are emitted first, each prefixed with ``# ``.
    """
    lines = [f"# {h}" for h in (header or [])]
    for p in prototypes:
        fields_ = [
            p.cluster_label,
            _fmt(p.params.get("epsilon")),
            _fmt(p.params.get("k")),
            _fmt(p.params.get("tau")),
            _fmt(float(p.covered_fraction)),
            ",".join(str(r) for r in p.representatives),
        ]
        lines.append("\t".join(fields_))
    return "\n".join(lines) + ("\n" if lines else "")


def _parse_opt(text, conv, lineno):
    if text == "-":
        return None
    try:
        return conv(text)
    except ValueError:
        raise ParseError(f"bad field {text!r}", lineno) from None


def parse_prototypes(text):
    protos = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise ParseError("expected 6 tab-separated fields", lineno)
        label, eps, k, tau, cov, ids = parts
        try:
            reps = tuple(int(t) for t in ids.split(",") if t)
        except ValueError:
            raise ParseError("bad representative id list", lineno) from None
        if not reps:
            raise ParseError("prototype without representatives", lineno)
        params = {
            "epsilon": _parse_opt(eps, float, lineno),
            "k": _parse_opt(k, int, lineno),
            "tau": _parse_opt(tau, float, lineno),
        }
        protos.append(Prototype(label, reps, _parse_opt(cov, float, lineno), params))
    return protos


def read_prototypes(path):
    with open(os.fspath(path), encoding="utf-8") as fh:
        return parse_prototypes(fh.read())
