"""Reference prototype selectors: delta-medoids, random fraction, whole cluster."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .crs import Prototype
from .errors import ConfigError

__all__ = ["DeltaMedoidsParams", "delta_medoids", "random_fraction", "full_cluster"]


@dataclass(frozen=True)
class DeltaMedoidsParams:
    """``delta=None`` means: estimate it per cluster as the homogeneity of a 5 % sample."""

    delta: float | None = None
    max_refine_iters: int = 20

    def __post_init__(self):
        if self.delta is not None and not math.isfinite(self.delta):
            raise ConfigError("delta must be finite")
        if self.max_refine_iters < 1:
            raise ConfigError("max_refine_iters must be >= 1")


def _assign(ids, reps, cs, delta):
    """Scan members in id order; attach each to its best rep within delta or promote it."""
    reps = list(reps)
    rep_set = set(reps)
    assignment = {}
    for x in ids.tolist():
        if x in rep_set:
            assignment[x] = x
            continue
        cand = np.asarray(reps, dtype=np.int64)
        sims = cs.evaluate_pairs(np.full(cand.size, x), cand)
        ok = sims >= delta
        if not ok.any():
            reps.append(x)
            rep_set.add(x)
            assignment[x] = x
            continue
        best = max(zip(sims[ok].tolist(), (-cand[ok]).tolist()))
        assignment[x] = -best[1]
    return reps, assignment


def _objective(assignment, cs):
    pairs = [(x, r) for x, r in assignment.items() if x != r]
    if not pairs:
        return 0.0
    x, r = np.asarray(pairs, dtype=np.int64).T
    return math.fsum(cs.evaluate_pairs(x, r).tolist())


def _medoid(members, cs):
    members = np.asarray(sorted(members), dtype=np.int64)
    if members.size == 1:
        return int(members[0])
    iu, ju = np.triu_indices(members.size, 1)
    vals = cs.evaluate_pairs(members[iu], members[ju])
    totals = np.zeros(members.size)
    np.add.at(totals, iu, vals)
    np.add.at(totals, ju, vals)
    return int(members[np.argmax(totals)])  # first maximum = lowest id


def delta_medoids(cluster, cs, params, return_trace=False):
    """Semi-greedy delta-neighbourhood cover followed by medoid refinement.

    First pass: members are scanned by ascending id; each joins the most
    similar existing representative with similarity >= delta, otherwise it
    becomes a representative.  Refinement replaces each representative by
    the medoid of its assigned set and reassigns everyone the same way.  It
    stops when the representative set no longer changes, after
    ``max_refine_iters`` rounds, or when a round would lower the summed
    member-to-representative similarity (that round is discarded).
    """
    if params.delta is None:
        raise ConfigError("delta must be resolved before calling delta_medoids")
    ids = cluster.member_ids
    delta = float(params.delta)
    start = cs.count
    reps, assignment = _assign(ids, [], cs, delta)
    objective = _objective(assignment, cs)
    trace = [objective]
    rounds = 0
    for _ in range(params.max_refine_iters):
        groups = {r: [r] for r in reps}
        for x, r in assignment.items():
            if x != r:
                groups[r].append(x)
        medoids = [_medoid(groups[r], cs) for r in reps]
        if set(medoids) == set(reps):
            break
        new_reps, new_assignment = _assign(ids, medoids, cs, delta)
        new_objective = _objective(new_assignment, cs)
        if new_objective < objective:
            break
        rounds += 1
        stable = set(new_reps) == set(reps)
        reps, assignment, objective = new_reps, new_assignment, new_objective
        trace.append(objective)
        if stable:
            break
    proto = Prototype(
        cluster.label,
        tuple(int(r) for r in reps),
        1.0,
        {"method": "delta-medoids", "delta": delta, "refine_rounds": rounds},
        len(cluster),
        cs.count - start,
        0,
    )
    if return_trace:
        return proto, assignment, trace
    return proto


def random_fraction(cluster, fraction, seed=42):
    """Uniform sample of ``max(1, round(fraction * n))`` members, ascending ids."""
    if not 0.0 < fraction <= 1.0:
        raise ConfigError("fraction must lie in (0, 1]")
    ids = cluster.member_ids
    m = max(1, int(math.floor(fraction * ids.size + 0.5)))
    pick = np.sort(np.random.default_rng(seed).choice(ids, size=m, replace=False))
    return Prototype(
        cluster.label,
        tuple(int(i) for i in pick),
        m / ids.size,
        {"method": "random", "fraction": fraction, "seed": seed},
        len(cluster),
    )


def full_cluster(cluster):
    return Prototype(
        cluster.label,
        tuple(int(i) for i in cluster.member_ids),
        1.0,
        {"method": "full"},
        len(cluster),
    )
