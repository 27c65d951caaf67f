import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterreps.crs import (
    CrsParams,
    Prototype,
    format_prototypes,
    greedy_cover,
    parse_prototypes,
    select_representatives,
)
from clusterreps.dataset import Cluster, gen_synthetic
from clusterreps.errors import ConfigError, ParseError
from clusterreps.reverse import ReverseGraph
from clusterreps.similarity import CountingSimilarity, NegEuclidean

import oracles
from test_reverse import six_point_star

A, B, C, D, E, F = range(6)


def star():
    return ReverseGraph.from_lists(range(6), {C: [(A, 0.9), (B, 0.9), (D, 0.9), (E, 0.9)]})


def test_star_full_coverage():
    assert greedy_cover(star(), 6, 1.0) == ([C, F], 1.0)


def test_star_relaxed():
    reps, cov = greedy_cover(star(), 6, 0.83)
    assert reps == [C] and cov == pytest.approx(5 / 6)


def test_empty_graph_self_representatives():
    rg = ReverseGraph.from_lists(range(4), {})
    assert greedy_cover(rg, 4, 0.5) == ([0, 1], 0.5)


def test_weight_breaks_count_ties():
    rg = ReverseGraph.from_lists(range(4), {0: [(2, 0.1)], 1: [(3, 0.7)]})
    assert greedy_cover(rg, 4, 0.5)[0] == [1]
    rg = ReverseGraph.from_lists(range(4), {0: [(2, 0.7)], 1: [(3, 0.7)]})
    assert greedy_cover(rg, 4, 0.5)[0] == [0]


def test_covered_hub_may_be_chosen():
    # 1 covers {1,2,3}; afterwards covered node 2 still reaches 4 and 5
    lists = {1: [(2, 1.0), (3, 1.0)], 2: [(4, 1.0), (5, 1.0)], 0: [(6, 1.0)]}
    rg = ReverseGraph.from_lists(range(7), lists)
    assert greedy_cover(rg, 7, 5 / 7)[0] == [1, 2]


def test_weight_score_switch():
    rg = ReverseGraph.from_lists(range(5), {0: [(1, 0.2), (2, 0.2)], 3: [(4, 0.9)]})
    assert greedy_cover(rg, 5, 0.5, score="count")[0] == [0]
    assert greedy_cover(rg, 5, 0.5, score="weight")[0] == [3, 0]


def test_six_point_star_end_to_end():
    sim = NegEuclidean(six_point_star())
    cl = Cluster("x", np.arange(6))
    p = CrsParams(k=2, epsilon=1.0, graph="exact", tau="exact")
    assert select_representatives(cl, CountingSimilarity(sim), p).representatives == (C, F)
    p = CrsParams(k=2, epsilon=0.83, graph="exact", tau="exact")
    assert select_representatives(cl, CountingSimilarity(sim), p).representatives == (C,)


def test_singleton():
    sim = NegEuclidean(np.zeros((5, 2)))
    p = select_representatives(Cluster("s", [3]), CountingSimilarity(sim))
    assert p.representatives == (3,) and p.covered_fraction == 1.0


def test_params_validation():
    for bad in ({"k": 0}, {"epsilon": 0}, {"epsilon": 1.2}, {"tau": "median"}, {"graph": "hnsw"},
                {"rho": 0}, {"tau": float("nan")}, {"score": "x"}):
        with pytest.raises(ConfigError):
            CrsParams(**bad)


def _random_cluster(rng):
    kind = rng.integers(3)
    n = int(rng.integers(2, 120))
    seed = int(rng.integers(1 << 30))
    if kind == 0:
        X = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (2, 1)], "sizes": [n - n // 2, n // 2], "sigma": 0.7}, seed).payload
    elif kind == 1:
        X = gen_synthetic("two-spirals", {"n": n}, seed).payload
    else:
        X = rng.uniform(-1, 1, (n, 2))
    return X


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(1, 12), eps=st.sampled_from([0.5, 0.8, 0.95, 1.0]))
def test_matches_oracle_and_sound(seed, k, eps):
    rng = np.random.default_rng(seed)
    X = _random_cluster(rng)
    sim = NegEuclidean(X)
    ids = np.arange(X.shape[0])
    proto, rg = select_representatives(
        Cluster("c", ids), CountingSimilarity(sim), CrsParams(k=k, epsilon=eps, graph="exact"), return_graph=True
    )
    assert list(proto.representatives) == oracles.crs_exact(ids, sim, k, eps)
    cover = set(proto.representatives)
    for r in proto.representatives:
        cover.update(rg.as_dict()[r])
    assert len(cover) / ids.size >= eps
    assert proto.covered_fraction == len(cover) / ids.size
    assert len(set(proto.representatives)) == len(proto.representatives)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), k=st.integers(2, 10))
def test_epsilon_prefix(seed, k):
    X = np.random.default_rng(seed).standard_normal((80, 2))
    sim = NegEuclidean(X)
    cl = Cluster("c", np.arange(80))
    reps = [
        select_representatives(cl, CountingSimilarity(sim), CrsParams(k=k, epsilon=e, seed=seed)).representatives
        for e in (0.5, 0.8, 0.95, 1.0)
    ]
    for short, long in zip(reps, reps[1:]):
        assert long[: len(short)] == short


def test_determinism_nn_descent():
    ds = gen_synthetic("two-spirals", {"n": 255}, 0)
    cl = ds.clusters()[0]
    sim = NegEuclidean(ds.payload)
    a = select_representatives(cl, CountingSimilarity(sim), CrsParams(seed=3))
    b = select_representatives(cl, CountingSimilarity(sim), CrsParams(seed=3))
    assert a == b


def test_serialization_roundtrip():
    protos = [
        Prototype("a", (5, 2, 9), 0.96, {"k": 10, "epsilon": 0.95, "tau": -0.25}),
        Prototype("b c", (1,), 1.0, {"k": 10, "epsilon": 0.95, "tau": None}),
    ]
    text = format_prototypes(protos, ["seed=1"])
    assert text.splitlines()[0] == "# seed=1"
    assert text.splitlines()[1] == "a\t0.95\t10\t-0.25\t0.96\t5,2,9"
    back = parse_prototypes(text)
    assert [p.representatives for p in back] == [(5, 2, 9), (1,)]
    assert back[1].params["tau"] is None
    with pytest.raises(ParseError):
        parse_prototypes("a\t1\t2\n")
