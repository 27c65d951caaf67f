import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterreps.dataset import gen_synthetic
from clusterreps.errors import ConfigError, DomainError
from clusterreps.knn import KnnGraph, NnDescentParams, exact_knn, graph_recall, nn_descent
from clusterreps.similarity import CosineDense, CountingSimilarity, MatrixSimilarity, NegEuclidean

import oracles


def three_items():
    M = np.array([[1.0, 0.9, 0.1], [0.9, 1.0, 0.5], [0.1, 0.5, 1.0]])
    return CountingSimilarity(MatrixSimilarity(M))


def test_exact_knn_example():
    g = exact_knn([0, 1, 2], three_items(), 1)
    assert g.neighbors.tolist() == [[1], [0], [1]]
    assert g.weights.tolist() == [[0.9], [0.9], [0.5]]


def test_exact_knn_tie_rule():
    M = np.array([[1.0, 0.5, 0.5], [0.5, 1.0, 0.2], [0.5, 0.2, 1.0]])
    g = exact_knn([0, 1, 2], CountingSimilarity(MatrixSimilarity(M)), 1)
    assert g.neighbors_of(0) == [(1, 0.5)]


def test_exact_knn_saturation_and_count():
    X = np.random.default_rng(0).random((9, 3)) + 0.1
    cs = CountingSimilarity(CosineDense(X))
    g = exact_knn(np.arange(9), cs, 20)
    assert g.neighbors.shape == (9, 8)
    for r in range(9):
        assert sorted(g.neighbors[r].tolist()) == [q for q in range(9) if q != r]
    assert cs.count == 36
    with pytest.raises(DomainError):
        exact_knn([3], cs, 2)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(2, 25), k=st.integers(1, 8), seed=st.integers(0, 1000))
def test_exact_knn_matches_oracle(n, k, seed):
    X = np.random.default_rng(seed).standard_normal((n, 2))
    sim = NegEuclidean(X)
    ids = list(range(n))
    ref = oracles.knn_lists(ids, oracles.sim_table(sim, ids), k)
    g = exact_knn(ids, CountingSimilarity(sim), k)
    assert g.neighbors.tolist() == [ref[i] for i in ids]


def test_nn_descent_delegates_when_saturated():
    X = np.random.default_rng(1).standard_normal((12, 2))
    sim = NegEuclidean(X)
    approx = nn_descent(np.arange(12), CountingSimilarity(sim), NnDescentParams(k=11))
    assert approx.same_as(exact_knn(np.arange(12), CountingSimilarity(sim), 11))


def _blobs(n, seed):
    ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (3, 3)], "sizes": n // 2, "sigma": 1.0}, seed)
    return ds, NegEuclidean(ds.payload)


def test_nn_descent_invariants_and_determinism():
    ds, sim = _blobs(300, 0)
    ids = ds.ids[::2] + 0  # non-contiguous ids
    p = NnDescentParams(k=8, seed=5)
    cs = CountingSimilarity(sim)
    g = nn_descent(ids, cs, p)
    again = nn_descent(ids, CountingSimilarity(sim), p)
    assert g.same_as(again)
    assert g.dump() == again.dump()
    for node, nbrs, ws in zip(g.nodes, g.neighbors, g.weights):
        assert node not in nbrs
        assert len(set(nbrs.tolist())) == nbrs.size
        assert set(nbrs.tolist()) <= set(ids.tolist())
        for q, w in zip(nbrs, ws):
            assert cs.cached(node, q) == w
        order = sorted(zip((-ws).tolist(), nbrs.tolist()))
        assert [q for _, q in order] == nbrs.tolist()
    assert cs.count <= ids.size * (ids.size - 1) // 2


def test_nn_descent_recall_small():
    ds, sim = _blobs(400, 3)
    approx = nn_descent(ds.ids, CountingSimilarity(sim), NnDescentParams(k=10, seed=1))
    exact = exact_knn(ds.ids, CountingSimilarity(sim), 10)
    assert graph_recall(approx, exact) >= 0.9
    assert approx.info["iterations"] <= 30


def test_nn_descent_respects_max_iters():
    ds, sim = _blobs(200, 4)
    g = nn_descent(ds.ids, CountingSimilarity(sim), NnDescentParams(k=5, max_iters=1, delta_nn=1e-9))
    assert g.info["iterations"] == 1


def test_nn_descent_params_validation():
    for bad in ({"k": 0}, {"rho": 0}, {"rho": 1.5}, {"delta_nn": 0}, {"delta_nn": 1}, {"max_iters": 0}):
        with pytest.raises(ConfigError):
            NnDescentParams(**bad)
    assert NnDescentParams() == NnDescentParams(10, 0.7, 0.001, 42, 30)


def _graph(nbrs):
    nodes = np.array(sorted(nbrs))
    arr = np.array([nbrs[n] for n in nodes])
    return KnnGraph(arr.shape[1], nodes, arr, np.zeros(arr.shape))


def test_graph_recall_examples():
    exact = _graph({0: [1, 2], 1: [0, 2]})
    assert graph_recall(exact, exact) == 1.0
    assert graph_recall(_graph({0: [1, 3], 1: [0, 2]}), exact) == 0.75
    assert graph_recall(_graph({0: [3, 4], 1: [3, 4]}), exact) == 0.0
    with pytest.raises(DomainError):
        graph_recall(_graph({0: [1, 2], 5: [0, 2]}), exact)


def test_dump_format():
    g = exact_knn([0, 1, 2], three_items(), 1)
    assert g.dump() == "0: 1:0.9\n1: 0:0.9\n2: 1:0.5\n"


def test_nn_descent_lists_never_worsen():
    ds, sim = _blobs(300, 7)
    prev = None
    for t in range(1, 6):
        g = nn_descent(ds.ids, CountingSimilarity(sim), NnDescentParams(k=6, seed=2, max_iters=t, delta_nn=1e-9))
        worst = g.weights[:, -1]
        if prev is not None:
            assert np.all(worst >= prev)
        prev = worst
