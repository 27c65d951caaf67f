import numpy as np
import pytest

from clusterreps.crs import CrsParams, Prototype
from clusterreps.dataset import gen_synthetic
from clusterreps.errors import DomainError
from clusterreps.harness import build_prototypes
from clusterreps.dataset import split_train_test
from clusterreps.npc import PrototypeSet, batch_classify, classify
from clusterreps.similarity import CosineDense, CountingSimilarity, MatrixSimilarity, NegEuclidean


def ps_of(*groups):
    return PrototypeSet.from_prototypes([Prototype(lab, tuple(ids), 1.0) for lab, ids in groups])


def test_single_candidate():
    sim = CosineDense(np.array([[1.0, 0.0], [0.0, 1.0]]))
    label, rep, s = classify(np.array([-1.0, 0.0]), ps_of(("only", [0])), CountingSimilarity(sim))
    assert (label, rep, s) == ("only", 0, -1.0)


def test_tie_goes_to_lowest_id():
    X = np.zeros((13, 2))
    X[7] = [1, 0]
    X[12] = [0, 1]
    X[[0, 1]] = [[1, 1], [1, 1]]
    sim = CosineDense(X)
    ps = ps_of(("late", [12]), ("early", [7]))
    label, rep, _ = classify(np.array([1.0, 1.0]), ps, CountingSimilarity(sim))
    assert (label, rep) == ("early", 7)
    # the same with a lookup similarity and an item query
    M = np.eye(13)
    M[0, 7] = M[7, 0] = M[0, 12] = M[12, 0] = 0.4
    assert classify(0, ps, CountingSimilarity(MatrixSimilarity(M)))[:2] == ("early", 7)


def test_empty_and_invalid_sets():
    sim = CosineDense(np.eye(3))
    with pytest.raises(DomainError):
        classify(np.ones(3), PrototypeSet.from_prototypes([]), CountingSimilarity(sim))
    with pytest.raises(DomainError):
        ps_of(("a", [0]), ("a", [1]))
    with pytest.raises(DomainError):
        ps_of(("a", [0, 1]), ("b", [1]))
    assert batch_classify(np.empty((0, 3)), ps_of(("a", [0])), CountingSimilarity(sim)) == []


def test_batch_counts_and_order_invariance():
    rng = np.random.default_rng(0)
    X = rng.random((30, 4)) + 0.01
    sim = CosineDense(X)
    groups = [("a", [0, 3, 5]), ("b", [1, 8]), ("c", [2, 20])]
    cs = CountingSimilarity(sim)
    Q = rng.random((10, 4))
    labels = batch_classify(Q, ps_of(*groups), cs)
    assert cs.query_count == 70 and cs.count == 0
    assert batch_classify(Q, ps_of(*groups[::-1]), CountingSimilarity(sim)) == labels


def test_monotone_transform_invariance():
    rng = np.random.default_rng(1)
    A = rng.random((20, 20))
    M = (A + A.T) / 2
    ps = ps_of(("a", [1, 4, 9]), ("b", [2, 3]), ("c", [15]))
    base = batch_classify(np.arange(20), ps, CountingSimilarity(MatrixSimilarity(M)))
    warped = batch_classify(np.arange(20), ps, CountingSimilarity(MatrixSimilarity(np.exp(3 * M) - 7)))
    assert base == warped


def test_self_consistency():
    X = np.random.default_rng(2).random((15, 3)) + 0.01
    ps = ps_of(("a", [0, 5]), ("b", [3, 9]))
    cs = CountingSimilarity(CosineDense(X))
    for r, lab in [(0, "a"), (5, "a"), (3, "b"), (9, "b")]:
        assert classify(X[r], ps, cs)[0] == lab


def test_blob_accuracy():
    ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (5, 5)], "sizes": 200, "sigma": 0.1}, 5)
    train, test = split_train_test(ds, 0.25, 5)
    sim = NegEuclidean(ds.payload)
    protos, _ = build_prototypes(train, sim, "crs", CrsParams(k=5), seed=5)
    pred = batch_classify(test.features(), PrototypeSet.from_prototypes(protos), CountingSimilarity(sim))
    assert np.mean(np.array(pred) == test.labels) >= 0.99
