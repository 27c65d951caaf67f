import csv
import io
import json
import math

import numpy as np
import pytest

from clusterreps.baselines import DeltaMedoidsParams
from clusterreps.crs import CrsParams
from clusterreps.dataset import (
    gen_similarity_matrix,
    gen_synthetic,
    load_similarity_matrix,
    save_similarity_matrix,
    split_train_test,
)
from clusterreps.errors import ConfigError, DomainError
from clusterreps.harness import (
    build_prototypes,
    cluster_meta,
    confusion_csv,
    dumps,
    per_class_csv,
    per_cluster_table,
    precision_recall,
    report_to_dict,
    run_eval,
    sweep_k,
)
from clusterreps.similarity import NegEuclidean

NETWORK_SIZES = [1079, 2407, 75, 2219, 346, 59, 248, 49, 52, 108, 218, 44, 42, 32]
NETWORK_H = [0.58, 0.14, 0.84, 0.64, 0.60, 0.92, 0.34, 0.84, 0.69, 0.35, 0.78, 0.35, 0.79, 1.0]


@pytest.fixture(scope="module")
def blobs():
    ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (5, 5)], "sizes": 150, "sigma": 0.1}, 1)
    return ds, NegEuclidean(ds.payload)


@pytest.mark.parametrize("method, params", [("crs", None), ("delta-medoids", None), ("random", 0.05), ("full", None)])
def test_separable_blobs(blobs, method, params):
    ds, sim = blobs
    rep = run_eval(ds, sim, method, params)
    assert rep.macro_precision == 1.0 and rep.macro_recall == 1.0
    assert np.count_nonzero(rep.confusion - np.diag(np.diag(rep.confusion))) == 0
    assert rep.confusion.sum() == rep.n_test
    assert rep.confusion.sum(axis=1).tolist() == [s for *_, s in rep.per_class]
    n_reps = sum(len(p) for p in rep.prototypes)
    assert rep.classify_calls == rep.n_test * n_reps
    assert 0 < rep.prototype_fraction <= 1


def test_full_has_no_build_cost(blobs):
    rep = run_eval(*blobs, method="full")
    assert rep.prototype_fraction == 1.0 and rep.s_ratio_build == 0.0 and rep.build_calls == 0


def test_unknown_method_and_single_cluster(blobs):
    ds, sim = blobs
    with pytest.raises(ConfigError):
        run_eval(ds, sim, "ds3")
    one = ds.subset(ds.ids[ds.labels == "blob0"])
    with pytest.raises(DomainError):
        run_eval(one, sim, "crs")


def test_precision_recall_undefined():
    conf, p, r, support = precision_recall(["a", "a", "b"], ["a", "a", "a"], ["a", "b", "c"])
    assert p[0] == pytest.approx(2 / 3) and r[0] == 1.0
    assert p[1] == 0 or math.isnan(p[1])
    assert math.isnan(p[2]) and math.isnan(r[2])
    assert support.tolist() == [2, 1, 0]


def test_workers_do_not_change_results():
    ds = gen_synthetic("two-spirals", {"n": 200}, 2)
    sim = NegEuclidean(ds.payload)
    a = run_eval(ds, sim, "crs", CrsParams(k=6), workers=1)
    b = run_eval(ds, sim, "crs", CrsParams(k=6), workers=4)
    assert dumps(report_to_dict(a)) == dumps(report_to_dict(b))


def test_sweep_spirals():
    ds = gen_synthetic("two-spirals", {"n": 255}, 42)
    sim = NegEuclidean(ds.payload)
    out = sweep_k(ds, sim, [15, 5, 10])
    assert [k for k, _ in out] == [5, 10, 15]
    fr = [r.prototype_fraction for _, r in out]
    assert fr[0] > fr[1] > fr[2]
    calls = [r.build_calls for _, r in out]
    assert calls == sorted(calls)
    single = sweep_k(ds, sim, [10])
    direct = run_eval(ds, sim, "crs", CrsParams(k=10))
    assert dumps(report_to_dict(single[0][1])) == dumps(report_to_dict(direct))
    with pytest.raises(ConfigError):
        sweep_k(ds, sim, [])


def test_per_cluster_table(blobs):
    assert per_cluster_table([]).splitlines() == [
        "cluster,size,homogeneity,method,k,n_reps,prototype_fraction,precision,recall"
    ]
    ds, sim = blobs
    sub = ds.subset(ds.ids[:40].tolist() + ds.ids[-40:].tolist())
    rep = run_eval(sub, sim, "crs", CrsParams(k=5))
    meta = cluster_meta(sub, sim)
    rows = list(csv.DictReader(io.StringIO(per_cluster_table([rep], meta))))
    assert len(rows) == 2
    assert rows[0]["cluster"] == "blob0" and int(rows[0]["size"]) == 40
    assert float(rows[0]["homogeneity"]) == meta["blob0"]["homogeneity"]


def test_network_style_matrix(tmp_path):
    sizes = [max(10, round(s / 10)) for s in NETWORK_SIZES]
    ds, sim = gen_similarity_matrix(sizes, NETWORK_H, seed=0)
    save_similarity_matrix(ds, sim.matrix, tmp_path / "net.txt")
    ds2, sim2 = load_similarity_matrix(tmp_path / "net.txt")
    meta = cluster_meta(ds2, sim2)
    for c, h in enumerate(NETWORK_H):
        assert meta[f"c{c}"]["size"] == sizes[c]
        assert abs(meta[f"c{c}"]["homogeneity"] - h) <= 0.02
    rep = run_eval(ds2, sim2, "crs")
    table = list(csv.DictReader(io.StringIO(per_cluster_table([rep], meta))))
    assert len(table) == 14
    assert all(abs(float(row["homogeneity"]) - NETWORK_H[int(row["cluster"][1:])]) <= 0.02 for row in table)


def test_report_outputs(blobs):
    rep = run_eval(*blobs, method="delta-medoids", params=DeltaMedoidsParams())
    doc = json.loads(dumps(report_to_dict(rep)))
    assert doc["method"] == "delta-medoids" and doc["params"]["seed"] == 42
    assert doc["confusion"] == rep.confusion.tolist()
    lines = confusion_csv(rep).splitlines()
    assert lines[0] == "true\\predicted,blob0,blob1"
    assert per_class_csv(rep).splitlines()[0] == "label,precision,recall,support"


def test_report_nan_becomes_null():
    ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (0.1, 0)], "sizes": [20, 2], "sigma": 1.0}, 0)
    rep = run_eval(ds, NegEuclidean(ds.payload), "random", 0.05, test_fraction=0.5)
    doc = report_to_dict(rep)
    for row in doc["per_class"]:
        for key in ("precision", "recall"):
            assert row[key] is None or 0.0 <= row[key] <= 1.0


def test_build_prototypes_fresh_counters(blobs):
    ds, sim = blobs
    protos, calls = build_prototypes(ds, sim, "crs", CrsParams(k=5, tau=0.0 - 1.0))
    assert calls == sum(p.calls for p in protos)
