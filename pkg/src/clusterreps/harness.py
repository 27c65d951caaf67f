"""Experiment runner: prototypes per training cluster, NPC on held-out items, metrics.

Every method goes through the same split, the same classifier and the same
metric code; only the prototypes differ.  Similarity calls are counted per
cluster while building (fresh counter per cluster) and separately while
classifying.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import DeltaMedoidsParams, delta_medoids, full_cluster, random_fraction
from .crs import CrsParams, select_representatives
from .dataset import split_train_test
from .errors import ConfigError, DomainError
from .npc import PrototypeSet, classify_details
from .reverse import approx_homogeneity, homogeneity
from .similarity import CountingSimilarity

__all__ = [
    "MetricsReport",
    "METHODS",
    "cluster_seed",
    "build_prototypes",
    "precision_recall",
    "run_eval",
    "sweep_k",
    "cluster_meta",
    "per_cluster_table",
    "per_class_csv",
    "confusion_csv",
    "report_to_dict",
]

METHODS = ("crs", "delta-medoids", "random", "full")


def cluster_seed(seed, index):
    """Independent, reproducible seed for the ``index``-th cluster."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1)[0])


def _default_params(method):
    if method == "crs":
        return CrsParams()
    if method == "delta-medoids":
        return DeltaMedoidsParams()
    if method == "random":
        return 0.05
    return None


def _build_one(cluster, index, sim, method, params, seed):
    cs = CountingSimilarity(sim)
    cseed = cluster_seed(seed, index)
    if method == "crs":
        proto = select_representatives(cluster, cs, params.with_seed(cseed))
    elif method == "delta-medoids":
        if len(cluster) == 1:
            proto = full_cluster(cluster)
        else:
            delta = params.delta
            if delta is None:
                delta = approx_homogeneity(cluster, cs, 0.05, cseed)
            dm = DeltaMedoidsParams(delta, params.max_refine_iters)
            proto = delta_medoids(cluster, cs, dm)
    elif method == "random":
        proto = random_fraction(cluster, float(params), cseed)
    else:
        proto = full_cluster(cluster)
    return proto, cs.count


def build_prototypes(train, sim, method="crs", params=None, seed=42, workers=1):
    """Prototypes for every training cluster and the total build-phase calls."""
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; choose from {METHODS}")
    params = _default_params(method) if params is None else params
    clusters = train.clusters()
    jobs = [(cl, i, sim, method, params, seed) for i, cl in enumerate(clusters)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda job: _build_one(*job), jobs))
    else:
        results = [_build_one(*job) for job in jobs]
    protos = [p for p, _ in results]
    return protos, sum(c for _, c in results)


def precision_recall(y_true, y_pred, labels):
    """Confusion matrix and per-class precision/recall (NaN where undefined)."""
    index = {lab: i for i, lab in enumerate(labels)}
    conf = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        conf[index[t], index[p]] += 1
    tp = np.diag(conf).astype(np.float64)
    predicted = conf.sum(axis=0)
    support = conf.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(predicted > 0, tp / np.maximum(predicted, 1), np.nan)
        recall = np.where(support > 0, tp / np.maximum(support, 1), np.nan)
    return conf, precision, recall, support


def _nanmean(values):
    vals = [v for v in values if not math.isnan(v)]
    return sum(vals) / len(vals) if vals else float("nan")


@dataclass
class MetricsReport:
    method: str
    params: dict
    labels: list
    per_class: list
    macro_precision: float
    macro_recall: float
    prototype_fraction: float
    s_ratio_build: float
    s_ratio_classify: float
    build_calls: int
    classify_calls: int
    n_train: int
    n_test: int
    confusion: np.ndarray
    per_cluster: list
    prototypes: list = field(default_factory=list, repr=False)


def _params_echo(method, params):
    if params is None:
        return {}
    if isinstance(params, (CrsParams, DeltaMedoidsParams)):
        return dict(vars(params))
    return {"fraction": params}


def run_eval(ds, sim, method="crs", params=None, test_fraction=0.2, seed=42, workers=1, split=None):
    """Stratified split, per-cluster prototypes, NPC of the test part, metrics.

    ``split`` may pass a precomputed ``(train, test)`` pair to share one split
    across several runs.
    """
    if len(ds.label_set()) < 2:
        raise DomainError("evaluation needs at least two clusters")
    train, test = split if split is not None else split_train_test(ds, test_fraction, seed)
    params = _default_params(method) if params is None else params
    protos, build_calls = build_prototypes(train, sim, method, params, seed, workers)
    ps = PrototypeSet.from_prototypes(protos)

    cs = CountingSimilarity(sim)
    pred, _, _ = classify_details(test.features(), ps, cs)
    labels = ds.label_set()
    conf, precision, recall, support = precision_recall(test.labels.tolist(), pred.tolist(), labels)

    sizes = {cl.label: len(cl) for cl in train.clusters()}
    full_pairs = sum(n * (n - 1) / 2 for n in sizes.values())
    per_cluster = []
    for p in protos:
        per_cluster.append(
            {
                "label": p.cluster_label,
                "train_size": sizes[p.cluster_label],
                "n_reps": len(p.representatives),
                "fraction": len(p.representatives) / sizes[p.cluster_label],
                "covered_fraction": float(p.covered_fraction),
                "tau": p.params.get("tau", p.params.get("delta")),
                "calls": int(p.calls),
            }
        )
    return MetricsReport(
        method=method,
        params={**_params_echo(method, params), "test_fraction": test_fraction, "seed": seed},
        labels=labels,
        per_class=[
            (lab, float(pr), float(rc), int(sp)) for lab, pr, rc, sp in zip(labels, precision, recall, support)
        ],
        macro_precision=_nanmean(precision.tolist()),
        macro_recall=_nanmean(recall.tolist()),
        prototype_fraction=len(ps) / len(train),
        s_ratio_build=build_calls / full_pairs if full_pairs else 0.0,
        s_ratio_classify=cs.query_count / (len(test) * len(train)),
        build_calls=int(build_calls),
        classify_calls=int(cs.query_count),
        n_train=len(train),
        n_test=len(test),
        confusion=conf,
        per_cluster=per_cluster,
        prototypes=protos,
    )


def sweep_k(ds, sim, ks, params=None, test_fraction=0.2, seed=42, workers=1):
    """One CRS report per ``k`` (ascending), all on the same split."""
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ConfigError("ks must be a nonempty list of positive integers")
    params = params or CrsParams()
    split = split_train_test(ds, test_fraction, seed)
    out = []
    for k in ks:
        p = CrsParams(**{**vars(params), "k": k})
        out.append((k, run_eval(ds, sim, "crs", p, test_fraction, seed, workers, split=split)))
    return out


def cluster_meta(ds, sim, fraction=None, seed=42):
    """Size and homogeneity of each cluster (sampled when ``fraction`` is given)."""
    meta = {}
    for i, cl in enumerate(ds.clusters()):
        cs = CountingSimilarity(sim)
        if len(cl) < 2:
            h = float("nan")
        elif fraction is None:
            h = homogeneity(cl, cs)
        else:
            h = approx_homogeneity(cl, cs, fraction, cluster_seed(seed, i))
        meta[cl.label] = {"size": len(cl), "homogeneity": h}
    return meta


def _num(value):
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return ""
    return repr(float(value)) if isinstance(value, float) else str(value)


def per_cluster_table(reports, cluster_meta=None):
    """CSV with one row per (report, cluster): size, homogeneity, fraction, P/R."""
    meta = cluster_meta or {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cluster", "size", "homogeneity", "method", "k", "n_reps", "prototype_fraction", "precision", "recall"])
    for rep in reports:
        pr = {lab: (p, r) for lab, p, r, _ in rep.per_class}
        k = rep.params.get("k", "")
        for row in rep.per_cluster:
            lab = row["label"]
            m = meta.get(lab, {})
            p, r = pr.get(lab, (float("nan"), float("nan")))
            w.writerow(
                [lab, _num(m.get("size")), _num(m.get("homogeneity")), rep.method, k,
                 row["n_reps"], _num(row["fraction"]), _num(p), _num(r)]
            )
    return buf.getvalue()


def per_class_csv(report):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["label", "precision", "recall", "support"])
    for lab, p, r, s in report.per_class:
        w.writerow([lab, _num(p), _num(r), s])
    return buf.getvalue()


def confusion_csv(report):
    """Header row holds predicted labels; each row starts with its true label."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["true\\predicted", *report.labels])
    for lab, row in zip(report.labels, report.confusion):
        w.writerow([lab, *row.tolist()])
    return buf.getvalue()


def _jsonable(value):
    if isinstance(value, float):
        return None if math.isnan(value) else value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, np.generic):
        return _jsonable(value.item())
    return value


def report_to_dict(report):
    """JSON-ready dict; undefined metrics become ``null``."""
    return _jsonable(
        {
            "method": report.method,
            "params": report.params,
            "labels": report.labels,
            "per_class": [
                {"label": lab, "precision": p, "recall": r, "support": s} for lab, p, r, s in report.per_class
            ],
            "macro_precision": report.macro_precision,
            "macro_recall": report.macro_recall,
            "prototype_fraction": report.prototype_fraction,
            "s_ratio_build": report.s_ratio_build,
            "s_ratio_classify": report.s_ratio_classify,
            "build_calls": report.build_calls,
            "classify_calls": report.classify_calls,
            "n_train": report.n_train,
            "n_test": report.n_test,
            "confusion": report.confusion,
            "per_cluster": report.per_cluster,
        }
    )


def dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
