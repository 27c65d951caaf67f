"""Command-line entry point: ``clusterreps {gen,select,classify,eval,sweep}``.

Exit codes: 0 success, 1 data error, 2 usage/config error or missing file.
Every output file carries the effective configuration (``#`` lines or a
``config`` object) and is written through a temporary file and a rename.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

from .baselines import DeltaMedoidsParams
from .crs import CrsParams, format_prototypes, read_prototypes
from .dataset import (
    atomic_write_text,
    gen_synthetic,
    load_dense_csv,
    load_similarity_matrix,
    load_sparse_records,
    save_dense_csv,
)
from .errors import ClusterRepsError, ConfigError, DataError, DomainError
from .harness import (
    METHODS,
    build_prototypes,
    cluster_meta,
    confusion_csv,
    dumps,
    per_class_csv,
    per_cluster_table,
    report_to_dict,
    run_eval,
    sweep_k,
)
from .npc import PrototypeSet, classify_details
from .similarity import CountingSimilarity, similarity_for

log = logging.getLogger("clusterreps")

SEED_ENV = "CLUSTERREPS_SEED"


class UsageError(ClusterRepsError):
    pass


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 42
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _tau(text):
    if text in ("auto", "exact", "approx"):
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("tau must be auto, exact, approx or a number") from None


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma-separated integers") from None


def _label_column(text):
    return int(text) if text.lstrip("-").isdigit() else text


def _add_data_args(p, required=True):
    p.add_argument("--data", required=required, help="dataset file")
    p.add_argument("--format", choices=("csv", "sparse", "matrix"), default="csv")
    p.add_argument("--label-column", type=_label_column, default="label", help="csv label column (name or index)")
    p.add_argument("--similarity", choices=("cosine", "euclidean"), default="cosine",
                   help="measure for csv/sparse data; matrix files bring their own")


def _add_method_args(p, with_method=True):
    if with_method:
        p.add_argument("--method", choices=METHODS, default="crs")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--epsilon", type=float, default=0.95)
    p.add_argument("--tau", type=_tau, default="auto")
    p.add_argument("--rho", type=float, default=0.7)
    p.add_argument("--delta-nn", type=float, default=0.001)
    p.add_argument("--max-iters", type=int, default=30)
    p.add_argument("--graph", choices=("nn-descent", "exact"), default="nn-descent")
    p.add_argument("--score", choices=("count", "weight"), default="count")
    p.add_argument("--delta", type=float, default=None, help="delta-medoids threshold (default: sampled homogeneity)")
    p.add_argument("--fraction", type=float, default=0.05, help="random baseline fraction")


def _add_run_args(p):
    p.add_argument("--seed", type=int, default=None, help=f"default 42 or ${SEED_ENV}")
    p.add_argument("--workers", type=int, default=1, help="parallel cluster builds; output is identical for any N")
    p.add_argument("--out", required=True)


def build_parser():
    ap = argparse.ArgumentParser(prog="clusterreps", description="Cluster prototypes by reverse k-NN greedy cover.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a synthetic 2-D dataset as CSV")
    g.add_argument("--kind", choices=("gaussian-blobs", "two-spirals"), required=True)
    g.add_argument("--params", default="{}", help="generator parameters as JSON")
    g.add_argument("--seed", type=int, default=None)
    g.add_argument("--out", required=True)

    s = sub.add_parser("select", help="build prototypes for every cluster")
    _add_data_args(s)
    _add_method_args(s)
    _add_run_args(s)

    c = sub.add_parser("classify", help="nearest-prototype labels for queries")
    _add_data_args(c)
    c.add_argument("--prototypes", required=True)
    c.add_argument("--queries", help="query file in the data format (default: the dataset's own items)")
    c.add_argument("--out", required=True)

    e = sub.add_parser("eval", help="split, build, classify, report")
    _add_data_args(e)
    _add_method_args(e)
    _add_run_args(e)
    e.add_argument("--test-fraction", type=float, default=0.2)
    e.add_argument("--timing", action="store_true", help="add wall-clock seconds to the report")

    w = sub.add_parser("sweep", help="CRS over several k on one split")
    _add_data_args(w)
    _add_method_args(w, with_method=False)
    _add_run_args(w)
    w.add_argument("--ks", type=_int_list, default=[5, 10, 15])
    w.add_argument("--test-fraction", type=float, default=0.2)
    w.add_argument("--timing", action="store_true")
    return ap


# ----------------------------------------------------------------------------


def _load(args, path=None):
    path = path or args.data
    if not os.path.exists(path):
        raise FileNotFoundError(path)
    if args.format == "matrix":
        return load_similarity_matrix(path)
    ds = load_dense_csv(path, args.label_column) if args.format == "csv" else load_sparse_records(path)
    return ds, similarity_for(ds, args.similarity)


def _method_params(args, method):
    if method == "crs":
        return CrsParams(
            k=args.k, epsilon=args.epsilon, tau=args.tau, graph=args.graph, rho=args.rho,
            delta_nn=args.delta_nn, max_iters=args.max_iters, seed=args.seed, score=args.score,
        )
    if method == "delta-medoids":
        return DeltaMedoidsParams(args.delta)
    if method == "random":
        if not 0.0 < args.fraction <= 1.0:
            raise ConfigError("fraction must lie in (0, 1]")
        return args.fraction
    return None


def _config(args):
    cfg = {k: v for k, v in vars(args).items() if k not in ("verbose", "timing")}
    return json.loads(json.dumps(cfg))


def _header(args):
    return [f"{k}={v}" for k, v in sorted(_config(args).items())]


def cmd_gen(args):
    try:
        params = json.loads(args.params)
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from None
    if not isinstance(params, dict):
        raise UsageError("--params must be a JSON object")
    ds = gen_synthetic(args.kind, params, args.seed)
    save_dense_csv(ds, args.out, ["x", "y"], header=_header(args))
    log.info("wrote %d items to %s", len(ds), args.out)


def cmd_select(args):
    params = _method_params(args, args.method)
    ds, sim = _load(args)
    protos, calls = build_prototypes(ds, sim, args.method, params, args.seed, args.workers)
    header = _header(args) + [f"build_calls={calls}"]
    atomic_write_text(args.out, format_prototypes(protos, header))
    n_reps = sum(len(p) for p in protos)
    log.info("%d clusters, %d representatives (%.4f of %d items)", len(protos), n_reps, n_reps / len(ds), len(ds))


def cmd_classify(args):
    ds, sim = _load(args)
    protos = read_prototypes(args.prototypes)
    n = ds.n_items
    for p in protos:
        if min(p.representatives) < 0 or max(p.representatives) >= n:
            raise DomainError(f"prototype {p.cluster_label!r} names ids outside the dataset")
    ps = PrototypeSet.from_prototypes(protos)
    if args.queries:
        if args.format == "matrix":
            raise UsageError("--queries is not available for matrix data; items are classified by id")
        qds, _ = _load(args, args.queries)
        if qds.dim != ds.dim:
            raise DomainError(f"queries have dimension {qds.dim}, data has {ds.dim}")
        queries, qids = qds.features(), qds.ids
    else:
        queries, qids = ds.features(), ds.ids
    cs = CountingSimilarity(sim)
    labels, best, sims = classify_details(queries, ps, cs)
    lines = [f"# {h}" for h in _header(args)]
    lines += [f"{q}\t{lab}\t{r}\t{s!r}" for q, lab, r, s in zip(qids.tolist(), labels, best.tolist(), sims.tolist())]
    atomic_write_text(args.out, "\n".join(lines) + "\n")
    log.info("classified %d queries against %d representatives", len(qids), len(ps))


def _sidecar(path, suffix):
    root = path[:-5] if path.endswith(".json") else path
    return f"{root}.{suffix}"


def cmd_eval(args):
    params = _method_params(args, args.method)
    ds, sim = _load(args)
    t0 = time.perf_counter()
    rep = run_eval(ds, sim, args.method, params, args.test_fraction, args.seed, args.workers)
    doc = {"config": _config(args), "report": report_to_dict(rep)}
    if args.timing:
        doc["wall_clock_seconds"] = time.perf_counter() - t0
    atomic_write_text(_sidecar(args.out, "per_class.csv"), per_class_csv(rep))
    atomic_write_text(_sidecar(args.out, "confusion.csv"), confusion_csv(rep))
    atomic_write_text(args.out, dumps(doc))
    log.info("%s: macro P %.4f R %.4f, fraction %.4f, S_build %.4f",
             args.method, rep.macro_precision, rep.macro_recall, rep.prototype_fraction, rep.s_ratio_build)


def cmd_sweep(args):
    params = _method_params(args, "crs")
    ds, sim = _load(args)
    t0 = time.perf_counter()
    results = sweep_k(ds, sim, args.ks, params, args.test_fraction, args.seed, args.workers)
    doc = {"config": _config(args), "reports": [{"k": k, **report_to_dict(r)} for k, r in results]}
    if args.timing:
        doc["wall_clock_seconds"] = time.perf_counter() - t0
    # exact homogeneity is quadratic; large inputs get the 5 % sample
    meta = cluster_meta(ds, sim, None if len(ds) <= 5000 else 0.05, args.seed)
    atomic_write_text(_sidecar(args.out, "per_cluster.csv"), per_cluster_table([r for _, r in results], meta))
    atomic_write_text(args.out, dumps(doc))
    for k, r in results:
        log.info("k=%d: fraction %.4f, macro P %.4f, build calls %d", k, r.prototype_fraction,
                 r.macro_precision, r.build_calls)


COMMANDS = {"gen": cmd_gen, "select": cmd_select, "classify": cmd_classify, "eval": cmd_eval, "sweep": cmd_sweep}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be >= 1")
        COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"clusterreps: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"clusterreps: error: file not found: {exc.filename or exc}", file=sys.stderr)
        return 2
    except (DataError, ClusterRepsError) as exc:
        print(f"clusterreps: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
