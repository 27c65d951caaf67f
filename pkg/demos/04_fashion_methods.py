"""
Methods side by side on Fashion-MNIST
=====================================

All four selectors go through the same split and the same nearest-prototype
classifier.  The default run uses a stratified 10k subset (1000 images per
class); ``--full`` uses every image from ``data/fashion_mnist.csv.gz``
(export it with ``00_fetch_fashion_mnist.py --full``) and takes a while.

Run::

    python demos/04_fashion_methods.py [--full] [--workers 4]
"""

import argparse
import os
import time

from clusterreps import CrsParams, load_dense_csv, run_eval, split_train_test, stratified_subset
from clusterreps.baselines import DeltaMedoidsParams
from clusterreps.similarity import similarity_for

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "data")

ap = argparse.ArgumentParser()
ap.add_argument("--full", action="store_true")
ap.add_argument("--workers", type=int, default=1)
args = ap.parse_args()

if args.full:
    ds = load_dense_csv(os.path.join(DATA, "fashion_mnist.csv.gz"))
else:
    ds = stratified_subset(load_dense_csv(os.path.join(DATA, "fashion_mnist_20k.csv.gz")), 1000, seed=0)
sim = similarity_for(ds)
split = split_train_test(ds, 0.2, seed=42)
print(f"{len(ds)} images, train {len(split[0])}, test {len(split[1])}")

runs = [
    ("delta-medoids", "delta-medoids", DeltaMedoidsParams()),
    ("random-5%", "random", 0.05),
    ("full-100%", "full", None),
    ("CRS-k5", "crs", CrsParams(k=5)),
    ("CRS-k10", "crs", CrsParams(k=10)),
    ("CRS-k15", "crs", CrsParams(k=15)),
]
print(f"{'method':14s} {'P':>7s} {'R':>7s} {'size':>8s} {'S build':>8s} {'seconds':>8s}")
for name, method, params in runs:
    t = time.perf_counter()
    rep = run_eval(ds, sim, method, params, split=split, workers=args.workers)
    print(f"{name:14s} {rep.macro_precision:7.4f} {rep.macro_recall:7.4f} {rep.prototype_fraction:8.2%} "
          f"{rep.s_ratio_build:8.4f} {time.perf_counter() - t:8.1f}")

###############################################################################
# Per-class view for the k=15 run: where does the small prototype lose?

rep = run_eval(ds, sim, "crs", CrsParams(k=15), split=split, workers=args.workers)
print("\nclass  reps  precision  recall")
for row, (lab, p, r, _) in zip(rep.per_cluster, rep.per_class):
    print(f"{lab:>5s}  {row['n_reps']:4d}  {p:9.4f}  {r:6.4f}   tau {row['tau']:.3f}")
