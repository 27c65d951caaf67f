"""
Effect of k
===========

Larger k lets every representative vouch for more members, so prototypes
shrink, while the graph build gets more expensive.  We sweep k on the
spirals and, if the export is present, on one Fashion-MNIST class.

Run::

    python demos/03_k_sweep.py
"""

import os

from clusterreps import CountingSimilarity, CrsParams, NegEuclidean, gen_synthetic, load_dense_csv, select_representatives
from clusterreps.harness import sweep_k
from clusterreps.similarity import similarity_for

HERE = os.path.dirname(os.path.abspath(__file__))
FASHION = os.path.join(HERE, "..", "data", "fashion_mnist_20k.csv.gz")

ds = gen_synthetic("two-spirals", {"n": 255}, seed=42)
sim = NegEuclidean(ds.payload)
print("two spirals, one shared split, tau sampled from 5% of each cluster")
print(" k   fraction  macro P  build calls")
for k, rep in sweep_k(ds, sim, [3, 5, 10, 15, 20], CrsParams(tau="approx")):
    print(f"{k:2d}   {rep.prototype_fraction:.4f}   {rep.macro_precision:.4f}  {rep.build_calls:7d}")

###############################################################################
# One 2000-image class.  With tau="auto" the exact homogeneity of a
# cluster this size already costs the full matrix, so the graph cost is
# shown separately.

if os.path.exists(FASHION):
    fm = load_dense_csv(FASHION)
    fsim = similarity_for(fm)
    cl = next(c for c in fm.clusters() if c.label == "3")
    pairs = len(cl) * (len(cl) - 1) / 2
    print(f"\nFashion-MNIST class 3 ({len(cl)} images, cosine)")
    print(" k   reps  fraction  graph S")
    for k in (5, 10, 15, 20):
        p = select_representatives(cl, CountingSimilarity(fsim), CrsParams(k=k))
        print(f"{k:2d}  {len(p):4d}   {p.fraction:.4f}   {p.graph_calls / pairs:.4f}")
else:
    print("\n(skipping Fashion-MNIST: run demos/00_fetch_fashion_mnist.py first)")
