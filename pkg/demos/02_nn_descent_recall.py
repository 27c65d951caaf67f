"""
NN-Descent against brute force
==============================

The graph step is where the cost goes.  NN-Descent refines random
neighbor lists by comparing neighbors of neighbors; we measure how close it
gets to the exact k-NN graph and what fraction of the full similarity matrix
it touches.

Run::

    python demos/02_nn_descent_recall.py
"""

import time

from clusterreps import (
    CountingSimilarity,
    NegEuclidean,
    NnDescentParams,
    exact_knn,
    gen_synthetic,
    graph_recall,
    nn_descent,
    s_ratio,
)

print(" n      k  rho   recall   S      rounds  seconds")
for n in (1000, 4000, 10000):
    ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (3, 3)], "sizes": n // 2, "sigma": 1.0}, seed=1)
    sim = NegEuclidean(ds.payload)
    for k, rho in ((10, 0.7), (10, 1.0), (20, 0.7)):
        cs = CountingSimilarity(sim)
        t = time.perf_counter()
        g = nn_descent(ds.ids, cs, NnDescentParams(k=k, rho=rho, seed=1))
        dt = time.perf_counter() - t
        # brute force is quadratic; only check recall on the smaller sizes
        rec = graph_recall(g, exact_knn(ds.ids, CountingSimilarity(sim), k)) if n <= 4000 else float("nan")
        print(f"{n:5d}  {k:3d}  {rho:3.1f}  {rec:7.4f}  {s_ratio(cs, n):.4f}  {g.info['iterations']:5d}  {dt:7.2f}")

###############################################################################
# Per-round list updates shrink quickly; the run stops once they fall
# below delta_nn * n * k.

ds = gen_synthetic("gaussian-blobs", {"centers": [(0, 0), (3, 3)], "sizes": 1000, "sigma": 1.0}, seed=2)
g = nn_descent(ds.ids, CountingSimilarity(NegEuclidean(ds.payload)), NnDescentParams(k=10, seed=2))
print("\nupdates per round:", g.info["updates"])
