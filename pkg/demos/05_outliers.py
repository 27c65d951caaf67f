"""
Outliers and relaxed coverage
=============================

Ten members of a tight cluster A are planted inside cluster B, far from
each other.  With every training item as a prototype, those strays capture
nearby B queries.  CRS needs to cover only 95% of A; the strays have no
strong reverse edges, so they are never picked.

Run::

    python demos/05_outliers.py
"""

from clusterreps import CrsParams, NegEuclidean, gen_synthetic, run_eval, split_train_test

params = {"centers": [(0, 0), (10, 10)], "sizes": 500, "sigma": [0.5, 1.0], "outliers": 10}

print("seed   full P   CRS P   CRS reps   outlier reps")
for seed in range(6):
    ds = gen_synthetic("gaussian-blobs", params, seed)
    sim = NegEuclidean(ds.payload)
    split = split_train_test(ds, 0.2, seed)
    full = run_eval(ds, sim, "full", split=split, seed=seed)
    crs = run_eval(ds, sim, "crs", CrsParams(epsilon=0.95), split=split, seed=seed)
    strays = set(range(1000, 1010))  # generator appends the outliers last
    picked = sum(len(strays & set(p.representatives)) for p in crs.prototypes)
    n_reps = sum(len(p) for p in crs.prototypes)
    print(f"{seed:4d}   {full.macro_precision:.4f}   {crs.macro_precision:.4f}   {n_reps:8d}   {picked:12d}")

###############################################################################
# epsilon = 1.0 forces every member to be covered, strays included.

ds = gen_synthetic("gaussian-blobs", params, 0)
sim = NegEuclidean(ds.payload)
split = split_train_test(ds, 0.2, 0)
for eps in (0.9, 0.95, 0.99, 1.0):
    rep = run_eval(ds, sim, "crs", CrsParams(epsilon=eps), split=split, seed=0)
    print(f"epsilon {eps:4.2f}: macro P {rep.macro_precision:.4f}, {sum(len(p) for p in rep.prototypes)} reps")
