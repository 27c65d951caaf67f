"""
Only a similarity matrix
========================

Nothing in the pipeline needs coordinates.  Here the input is a labeled
similarity matrix with 14 clusters whose sizes (scaled down ten times) and
homogeneities follow a network-traffic style dataset, from very loose
(0.14) to perfectly tight (1.0).

Run::

    python demos/06_similarity_matrix.py
"""

import os
import tempfile

from clusterreps import gen_similarity_matrix, load_similarity_matrix, run_eval, save_similarity_matrix
from clusterreps.harness import cluster_meta, per_cluster_table

SIZES = [1079, 2407, 75, 2219, 346, 59, 248, 49, 52, 108, 218, 44, 42, 32]
HOMOGENEITY = [0.58, 0.14, 0.84, 0.64, 0.60, 0.92, 0.34, 0.84, 0.69, 0.35, 0.78, 0.35, 0.79, 1.0]

ds, sim = gen_similarity_matrix([max(10, round(s / 10)) for s in SIZES], HOMOGENEITY, seed=0)

# round-trip through the text format the CLI reads
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "network.txt")
    save_similarity_matrix(ds, sim.matrix, path)
    ds, sim = load_similarity_matrix(path)
print(f"{len(ds)} opaque items, {len(ds.label_set())} clusters")

reports = [run_eval(ds, sim, m) for m in ("crs", "random", "full")]
for rep in reports:
    print(f"{rep.method:7s} macro P {rep.macro_precision:.3f} R {rep.macro_recall:.3f} "
          f"size {rep.prototype_fraction:.2%}")

###############################################################################
# Per-cluster table: loose clusters need proportionally more representatives.

print()
print(per_cluster_table(reports[:1], cluster_meta(ds, sim)))
