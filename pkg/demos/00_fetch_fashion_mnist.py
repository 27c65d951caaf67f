"""
Fetch Fashion-MNIST and export it as CSV
========================================

The npm package ``fashion-mnist`` ships all 70 000 images (7 000 per class,
raw 0-255 pixels) as JSON.  This script downloads it with ``npm pack`` and
writes

* ``data/fashion_mnist_20k.csv.gz``: 2 000 images per class, shuffled; the
  desk-scale acceptance tests read this file;
* ``data/fashion_mnist.csv.gz`` (only with ``--full``): all 70 000 images.

Columns are ``p0 .. p783`` followed by ``label`` (class index 0-9).

Usage::

    python demos/00_fetch_fashion_mnist.py [--full] [--out data]
"""

import argparse
import csv
import gzip
import json
import os
import subprocess
import tarfile
import tempfile

import numpy as np

CLASSES = [
    "T-shirt/top", "Trouser", "Pullover", "Dress", "Coat",
    "Sandal", "Shirt", "Sneaker", "Bag", "Ankle boot",
]


def fetch(workdir):
    subprocess.run(["npm", "pack", "fashion-mnist@1.1.0"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(f for f in os.listdir(workdir) if f.endswith(".tgz"))
    with tarfile.open(os.path.join(workdir, tgz)) as tar:
        tar.extractall(workdir, filter="data")
    images, labels = [], []
    for cls in range(10):
        path = os.path.join(workdir, "package", "src", "clothes", f"{cls}.json")
        with open(path) as fh:
            rows = [r for r in json.load(fh)["data"] if len(r) == 784]
        images.append(np.asarray(rows, dtype=np.uint8))
        labels.append(np.full(len(rows), cls))
    return np.concatenate(images), np.concatenate(labels)


def write_csv(path, X, y):
    tmp = path + ".tmp"
    with gzip.open(tmp, "wt", newline="", compresslevel=6) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"p{j}" for j in range(X.shape[1])] + ["label"])
        for row, lab in zip(X, y):
            w.writerow(row.tolist() + [int(lab)])
    os.replace(tmp, path)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[1])
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data"))
    ap.add_argument("--full", action="store_true", help="also export all 70k images")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    with tempfile.TemporaryDirectory() as tmp:
        X, y = fetch(tmp)
    print(f"fetched {X.shape[0]} images, {len(set(y.tolist()))} classes")

    rng = np.random.default_rng(args.seed)
    keep = np.concatenate([rng.choice(np.flatnonzero(y == c), 2000, replace=False) for c in range(10)])
    keep = rng.permutation(keep)
    write_csv(os.path.join(args.out, "fashion_mnist_20k.csv.gz"), X[keep], y[keep])
    if args.full:
        order = rng.permutation(X.shape[0])
        write_csv(os.path.join(args.out, "fashion_mnist.csv.gz"), X[order], y[order])
    print("written to", os.path.abspath(args.out))


if __name__ == "__main__":
    main()
