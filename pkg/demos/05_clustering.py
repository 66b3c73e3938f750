"""k-means sweep with elbow selection on the bundled three-blob matrix."""

import csv
from pathlib import Path

import numpy as np

import dlab
from dlab.models import kmeans_sweep

data = Path(dlab.__file__).parent / "fixtures"
with open(data / "blobs.csv") as fh:
    rows = list(csv.reader(fh))[1:]
names = [r[0] for r in rows]
X = np.array([[float(v) for v in r[1:]] for r in rows])
print("matrix:", X.shape)

rep = kmeans_sweep(X, range(2, 11), restarts=10, seed=7)
print(" k        wcss   2nd diff")
for k, w in zip(rep.k_values, rep.wcss):
    d2 = rep.second_differences.get(k)
    print(f"{k:>2} {w:>11.3f}   {'' if d2 is None else f'{d2:9.3f}'}{'  <- elbow' if k == rep.selected_k else ''}")
print("rule:", rep.rule)

best = rep.best[rep.selected_k]
for c in range(best.k):
    print(f"cluster {c}:", " ".join(n for n, a in zip(names, best.assignments) if a == c))

# Pure noise has no bend; the sweep says so instead of inventing one.
noise = np.random.default_rng(0).normal(size=(29, 6))
flat = kmeans_sweep(noise, range(2, 11), restarts=10, seed=7)
print("isotropic noise ->", flat.selected_k, "|", flat.rule)
