"""Class rebalancing by duplication or subsampling."""

from __future__ import annotations

import numpy as np

from ..errors import ModelError
from ..numerics import SeededRng


def resample(X, y, mode: str, rng: SeededRng):
    """Equalise class counts and shuffle; returns ``(X', y')``."""
    X = np.asarray(X)
    y = np.asarray(y).reshape(-1)
    if len(X) != len(y):
        raise ValueError("X and y differ in length")
    idx = resample_indices(y, mode, rng)
    return X[idx], y[idx]


def resample_indices(y, mode: str, rng: SeededRng) -> np.ndarray:
    """Source row for each output row.

    ``up`` keeps every row and adds minority duplicates drawn with
    replacement; ``down`` keeps every minority row and a without-replacement
    subset of the majority.
    """
    y = np.asarray(y).reshape(-1)
    classes, counts = np.unique(y, return_counts=True)
    if len(classes) != 2:
        raise ModelError(f"resampling needs two classes, found {len(classes)}")
    if mode not in ("up", "down"):
        raise ValueError(f"mode must be 'up' or 'down', got {mode!r}")
    minority = classes[np.argmin(counts)] if counts[0] != counts[1] else classes[1]
    min_rows = np.flatnonzero(y == minority)
    maj_rows = np.flatnonzero(y != minority)
    if mode == "up":
        extra = [int(min_rows[rng.below(len(min_rows))]) for _ in range(len(maj_rows) - len(min_rows))]
        rows = list(maj_rows) + list(min_rows) + extra
    else:
        picked = rng.sample_without_replacement(len(maj_rows), len(min_rows))
        rows = [int(maj_rows[i]) for i in sorted(picked)] + list(min_rows)
    rows = [int(r) for r in rows]
    rng.shuffle(rows)
    return np.asarray(rows, dtype=np.int64)
