"""k-means (k-means++ seeding, Lloyd iterations) and elbow selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ModelError
from ..numerics import SeededRng, derive_seed

ELBOW_MIN_SHARE = 0.3


@dataclass(frozen=True)
class KMeansResult:
    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    wcss: float
    iterations: int
    restart_index: int = 0
    history: tuple[float, ...] = field(default=(), repr=False)


@dataclass(frozen=True)
class ElbowReport:
    k_values: list[int]
    wcss: list[float]
    selected_k: int
    rule: str
    low_confidence: bool
    second_differences: dict[int, float]
    best: dict[int, KMeansResult] = field(repr=False, default_factory=dict)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)


def kmeans_plus_plus(X: np.ndarray, k: int, rng: SeededRng) -> np.ndarray:
    n = len(X)
    chosen = [rng.below(n)]
    d2 = ((X - X[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = float(d2.sum())
        if total <= 0.0:
            idx = rng.below(n)
        else:
            target = rng.uniform() * total
            idx = int(np.searchsorted(np.cumsum(d2), target, side="right"))
            idx = min(idx, n - 1)
        chosen.append(idx)
        d2 = np.minimum(d2, ((X - X[idx]) ** 2).sum(axis=1))
    return X[chosen].copy()


def _assign(X, C):
    D = _sq_dists(X, C)
    labels = np.argmin(D, axis=1)
    k = len(C)
    counts = np.bincount(labels, minlength=k)
    for j in np.flatnonzero(counts == 0):
        own = D[np.arange(len(X)), labels]
        # only donors that leave their cluster non-empty
        donors = own.copy()
        donors[counts[labels] <= 1] = -1.0
        far = int(np.argmax(donors))
        if donors[far] < 0:
            break
        counts[labels[far]] -= 1
        labels[far] = j
        counts[j] += 1
        C[j] = X[far]
        D = _sq_dists(X, C)
    return labels


def _wcss(X, C, labels) -> float:
    return float(((X - C[labels]) ** 2).sum())


def kmeans(rows, k: int, rng: SeededRng | None = None, max_iter: int = 300, tol: float = 1e-6,
           init: np.ndarray | None = None, restart_index: int = 0) -> KMeansResult:
    """Cluster ``rows`` (already scaled by the caller) into ``k`` groups.

    Stops when assignments repeat or no centroid moves more than ``tol``.
    An emptied cluster takes over the point farthest from its own centroid.
    ``history`` holds the objective after every centroid update and is
    non-increasing.
    """
    X = np.asarray(rows, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("rows must be a 2-d matrix")
    n = len(X)
    if k < 1:
        raise ModelError("k must be >= 1")
    if k > n:
        raise ModelError(f"k={k} exceeds the number of rows ({n})")
    if init is not None:
        C = np.array(init, dtype=np.float64)
        if C.shape != (k, X.shape[1]):
            raise ValueError("init has the wrong shape")
    else:
        if rng is None:
            raise ValueError("rng is required without init")
        C = kmeans_plus_plus(X, k, rng)
    labels = None
    history = []
    it = 0
    for it in range(1, max_iter + 1):
        new_labels = _assign(X, C)
        stable = labels is not None and np.array_equal(new_labels, labels)
        labels = new_labels
        newC = np.array([X[labels == j].mean(axis=0) for j in range(k)])
        shift = float(np.sqrt(((newC - C) ** 2).sum(axis=1)).max())
        C = newC
        history.append(_wcss(X, C, labels))
        if stable or shift < tol:
            break
    return KMeansResult(k, labels, C, history[-1], it, restart_index, tuple(history))


def _split_start(X: np.ndarray, prev: KMeansResult) -> np.ndarray:
    own = ((X - prev.centroids[prev.assignments]) ** 2).sum(axis=1)
    return np.vstack([prev.centroids, X[int(np.argmax(own))]])


def kmeans_sweep(rows, k_range=range(2, 11), restarts: int = 10, seed: int = 0,
                 k: int | None = None, max_iter: int = 300, tol: float = 1e-6) -> ElbowReport:
    """Best-of-``restarts`` k-means per k, then pick the elbow.

    Restart r at a given k uses the stream ``derive_seed(seed, k, r)``, so
    fewer restarts is always a subset of more. If the best run at k is worse
    than at k-1, a run started from the k-1 solution plus its worst-fit point
    is added (restart index ``restarts``), keeping the curve non-increasing.

    The elbow is the k with the largest second difference of the curve.
    When that difference is below 30% of the total drop the curve has no
    clear bend; the report is flagged ``low_confidence`` and falls back to
    the smallest k. An explicit ``k`` overrides the selection.
    """
    X = np.asarray(rows, dtype=np.float64)
    ks = sorted(int(v) for v in k_range)
    if not ks:
        raise ValueError("empty k range")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    best: dict[int, KMeansResult] = {}
    prev = None
    for kk in ks:
        top = None
        for r in range(restarts):
            res = kmeans(X, kk, SeededRng(derive_seed(seed, kk, r)), max_iter, tol, restart_index=r)
            if top is None or res.wcss < top.wcss:
                top = res
        if prev is not None and prev.k == kk - 1 and top.wcss > prev.wcss:
            res = kmeans(X, kk, None, max_iter, tol, init=_split_start(X, prev), restart_index=restarts)
            if res.wcss < top.wcss:
                top = res
        best[kk] = top
        prev = top
    curve = [best[kk].wcss for kk in ks]
    d2 = {ks[i]: curve[i - 1] - 2 * curve[i] + curve[i + 1] for i in range(1, len(ks) - 1)}
    drop = curve[0] - curve[-1]
    if d2:
        elbow = max(d2, key=lambda kk: (d2[kk], -kk))
        low = not (drop > 0 and d2[elbow] >= ELBOW_MIN_SHARE * drop)
    else:
        elbow, low = ks[0], True
    if k is not None:
        return ElbowReport(ks, curve, int(k), "explicit", low, d2, best)
    if low:
        return ElbowReport(ks, curve, ks[0], "low-confidence: k_min", True, d2, best)
    return ElbowReport(ks, curve, elbow, "max second difference", False, d2, best)
