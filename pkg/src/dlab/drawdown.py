"""Drawdown episodes, depth classes and the binary downturn target.

A drawdown runs from a standing peak of the running maximum until price
first regains that peak (the recovery). Depth is measured peak to trough.
An episode covers the half-open index range [peak, recovery), so the
recovery day can itself be the peak of the next episode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

PULLBACK, CORRECTION, CRASH = 0.05, 0.10, 0.20
THRESHOLDS = {"pullback": PULLBACK, "correction": CORRECTION, "crash": CRASH}


def depth_class(depth: float) -> str:
    if depth >= CRASH:
        return "crash"
    if depth >= CORRECTION:
        return "correction"
    if depth >= PULLBACK:
        return "pullback"
    return "minor"


@dataclass(frozen=True)
class DrawdownEpisode:
    peak_index: int
    peak_price: float
    trough_index: int
    trough_price: float
    recovery_index: int | None
    depth: float
    duration_days: int
    onset_index: int
    dates: tuple | None = None

    @property
    def classification(self) -> str:
        return depth_class(self.depth)

    @property
    def recovered(self) -> bool:
        return self.recovery_index is not None

    def _date(self, i: int | None):
        if i is None or self.dates is None:
            return None
        return self.dates[i]

    @property
    def peak_date(self):
        return self._date(self.peak_index)

    @property
    def trough_date(self):
        return self._date(self.trough_index)

    @property
    def recovery_date(self):
        return self._date(self.recovery_index)


def _prices(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=np.float64)
    if p.ndim != 1 or len(p) < 2:
        raise ValueError("need a one-dimensional price path of length >= 2")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        bad = int(np.flatnonzero(~(np.isfinite(p) & (p > 0)))[0])
        raise ValueError(f"non-positive or non-finite price at index {bad}")
    return p


def _segments(p: np.ndarray):
    """Yield ``(peak, first_below, recovery_or_None)`` per excursion below the running max."""
    n = len(p)
    peak = 0
    t = 1
    while t < n:
        if p[t] >= p[peak]:
            peak = t
            t += 1
            continue
        start = t
        while t < n and p[t] < p[peak]:
            t += 1
        yield peak, start, (t if t < n else None)
        if t < n:
            peak = t
            t += 1


def detect_episodes(prices, min_depth: float = PULLBACK, dates: Sequence | None = None) -> list[DrawdownEpisode]:
    """Drawdown episodes at least ``min_depth`` deep, in time order.

    An episode opens on the first close at or below ``peak * (1 - min_depth)``
    (``onset_index``). Unrecovered trailing episodes have ``recovery_index``
    ``None`` and run to the last observation.
    """
    p = _prices(prices)
    if not 0.0 < min_depth < 1.0:
        raise ValueError("min_depth must lie in (0, 1)")
    if dates is not None and len(dates) != len(p):
        raise ValueError("dates and prices differ in length")
    dates = tuple(dates) if dates is not None else None
    level = 1.0 - min_depth
    episodes = []
    for peak, start, recovery in _segments(p):
        stop = recovery if recovery is not None else len(p)
        window = p[start:stop]
        below = np.flatnonzero(window <= p[peak] * level)
        if below.size == 0:
            continue
        trough = start + int(np.argmin(window))
        end = recovery if recovery is not None else len(p) - 1
        episodes.append(
            DrawdownEpisode(
                peak_index=peak,
                peak_price=float(p[peak]),
                trough_index=trough,
                trough_price=float(p[trough]),
                recovery_index=recovery,
                depth=float(1.0 - p[trough] / p[peak]),
                duration_days=end - peak,
                onset_index=start + int(below[0]),
                dates=dates,
            )
        )
    return episodes


def label_target(prices, target_depth: float = CORRECTION, lookahead: int = 0,
                 min_duration: int = 0) -> np.ndarray:
    """0/1 target marking the day each qualifying drawdown crosses ``target_depth``.

    With ``lookahead`` H the H trading days before the crossing are also 1.
    """
    if not 0.0 < target_depth < 1.0:
        raise ValueError("target_depth must lie in (0, 1)")
    if lookahead < 0 or min_duration < 0:
        raise ValueError("lookahead and min_duration must be non-negative")
    p = _prices(prices)
    labels = np.zeros(len(p), dtype=np.int64)
    for ep in detect_episodes(p, target_depth):
        if ep.duration_days < min_duration:
            continue
        labels[max(0, ep.onset_index - lookahead): ep.onset_index + 1] = 1
    return labels


def max_drawdown(values) -> float:
    """Largest peak-to-trough decline of a positive path, as a fraction."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        raise ValueError("empty path")
    peak = np.maximum.accumulate(v)
    return float(np.max(1.0 - v / peak))


def episode_counts(prices) -> dict[str, int]:
    """Episode counts at the pullback, correction and crash depths."""
    return {name: len(detect_episodes(prices, depth)) for name, depth in THRESHOLDS.items()}
