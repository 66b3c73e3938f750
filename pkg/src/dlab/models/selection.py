"""Backward feature elimination for logistic models."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .features import INTERCEPT
from .logistic import LogisticFit, fit_logistic


@dataclass(frozen=True)
class RemovalStep:
    term: str
    aic_before: float
    aic_after: float


def _fit_subset(X, y, terms, keep, **kw) -> LogisticFit:
    idx = [terms.index(t) for t in keep]
    return fit_logistic(X[:, idx], y, keep, **kw)


def backward_stepwise_aic(X, y, terms: Sequence[str], protected: Iterable[str] = (INTERCEPT,),
                          **fit_kw) -> tuple[LogisticFit, list[RemovalStep]]:
    """Drop, one at a time, the term whose removal lowers AIC the most.

    Ties go to the earlier term. Stops when no single removal improves AIC.
    """
    X = np.asarray(X, dtype=np.float64)
    terms = list(terms)
    protected = set(protected)
    keep = list(terms)
    current = _fit_subset(X, y, terms, keep, **fit_kw)
    log: list[RemovalStep] = []
    while True:
        best = None
        for t in keep:
            if t in protected or len(keep) == 1:
                continue
            trial = _fit_subset(X, y, terms, [k for k in keep if k != t], **fit_kw)
            if best is None or trial.aic < best[1].aic:
                best = (t, trial)
        if best is None or not best[1].aic < current.aic:
            return current, log
        log.append(RemovalStep(best[0], current.aic, best[1].aic))
        keep.remove(best[0])
        current = best[1]


def pvalue_prune(X, y, terms: Sequence[str], alpha: float = 0.05,
                 protected: Iterable[str] = (INTERCEPT,), start: Sequence[str] | None = None,
                 **fit_kw) -> tuple[LogisticFit, list[str]]:
    """Repeatedly drop the least significant term while its p-value exceeds ``alpha``.

    ``start`` restricts the initial model (e.g. to the terms a stepwise pass
    kept).
    """
    X = np.asarray(X, dtype=np.float64)
    terms = list(terms)
    protected = set(protected)
    keep = list(start) if start is not None else list(terms)
    removed: list[str] = []
    fit = _fit_subset(X, y, terms, keep, **fit_kw)
    while True:
        candidates = [(p, t) for t, p in zip(fit.terms, fit.p_values)
                      if t not in protected and np.isfinite(p) and p > alpha]
        if not candidates or len(keep) == 1:
            return fit, removed
        worst = max(candidates, key=lambda c: c[0])[1]
        keep.remove(worst)
        removed.append(worst)
        fit = _fit_subset(X, y, terms, keep, **fit_kw)
