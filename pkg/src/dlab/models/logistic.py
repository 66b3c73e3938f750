"""Logistic regression by iteratively reweighted least squares."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit

from ..errors import ModelError
from ..numerics import normal_two_sided_p, solve_least_squares
from .ols import significance_stars

logger = logging.getLogger(__name__)

SEPARATION_BOUND = 30.0
Z_95 = 1.959963984540054
_MIN_WEIGHT = 1e-10


def aic(log_likelihood: float, n_params: int) -> float:
    return 2.0 * n_params - 2.0 * log_likelihood


def log_likelihood(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> float:
    eta = X @ beta
    # log(1 + e^eta) via logaddexp stays finite for large |eta|
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def score(X: np.ndarray, y: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Gradient of the log-likelihood."""
    return X.T @ (y - expit(X @ beta))


@dataclass(frozen=True)
class LogisticFit:
    terms: list[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    z_stats: np.ndarray
    p_values: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    log_likelihood: float
    n_obs: int
    converged: bool
    iterations: int
    warnings: tuple[str, ...] = field(default=())

    @property
    def aic(self) -> float:
        return aic(self.log_likelihood, len(self.terms))

    @property
    def stars(self) -> list[str]:
        return [significance_stars(p) for p in self.p_values]

    @property
    def separation(self) -> bool:
        return any(w.startswith("separation") for w in self.warnings)

    def coef(self, term: str) -> float:
        return float(self.coefficients[self.terms.index(term)])

    def predict_proba(self, X) -> np.ndarray:
        return expit(np.asarray(X, dtype=np.float64) @ self.coefficients)


def fit_logistic(X, y, terms: Sequence[str] | None = None, max_iter: int = 100,
                 tol: float = 1e-8) -> LogisticFit:
    """Maximum-likelihood logistic fit.

    Each Newton step is a weighted least-squares solve on ``sqrt(W) X``, so
    a rank-deficient design fails with :class:`~dlab.errors.RankError`.
    Convergence is ``|delta logL| < tol``. Non-convergence is reported through
    ``converged=False`` rather than raised. Coefficients beyond +/-30, or
    fitted probabilities that reproduce every label, attach a separation
    warning.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, p = X.shape
    terms = list(terms) if terms is not None else [f"x{j}" for j in range(p)]
    if len(terms) != p:
        raise ValueError(f"{len(terms)} term names for {p} columns")
    if y.shape[0] != n:
        raise ValueError("X and y differ in length")
    if not np.all((y == 0) | (y == 1)):
        raise ModelError("response must be 0/1")
    if y.min() == y.max():
        raise ModelError("response has a single class")

    beta = np.zeros(p)
    ll = log_likelihood(X, y, beta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        eta = X @ beta
        mu = expit(eta)
        w = np.maximum(mu * (1.0 - mu), _MIN_WEIGHT)
        sw = np.sqrt(w)
        z = eta + (y - mu) / w
        step = solve_least_squares(X * sw[:, None], z * sw, terms).beta
        new_ll = log_likelihood(X, y, step)
        # step halving guards the rare non-monotone Newton step
        halvings = 0
        while new_ll < ll - 1e-12 and halvings < 30:
            step = (step + beta) / 2.0
            new_ll = log_likelihood(X, y, step)
            halvings += 1
        beta = step
        delta = abs(new_ll - ll)
        ll = new_ll
        if delta < tol:
            converged = True
            break

    mu = expit(X @ beta)
    w = mu * (1.0 - mu)
    warnings = []
    if not converged:
        warnings.append(f"no convergence in {max_iter} iterations")
    if np.any(np.abs(beta) > SEPARATION_BOUND):
        warnings.append("separation suspected: |coefficient| > 30")
    elif np.all(np.abs(y - mu) < 1e-6):
        warnings.append("separation suspected: fitted probabilities reproduce every label")
    sw = np.sqrt(np.maximum(w, np.finfo(float).tiny))
    try:
        cov_diag = solve_least_squares(X * sw[:, None], np.zeros(n), terms).xtx_inv_diag
        se = np.sqrt(cov_diag)
    except ModelError:
        warnings.append("information matrix singular; standard errors undefined")
        se = np.full(p, np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        zstat = beta / se
    pvals = np.array([normal_two_sided_p(float(v)) if math.isfinite(v) else math.nan for v in zstat])
    for msg in warnings:
        logger.warning(msg)
    return LogisticFit(
        terms=terms,
        coefficients=beta,
        std_errors=se,
        z_stats=zstat,
        p_values=pvals,
        ci_low=beta - Z_95 * se,
        ci_high=beta + Z_95 * se,
        log_likelihood=ll,
        n_obs=n,
        converged=converged,
        iterations=it,
        warnings=tuple(warnings),
    )
