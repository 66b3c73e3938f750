"""Ordinary least squares with classical inference."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import ModelError
from ..numerics import solve_least_squares, student_t_two_sided_p


def significance_stars(p: float) -> str:
    """``***`` p<0.01, ``**`` p<0.05, ``*`` p<0.1."""
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def has_intercept(X: np.ndarray) -> bool:
    return bool(X.shape[0]) and any(np.all(X[:, j] == 1.0) for j in range(X.shape[1]))


@dataclass(frozen=True)
class RegressionFit:
    terms: list[str]
    coefficients: np.ndarray
    std_errors: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    n_obs: int
    r_squared: float
    adj_r_squared: float
    sigma2: float
    residual_ss: float

    @property
    def stars(self) -> list[str]:
        return [significance_stars(p) for p in self.p_values]

    @property
    def dof(self) -> int:
        return self.n_obs - len(self.terms)

    def coef(self, term: str) -> float:
        return float(self.coefficients[self.terms.index(term)])


def fit_ols(X, y, terms: Sequence[str] | None = None) -> RegressionFit:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, p = X.shape
    terms = list(terms) if terms is not None else [f"x{j}" for j in range(p)]
    if len(terms) != p:
        raise ValueError(f"{len(terms)} term names for {p} columns")
    if n <= p:
        raise ModelError(f"need more observations than terms (n={n}, p={p})")
    ls = solve_least_squares(X, y, terms)
    dof = n - p
    sigma2 = ls.residual_ss / dof
    se = np.sqrt(sigma2 * ls.xtx_inv_diag)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = ls.beta / se
    pvals = np.array([student_t_two_sided_p(float(v), dof) if se_j > 0 else 0.0
                      for v, se_j in zip(t, se)])
    if has_intercept(X):
        tss = float(np.sum((y - y.mean()) ** 2))
    else:
        tss = float(y @ y)
    r2 = 1.0 - ls.residual_ss / tss if tss > 0 else (1.0 if ls.residual_ss == 0 else 0.0)
    adj = 1.0 - (1.0 - r2) * (n - 1) / dof
    return RegressionFit(
        terms=terms,
        coefficients=ls.beta,
        std_errors=se,
        t_stats=t,
        p_values=pvals,
        n_obs=n,
        r_squared=float(r2),
        adj_r_squared=float(adj),
        sigma2=float(sigma2),
        residual_ss=ls.residual_ss,
    )
