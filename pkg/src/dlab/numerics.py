"""Dense numerical kernels shared by the modelling code.

Everything here is deterministic. Randomness goes through :class:`SeededRng`,
a splitmix64 generator, so golden values in the tests stay stable across
numpy releases.

SplitMix64 (Steele, Lea & Flood 2014)::

    state  <- state + 0x9E3779B97F4A7C15          (mod 2**64)
    z      <- state
    z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 (mod 2**64)
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB (mod 2**64)
    output <- z ^ (z >> 31)

``uniform`` maps an output to ``(output >> 11) * 2**-53``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import special
from scipy.linalg import solve_triangular

from .errors import ModelError, RankError

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
RANK_TOL = 1e-10


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class SeededRng:
    """splitmix64 stream. Single owner; derive new streams for parallel work."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        return _mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)``."""
        if n < 1:
            raise ValueError("n must be >= 1")
        return min(int(self.uniform() * n), n - 1)

    def normal(self) -> float:
        # Box-Muller, one variate per call; 1 - u keeps the log argument in (0, 1].
        u1 = 1.0 - self.uniform()
        u2 = self.uniform()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} of {n} without replacement")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]


def rng_stream(seed: int) -> SeededRng:
    return SeededRng(seed)


def derive_seed(seed: int, *keys: int) -> int:
    """Child seed for an independent stream, e.g. ``derive_seed(seed, k, restart)``."""
    h = int(seed) & _MASK64
    for key in keys:
        h = _mix64(((h ^ (int(key) & _MASK64)) + _GOLDEN) & _MASK64)
    return h


def uniform(rng: SeededRng) -> float:
    return rng.uniform()


def choose_with_replacement(rng: SeededRng, n: int, k: int) -> list[int]:
    return [rng.below(n) for _ in range(k)]


@dataclass(frozen=True)
class LeastSquaresResult:
    beta: np.ndarray
    residual_ss: float
    xtx_inv_diag: np.ndarray
    xtx_inv: np.ndarray


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("matrix contains non-finite entries")
    return X


def solve_least_squares(X, y, names: Sequence[str] | None = None) -> LeastSquaresResult:
    """Minimise ``||y - X b||`` through a Householder QR factorisation.

    Raises :class:`RankError` naming the first column whose R diagonal falls
    below ``1e-10 * max|diag(R)|``.
    """
    X = _as_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]}")
    if n < p:
        raise ModelError(f"need n >= p, got n={n}, p={p}")
    q, r = np.linalg.qr(X, mode="reduced")
    diag = np.abs(np.diag(r))
    scale = diag.max() if p else 0.0
    bad = np.flatnonzero(diag <= RANK_TOL * scale) if scale > 0 else np.arange(p)
    if bad.size:
        j = int(bad[0])
        label = names[j] if names is not None else f"column {j}"
        raise RankError(f"design matrix is rank deficient at {label}", column=label)
    beta = _back_substitute(r, q.T @ y)
    resid = y - X @ beta
    r_inv = _back_substitute(r, np.eye(p))
    xtx_inv = r_inv @ r_inv.T
    return LeastSquaresResult(
        beta=beta,
        residual_ss=float(resid @ resid),
        xtx_inv_diag=np.diag(xtx_inv).copy(),
        xtx_inv=xtx_inv,
    )


def _back_substitute(r: np.ndarray, b: np.ndarray) -> np.ndarray:
    return solve_triangular(r, b, lower=False)


def student_t_cdf(t: float, dof: float) -> float:
    """Student's t CDF through the regularised incomplete beta function."""
    if dof < 1:
        raise ValueError("dof must be >= 1")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    x = dof / (dof + t * t)
    tail = 0.5 * float(special.betainc(dof / 2.0, 0.5, x))
    return 1.0 - tail if t > 0 else tail


def student_t_two_sided_p(t: float, dof: float) -> float:
    if math.isinf(t):
        return 0.0
    x = dof / (dof + t * t)
    return float(special.betainc(dof / 2.0, 0.5, x))


def normal_two_sided_p(z: float) -> float:
    return float(special.erfc(abs(z) / math.sqrt(2.0)))


def correlation_matrix(columns: Mapping[str, Sequence[float]]) -> tuple[np.ndarray, list[str]]:
    """Pearson correlations of named, equal-length, non-constant columns."""
    names = list(columns)
    if len(names) < 2:
        raise ValueError("need at least two columns")
    data = [np.asarray(columns[name], dtype=np.float64) for name in names]
    n = len(data[0])
    if n < 2 or any(len(col) != n for col in data):
        raise ValueError("columns must share a length >= 2")
    centered = []
    for name, col in zip(names, data):
        c = col - col.mean()
        norm = math.sqrt(float(c @ c))
        if norm == 0.0:
            raise ModelError(f"column {name!r} is constant")
        centered.append(c / norm)
    Z = np.vstack(centered)
    corr = np.clip(Z @ Z.T, -1.0, 1.0)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return corr, names


def zscore_columns(matrix, names: Sequence[str] | None = None):
    """Centre each column and divide by its sample standard deviation.

    Returns ``(scaled, means, stds)``; ``scaled * stds + means`` inverts it.
    """
    M = _as_matrix(matrix)
    if M.shape[0] < 2:
        raise ValueError("need at least two rows")
    means = M.mean(axis=0)
    stds = M.std(axis=0, ddof=1)
    for j, s in enumerate(stds):
        if s == 0.0 or not np.isfinite(s):
            label = names[j] if names is not None else f"column {j}"
            raise ModelError(f"{label} is constant")
    return (M - means) / stds, means, stds
