"""Technical indicators and fundamental ratios.

All series functions return float arrays aligned with their input. The
warm-up prefix is NaN, never zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import AlignedPanel, ColumnMeta, FundamentalsRecord

RSI_PERIOD = 14
MACD_FAST, MACD_SLOW, MACD_SIGNAL = 12, 26, 9
BB_WINDOW, BB_NBDEV = 20, 2.0
BETA_WINDOW = 252


def _vector(values, name: str = "values") -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    return arr


def ema(values, period: int) -> np.ndarray:
    """Exponential moving average seeded with the simple mean of the first window."""
    x = _vector(values)
    if period < 1:
        raise ValueError("period must be >= 1")
    if len(x) < period:
        raise ValueError(f"series of length {len(x)} is shorter than period {period}")
    out = np.full(len(x), np.nan)
    k = 2.0 / (period + 1)
    prev = float(np.mean(x[:period]))
    out[period - 1] = prev
    for t in range(period, len(x)):
        prev = x[t] * k + prev * (1.0 - k)
        out[t] = prev
    return out


def rsi(closes, period: int = RSI_PERIOD) -> np.ndarray:
    """Wilder RSI. Flat windows read 50; loss-free windows 100; gain-free windows 0."""
    x = _vector(closes, "closes")
    if period < 1:
        raise ValueError("period must be >= 1")
    if len(x) < period + 1:
        raise ValueError(f"RSI({period}) needs at least {period + 1} closes, got {len(x)}")
    diff = np.diff(x)
    gains = np.where(diff > 0, diff, 0.0)
    losses = np.where(diff < 0, -diff, 0.0)
    out = np.full(len(x), np.nan)
    avg_gain = gains[:period].mean()
    avg_loss = losses[:period].mean()
    out[period] = _rsi_value(avg_gain, avg_loss)
    for t in range(period, len(diff)):
        avg_gain = (avg_gain * (period - 1) + gains[t]) / period
        avg_loss = (avg_loss * (period - 1) + losses[t]) / period
        out[t + 1] = _rsi_value(avg_gain, avg_loss)
    return out


def _rsi_value(gain: float, loss: float) -> float:
    if loss == 0.0:
        return 50.0 if gain == 0.0 else 100.0
    if gain == 0.0:
        return 0.0
    return 100.0 - 100.0 / (1.0 + gain / loss)


def macd(closes, fast: int = MACD_FAST, slow: int = MACD_SLOW, signal: int = MACD_SIGNAL):
    """Return ``(macd, signal, hist)``."""
    x = _vector(closes, "closes")
    if fast >= slow:
        raise ValueError(f"fast period ({fast}) must be shorter than slow period ({slow})")
    if len(x) < slow + signal - 1:
        raise ValueError(f"MACD needs at least {slow + signal - 1} closes, got {len(x)}")
    line = ema(x, fast) - ema(x, slow)
    sig = np.full(len(x), np.nan)
    sig[slow - 1:] = ema(line[slow - 1:], signal)
    return line, sig, line - sig


def obv(closes, volumes) -> np.ndarray:
    c = _vector(closes, "closes")
    v = _vector(volumes, "volumes")
    if len(c) != len(v):
        raise ValueError(f"closes ({len(c)}) and volumes ({len(v)}) differ in length")
    if len(c) == 0:
        raise ValueError("need at least one observation")
    out = np.zeros(len(c))
    out[1:] = np.cumsum(v[1:] * np.sign(np.diff(c)))
    return out


def _windows(x: np.ndarray, window: int) -> np.ndarray:
    return np.lib.stride_tricks.sliding_window_view(x, window)


def bollinger(closes, window: int = BB_WINDOW, nbdev: float = BB_NBDEV):
    """Return ``(upper, middle, lower)``; bands use the population deviation."""
    x = _vector(closes, "closes")
    if window < 2:
        raise ValueError("window must be >= 2")
    if len(x) < window:
        raise ValueError(f"series of length {len(x)} is shorter than window {window}")
    w = _windows(x, window)
    mid = np.full(len(x), np.nan)
    dev = np.full(len(x), np.nan)
    mid[window - 1:] = w.mean(axis=1)
    dev[window - 1:] = w.std(axis=1, ddof=0)
    return mid + nbdev * dev, mid, mid - nbdev * dev


def rolling_std(closes, window: int) -> np.ndarray:
    x = _vector(closes, "closes")
    if window < 2:
        raise ValueError("window must be >= 2")
    if len(x) < window:
        raise ValueError(f"series of length {len(x)} is shorter than window {window}")
    out = np.full(len(x), np.nan)
    out[window - 1:] = _windows(x, window).std(axis=1, ddof=1)
    return out


def simple_returns(prices) -> np.ndarray:
    p = _vector(prices, "prices")
    if len(p) < 2:
        raise ValueError("need at least two prices")
    if np.any(p <= 0):
        raise ValueError("prices must be positive")
    return p[1:] / p[:-1] - 1.0


def rolling_beta(asset_returns, market_returns, window: int = BETA_WINDOW) -> np.ndarray:
    """Trailing covariance / market variance; NaN where the market is flat."""
    a = _vector(asset_returns, "asset_returns")
    m = _vector(market_returns, "market_returns")
    if len(a) != len(m):
        raise ValueError("asset and market returns differ in length")
    if window < 2:
        raise ValueError("window must be >= 2")
    if len(a) < window:
        raise ValueError(f"need at least {window} returns, got {len(a)}")
    wa, wm = _windows(a, window), _windows(m, window)
    da = wa - wa.mean(axis=1, keepdims=True)
    dm = wm - wm.mean(axis=1, keepdims=True)
    cov = (da * dm).sum(axis=1)
    var = (dm * dm).sum(axis=1)
    out = np.full(len(a), np.nan)
    with np.errstate(divide="ignore", invalid="ignore"):
        out[window - 1:] = np.where(var > 0, cov / var, np.nan)
    return out


@dataclass(frozen=True)
class RatioSet:
    """Valuation ratios; ``None`` marks a ratio that is undefined for the inputs."""

    pe: float | None
    peg: float | None
    pb: float | None
    dpr: float | None
    dividend_yield: float | None

    @property
    def undefined(self) -> tuple[str, ...]:
        return tuple(k for k in ("pe", "peg", "pb", "dpr", "dividend_yield") if getattr(self, k) is None)


def fundamental_ratios(price: float, fundamentals: FundamentalsRecord) -> RatioSet:
    """P/E, PEG, P/B, payout ratio and dividend yield.

    ``earnings_growth_rate`` is a decimal fraction; PEG divides P/E by the
    growth in percent, so 0.10 growth on a P/E of 20 gives 2.0.
    """
    if not (price > 0 and math.isfinite(price)):
        raise ValueError("price must be positive")
    f = fundamentals
    pe = price / f.eps if f.eps != 0 else None
    peg = pe / (f.earnings_growth_rate * 100.0) if pe is not None and f.earnings_growth_rate != 0 else None
    pb = price / f.book_value_per_share if f.book_value_per_share != 0 else None
    dpr = f.dividends_per_share / f.eps if f.eps != 0 else None
    return RatioSet(pe=pe, peg=peg, pb=pb, dpr=dpr, dividend_yield=f.dividends_per_share / price)


INDICATOR_NAMES = (
    "rsi", "macd", "macd_signal", "macd_hist", "obv",
    "bb_upper", "bb_middle", "bb_lower", "rolling_std", "return", "beta",
)


def compute_indicator_set(closes, volumes, market_returns=None, *, rsi_period: int = RSI_PERIOD,
                          fast: int = MACD_FAST, slow: int = MACD_SLOW, signal: int = MACD_SIGNAL,
                          bb_window: int = BB_WINDOW, bb_nbdev: float = BB_NBDEV,
                          std_window: int = BB_WINDOW, beta_window: int = BETA_WINDOW) -> dict[str, np.ndarray]:
    """Every indicator for one ticker, keyed by :data:`INDICATOR_NAMES`.

    ``return`` and ``beta`` are aligned to the price dates with a NaN first
    entry. ``beta`` is omitted when no market returns are given or the
    history is shorter than the beta window.
    """
    c = _vector(closes, "closes")
    line, sig, hist = macd(c, fast, slow, signal)
    upper, mid, lower = bollinger(c, bb_window, bb_nbdev)
    ret = np.concatenate([[np.nan], simple_returns(c)])
    out = {
        "rsi": rsi(c, rsi_period),
        "macd": line,
        "macd_signal": sig,
        "macd_hist": hist,
        "obv": obv(c, volumes),
        "bb_upper": upper,
        "bb_middle": mid,
        "bb_lower": lower,
        "rolling_std": rolling_std(c, std_window),
        "return": ret,
    }
    if market_returns is not None:
        m = _vector(market_returns, "market_returns")
        if len(m) != len(c):
            raise ValueError("market returns must align with closes")
        if len(c) - 1 >= beta_window:
            beta = np.full(len(c), np.nan)
            beta[1:] = rolling_beta(ret[1:], m[1:], beta_window)
            out["beta"] = beta
    return out


def add_indicators(panel: AlignedPanel, tickers=None, market: str | None = "market_value",
                   **params) -> AlignedPanel:
    """Append ``{ticker}.{indicator}`` columns computed from adjusted closes.

    When ``market`` names a panel column it is used as the benchmark level
    for beta.
    """
    tickers = list(tickers) if tickers is not None else panel.tickers
    market_returns = None
    if market and market in panel:
        level = panel[market]
        if np.all(level > 0):
            market_returns = np.concatenate([[np.nan], simple_returns(level)])
    new, meta = {}, {}
    for t in tickers:
        closes = panel[f"{t}.adjusted_close"]
        ind = compute_indicator_set(closes, panel[f"{t}.volume"], market_returns, **params)
        for name, values in ind.items():
            new[f"{t}.{name}"] = values
            meta[f"{t}.{name}"] = ColumnMeta(t, name, "daily")
    return panel.with_columns(new, meta)
