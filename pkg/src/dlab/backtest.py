"""Long/flat backtests of the downturn signal and its baselines.

Every strategy starts fully invested at the first close and trades only at
closes. While invested, equity tracks ``entry_equity * price / entry_price``;
in cash it is flat. Each trade multiplies equity by ``1 - cost_bps / 1e4``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .drawdown import max_drawdown
from .numerics import SeededRng


@dataclass(frozen=True)
class StrategyConfig:
    exit_threshold: float = 0.5
    reentry_threshold: float = 0.3
    cost_bps: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.reentry_threshold <= self.exit_threshold < 1.0:
            raise ValueError(
                "thresholds must satisfy 0 < reentry_threshold <= exit_threshold < 1, "
                f"got reentry={self.reentry_threshold}, exit={self.exit_threshold}"
            )
        if self.cost_bps < 0:
            raise ValueError("cost_bps must be non-negative")


@dataclass(frozen=True)
class BacktestReport:
    total_return: float
    max_drawdown: float
    n_trades: int
    dates: tuple
    equity: np.ndarray = field(repr=False)
    trades: tuple[tuple[object, str], ...] = ()

    def as_dict(self) -> dict:
        return {
            "total_return": self.total_return,
            "max_drawdown": self.max_drawdown,
            "n_trades": self.n_trades,
            "final_equity": float(self.equity[-1]),
            "trades": [{"date": str(d), "action": a} for d, a in self.trades],
        }

    def equity_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["date", "equity"])
        for d, e in zip(self.dates, self.equity):
            w.writerow([str(d), repr(float(e))])
        return buf.getvalue()


def _prices(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=np.float64)
    if p.ndim != 1 or len(p) < 1:
        raise ValueError("need a non-empty price path")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise ValueError("prices must be positive and finite")
    return p


def _simulate(p: np.ndarray, dates: Sequence, switch: Callable[[int, bool], bool],
              cost_bps: float) -> BacktestReport:
    keep = 1.0 - cost_bps / 1e4
    n = len(p)
    equity = np.empty(n)
    invested = True
    entry_equity, entry_price, cash = 1.0, p[0], 0.0
    trades = []
    for t in range(n):
        eq = entry_equity * p[t] / entry_price if invested else cash
        if switch(t, invested):
            eq *= keep
            if invested:
                cash = eq
                trades.append((dates[t], "sell"))
            else:
                entry_equity, entry_price = eq, p[t]
                trades.append((dates[t], "buy"))
            invested = not invested
        equity[t] = eq
    return BacktestReport(
        total_return=float(equity[-1] - 1.0),
        max_drawdown=max_drawdown(equity),
        n_trades=len(trades),
        dates=tuple(dates),
        equity=equity,
        trades=tuple(trades),
    )


def _dates(dates, n: int) -> Sequence:
    if dates is None:
        return list(range(n))
    if len(dates) != n:
        raise ValueError("dates and prices differ in length")
    return list(dates)


def run_signal_strategy(prices, probabilities, config: StrategyConfig = StrategyConfig(),
                        dates=None) -> BacktestReport:
    """Exit when P(downturn) >= exit_threshold; re-enter when it is <= reentry_threshold."""
    p = _prices(prices)
    prob = np.asarray(probabilities, dtype=np.float64)
    if prob.shape != p.shape:
        raise ValueError("prices and probabilities differ in length")
    if np.any(~np.isfinite(prob)) or np.any((prob < 0) | (prob > 1)):
        raise ValueError("probabilities must lie in [0, 1]")

    def switch(t, invested):
        return prob[t] >= config.exit_threshold if invested else prob[t] <= config.reentry_threshold

    return _simulate(p, _dates(dates, len(p)), switch, config.cost_bps)


def run_buy_and_hold(prices, dates=None) -> BacktestReport:
    p = _prices(prices)
    return _simulate(p, _dates(dates, len(p)), lambda t, invested: False, 0.0)


def run_random_trader(prices, trade_probability: float, rng: SeededRng, cost_bps: float = 0.0,
                      dates=None) -> BacktestReport:
    """Flip between invested and cash each day with ``trade_probability``.

    One uniform is drawn per day, day 0 included, and a flip happens when it
    is below ``trade_probability``.
    """
    if not 0.0 <= trade_probability <= 1.0:
        raise ValueError("trade_probability must lie in [0, 1]")
    p = _prices(prices)
    draws = [rng.uniform() for _ in range(len(p))]
    return _simulate(p, _dates(dates, len(p)), lambda t, invested: draws[t] < trade_probability,
                     cost_bps)


def comparison(signal: BacktestReport, buy_and_hold: BacktestReport,
               random: BacktestReport | None = None) -> str:
    out = {"signal": signal.as_dict(), "buy_and_hold": buy_and_hold.as_dict()}
    if random is not None:
        out["random"] = random.as_dict()
    return json.dumps(out, indent=2, sort_keys=True) + "\n"
