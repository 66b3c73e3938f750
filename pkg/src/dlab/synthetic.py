"""Deterministic synthetic market data for demos and end-to-end tests.

Prices follow a log-normal random walk with planted drawdowns; macro series
are smooth random walks at their native frequency. Everything is drawn from
:class:`~dlab.numerics.SeededRng`, so a seed fully determines the output.
"""

from __future__ import annotations

import datetime as dt
import json
import math
from pathlib import Path

import numpy as np

from .ingest import (
    Bar,
    MacroSeries,
    TickerSeries,
    format_macro_csv,
    format_ohlcv_csv,
)
from .numerics import SeededRng, derive_seed

FIXTURE_PATH = (100.0, 95.0, 89.0, 94.0, 101.0)

# name: (frequency in days, start level, step scale, decimals)
MACRO_SPECS = {
    "consumer_sentiment": (30, 90.0, 2.0, 1),
    "cpi": (30, 220.0, 0.6, 3),
    "durable_goods": (30, 230000.0, 2500.0, 0),
    "fed_funds": (30, 1.5, 0.08, 2),
    "gdp": (91, 17000.0, 120.0, 1),
    "inflation": (30, 2.2, 0.15, 2),
    "retail_sales": (30, 450000.0, 3000.0, 0),
    "yield_10y": (1, 2.5, 0.02, 3),
    "yield_5y": (1, 1.9, 0.02, 3),
    "yield_30y": (1, 3.1, 0.02, 3),
    "unemployment": (30, 5.5, 0.1, 1),
    "market_value": (1, 1000.0, 0.01, 2),
}


def business_days(start: dt.date, n: int) -> list[dt.date]:
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def synthetic_ticker(ticker: str, dates: list[dt.date], seed: int, drift: float = 0.0012,
                     vol: float = 0.011, n_crashes: int = 6, start_price: float = 50.0) -> TickerSeries:
    """Random-walk closes with ``n_crashes`` planted multi-day slides."""
    rng = SeededRng(seed)
    n = len(dates)
    steps = [drift + vol * rng.normal() for _ in range(n)]
    for _ in range(n_crashes):
        at = 30 + rng.below(max(1, n - 60))
        length = 5 + rng.below(10)
        daily = -(0.10 + 0.15 * rng.uniform()) / length
        for t in range(at, min(n, at + length)):
            steps[t] += daily
    closes = start_price * np.exp(np.cumsum(steps))
    bars = []
    prev = closes[0]
    for d, c in zip(dates, closes):
        o = prev * math.exp(0.003 * rng.normal())
        hi = max(o, c) * (1 + 0.004 * rng.uniform())
        lo = min(o, c) * (1 - 0.004 * rng.uniform())
        vol_shares = round(1e6 * (1 + 0.5 * rng.uniform()) * (1 + 20 * abs(math.log(c / prev))))
        adj = c * 0.97
        bars.append(Bar(d, round(o, 4), round(hi, 4), round(lo, 4), round(c, 4), round(adj, 4), float(vol_shares)))
        prev = c
    return TickerSeries(ticker, tuple(bars))


def synthetic_macro(name: str, start: dt.date, end: dt.date, seed: int) -> MacroSeries:
    every, level, scale, decimals = MACRO_SPECS[name]
    rng = SeededRng(seed)
    dates, values = [], []
    d = start
    x = level
    multiplicative = name == "market_value"
    while d <= end:
        if every > 1 or d.weekday() < 5:
            dates.append(d)
            values.append(round(x, decimals))
        step = scale * rng.normal()
        x = x * math.exp(step + 0.0003) if multiplicative else x + step
        if name in ("fed_funds", "inflation", "unemployment") and x < 0.05:
            x = 0.05 + abs(step)
        d += dt.timedelta(days=every)
    return MacroSeries(name, tuple(dates), tuple(values))


def planted_blob_matrix(seed: int, n_rows: int = 29, dims: int = 6, k: int = 3,
                        separation: float = 10.0) -> tuple[list[str], np.ndarray, list[int]]:
    """Rows in ``k`` isotropic unit-spread blobs with centres ``separation`` apart."""
    rng = SeededRng(seed)
    centres = np.zeros((k, dims))
    for j in range(k):
        centres[j, j % dims] = separation
    labels = [i % k for i in range(n_rows)]
    rng.shuffle(labels)
    X = np.array([[centres[lab, d] + rng.normal() / math.sqrt(dims) for d in range(dims)] for lab in labels])
    names = [f"S{i:02d}" for i in range(n_rows)]
    return names, X, labels


def write_fixture_tree(root: str | Path, seed: int = 2024, tickers=("IBM", "MSFT", "AAPL", "ADI", "ADP"),
                       n_days: int = 1000) -> Path:
    """Write a complete synthetic data directory (tickers, macro, blobs, config)."""
    root = Path(root)
    (root / "macro").mkdir(parents=True, exist_ok=True)
    dates = business_days(dt.date(2015, 1, 5), n_days)
    for i, t in enumerate(tickers):
        s = synthetic_ticker(t, dates, derive_seed(seed, 1, i), start_price=30.0 + 20 * i)
        (root / f"{t}.csv").write_text(format_ohlcv_csv(s))
    fixture = TickerSeries("FIXTURE", tuple(
        Bar(d, p, p, p, p, p, 1000.0) for d, p in zip(business_days(dt.date(2020, 1, 2), 5), FIXTURE_PATH)))
    (root / "FIXTURE.csv").write_text(format_ohlcv_csv(fixture))
    macro_start = dates[0] - dt.timedelta(days=120)
    for j, name in enumerate(sorted(MACRO_SPECS)):
        m = synthetic_macro(name, macro_start, dates[-1], derive_seed(seed, 2, j))
        (root / "macro" / f"{name}.csv").write_text(format_macro_csv(m))
    names, X, labels = planted_blob_matrix(derive_seed(seed, 3))
    lines = ["row," + ",".join(f"f{d}" for d in range(X.shape[1]))]
    lines += [f"{n}," + ",".join(repr(float(v)) for v in row) for n, row in zip(names, X)]
    (root / "blobs.csv").write_text("\n".join(lines) + "\n")
    (root / "blobs_truth.csv").write_text(
        "row,blob\n" + "".join(f"{n},{lab}\n" for n, lab in zip(names, labels)))
    config = {
        "data_dir": ".",
        "tickers": list(tickers),
        "train_ticker": tickers[0],
        "test_ticker": tickers[1],
        "seed": 7,
        "lookahead": 5,
        "trailing_years": 40,
    }
    (root / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    return root
