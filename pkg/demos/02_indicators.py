"""Technical indicators and valuation ratios."""

import dataclasses
import datetime as dt
from pathlib import Path

import numpy as np

import dlab
from dlab.indicators import bollinger, compute_indicator_set, fundamental_ratios, macd, rsi
from dlab.ingest import FundamentalsRecord, load_ticker_csv

data = Path(dlab.__file__).parent / "fixtures"
s = load_ticker_csv(data / "MSFT.csv")
close, volume = s.column("adjusted_close"), s.column("volume")

# Warm-up entries are NaN, never zero.
r = rsi(close)
print("RSI warm-up NaNs:", int(np.isnan(r).sum()), "| last five:", np.round(r[-5:], 2))

line, signal, hist = macd(close)
print("MACD last:", round(line[-1], 4), "signal", round(signal[-1], 4), "hist", round(hist[-1], 4))

upper, mid, lower = bollinger(close)
inside = np.mean((close[19:] <= upper[19:]) & (close[19:] >= lower[19:]))
print(f"share of closes inside the 2-sigma bands: {inside:.3f}")

ind = compute_indicator_set(close, volume)
print("indicator set:", ", ".join(sorted(ind)))

# Ratios; a zero EPS leaves P/E undefined rather than raising.
f = FundamentalsRecord(date=dt.date(2018, 12, 31), eps=5.0, dividends_per_share=2.0, book_value_per_share=25.0,
                       net_income=4.0e9, earnings_growth_rate=0.10)
print(fundamental_ratios(100.0, f))
print("undefined with zero EPS:", fundamental_ratios(100.0, dataclasses.replace(f, eps=0.0)).undefined)
