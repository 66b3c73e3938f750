"""Drawdown episodes and the downturn target on a bundled synthetic ticker."""

from pathlib import Path

import numpy as np

import dlab
from dlab.drawdown import detect_episodes, episode_counts, label_target, max_drawdown
from dlab.ingest import load_ticker_csv

data = Path(dlab.__file__).parent / "fixtures"

# The five-day toy path: one correction, 100 -> 89 -> back above 100.
path = [100, 95, 89, 94, 101]
(ep,) = detect_episodes(path)
print("toy path:", ep.classification, "depth", round(ep.depth, 4),
      "peak/trough/recovery", ep.peak_index, ep.trough_index, ep.recovery_index)
print("target, no lookahead:", label_target(path, 0.10).tolist())
print("target, 2-day lookahead:", label_target(path, 0.10, lookahead=2).tolist())

# A longer synthetic history.
ibm = load_ticker_csv(data / "IBM.csv")
prices = ibm.column("adjusted_close")
dates = [str(d) for d in ibm.dates]
print("\nIBM (synthetic),", len(prices), "days, max drawdown", round(max_drawdown(prices), 3))
print("episodes per depth class:", episode_counts(prices))

for e in detect_episodes(prices, 0.10, dates):
    print(f"  {e.peak_date} -> {e.trough_date}  depth {e.depth:.3f}  {e.classification:<10}"
          f" recovered {e.recovery_date or 'no'}")

y = label_target(prices, 0.10)
print("onset days at 10%:", int(y.sum()), "of", len(y),
      "| with 5-day lookahead:", int(label_target(prices, 0.10, lookahead=5).sum()))
print("positive share:", np.round(y.mean(), 4))
