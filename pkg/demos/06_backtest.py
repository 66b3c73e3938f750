"""Signal strategy against buy-and-hold and a random trader."""

from pathlib import Path

import numpy as np

import dlab
from dlab.backtest import StrategyConfig, run_buy_and_hold, run_random_trader, run_signal_strategy
from dlab.drawdown import detect_episodes
from dlab.ingest import load_ticker_csv
from dlab.numerics import SeededRng

# The hand-checkable case: sell at 100, buy back at 81.
rep = run_signal_strategy([100, 90, 81, 100], [1.0, 1.0, 0.0, 0.0])
print("foresight toy:", round(rep.total_return, 4), rep.trades)

s = load_ticker_csv(Path(dlab.__file__).parent / "fixtures" / "ADP.csv")
p = s.column("adjusted_close")

# Perfect foresight: probability 1 from each correction's onset to its trough.
prob = np.zeros(len(p))
for e in detect_episodes(p, 0.10):
    prob[e.onset_index:e.trough_index] = 1.0

for label, r in [
    ("foresight", run_signal_strategy(p, prob)),
    ("foresight, 10 bps", run_signal_strategy(p, prob, StrategyConfig(cost_bps=10))),
    ("buy and hold", run_buy_and_hold(p)),
    ("random 1%/day", run_random_trader(p, 0.01, SeededRng(7))),
]:
    print(f"{label:<18} return {r.total_return:+.3f}  max drawdown {r.max_drawdown:.3f}  trades {r.n_trades}")
