"""Run configuration: a JSON file overlaid by command-line flags."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

# Information-technology names with long listing histories.
DEFAULT_TICKERS = (
    "GLW", "IBM", "MSI", "TXN", "APH", "HPQ", "ADP", "NXPI", "IT", "STX",
    "V", "TER", "AVGO", "BR", "ADI", "MA", "TYL", "MU", "TRMB", "ORCL",
    "AMAT", "FIS", "ANSS", "WDC", "PAYX", "MSFT", "KLAC", "JKHY", "AAPL",
)

# Every logistic-table variable except the two exact linear combinations
# (macd_hist = macd - macd_signal, bb_middle = (bb_upper + bb_lower) / 2).
DEFAULT_CLASSIFY_FEATURES = (
    "consumer_sentiment", "cpi", "durable_goods", "fed_funds", "gdp", "inflation",
    "retail_sales", "yield_10y", "yield_5y",
    "obv", "macd", "macd_signal", "bb_lower", "bb_upper",
    "open", "high", "close", "volume", "return",
)
DEFAULT_REGRESSORS = ("rsi", "macd", "market_value", "cpi", "inflation", "unemployment", "gdp", "yield_10y")
DEFAULT_CLUSTER_FACTORS = ("adjusted_close", "rsi", "macd", "obv")


@dataclass
class RunConfig:
    data_dir: Path = Path("data")
    output_dir: Path = Path("out")
    provider_url: str = "https://www.alphavantage.co"
    cache_dir: Path | None = None
    requests_per_minute: float = 5.0
    tickers: list[str] = field(default_factory=lambda: list(DEFAULT_TICKERS))
    macros: list[str] | None = None
    trailing_years: int | None = 40
    indicator_params: dict = field(default_factory=dict)
    target_depth: float = 0.10
    lookahead: int = 0
    min_duration: int = 0
    features: list[str] = field(default_factory=lambda: list(DEFAULT_CLASSIFY_FEATURES))
    interactions: list[list[str]] = field(default_factory=list)
    train_ticker: str | None = None
    test_ticker: str | None = None
    resample: str = "up"
    alpha: float = 0.05
    threshold: float = 0.5
    regress_target: str = "adjusted_close"
    regressors: list[str] = field(default_factory=lambda: list(DEFAULT_REGRESSORS))
    regress_tickers: list[str] | None = None
    regress_markets: list[str] = field(default_factory=lambda: ["market_value"])
    cluster_factors: list[str] = field(default_factory=lambda: list(DEFAULT_CLUSTER_FACTORS))
    cluster_matrix: Path | None = None
    k_range: str = "2:10"
    restarts: int = 10
    k: int | None = None
    scale: bool | None = None
    correlate_ticker: str | None = None
    exit_threshold: float = 0.5
    reentry_threshold: float = 0.3
    cost_bps: float = 0.0
    trade_probability: float = 0.01
    seed: int | None = None

    PATH_FIELDS = ("data_dir", "output_dir", "cache_dir", "cluster_matrix")

    @classmethod
    def load(cls, path: str | Path | None, overrides: dict) -> "RunConfig":
        """Read ``path`` (relative paths resolve against its directory), then apply overrides."""
        values: dict = {}
        base = Path.cwd()
        if path is not None:
            path = Path(path)
            values = json.loads(path.read_text())
            base = path.resolve().parent
            unknown = set(values) - {f.name for f in dataclasses.fields(cls)}
            if unknown:
                raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
            for key in cls.PATH_FIELDS:
                if values.get(key) is not None:
                    values[key] = (base / values[key]).resolve()
        for key, val in overrides.items():
            if val is None:
                continue
            if key in cls.PATH_FIELDS:
                val = Path(val).resolve()
            values[key] = val
        cfg = cls(**values)
        for key in cls.PATH_FIELDS:
            v = getattr(cfg, key)
            if v is not None:
                setattr(cfg, key, Path(v).resolve())
        return cfg

    def k_values(self) -> list[int]:
        lo, _, hi = self.k_range.partition(":")
        lo, hi = int(lo), int(hi or lo)
        if lo < 1 or hi < lo:
            raise ValueError(f"bad k range {self.k_range!r}")
        return list(range(lo, hi + 1))

    def params(self, *names: str) -> dict:
        """JSON-safe subset of fields for the manifest."""
        out = {}
        for name in names:
            v = getattr(self, name)
            out[name] = str(v) if isinstance(v, Path) else v
        return out
