"""Downturn-prediction toolkit: ingest, indicators, drawdowns, models, backtests."""

from . import backtest, drawdown, indicators, ingest, models, numerics
from .errors import DataError, DlabError, ModelError

__version__ = "0.1.0"

__all__ = [
    "backtest", "drawdown", "indicators", "ingest", "models", "numerics",
    "DataError", "DlabError", "ModelError", "__version__",
]
