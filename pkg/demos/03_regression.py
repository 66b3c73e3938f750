"""Pooled OLS of price on indicators and macro series, printed as a regression table."""

from pathlib import Path

import numpy as np

import dlab
from dlab.config import RunConfig
from dlab.models import FeatureSpec, build_feature_matrix, fit_ols, regression_table
from dlab.pipeline import StageOutput, enriched_panel, ticker_view

data = Path(dlab.__file__).parent / "fixtures"
cfg = RunConfig.load(data / "config.json", {})
panel = enriched_panel(cfg, StageOutput())
print("panel:", len(panel), "days,", len(panel.columns), "columns")

spec = FeatureSpec(["rsi", "macd", "market_value", "cpi", "inflation", "unemployment", "gdp", "yield_10y"])
fits = []
for t in ("IBM", "MSFT"):
    fm = build_feature_matrix(ticker_view(panel, t), spec, require=["adjusted_close"])
    print(t, "rows used:", len(fm.rows), "dropped for warm-up:", fm.n_excluded)
    fits.append(fit_ols(fm.X, fm.extra["adjusted_close"], spec.term_names()))

print(regression_table(fits, ["IBM", "MSFT"]))
print("R-squared:", [round(f.r_squared, 3) for f in fits])
print("largest |t| in IBM fit:", fits[0].terms[int(np.argmax(np.abs(fits[0].t_stats)))])
