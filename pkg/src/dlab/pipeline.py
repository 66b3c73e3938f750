"""Pipeline stages behind the command-line interface.

Each stage is a pure function of a :class:`~dlab.config.RunConfig` and the
files under its data directory. It returns a :class:`StageOutput` holding
the artifacts as text keyed by relative path, plus the inputs it read, so
the caller can hash and write everything in one place.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import backtest as bt
from .config import RunConfig
from .drawdown import THRESHOLDS, detect_episodes, episode_counts, label_target
from .errors import DataError, ModelError
from .indicators import add_indicators
from .ingest import (
    MACRO_SERIES,
    AlignedPanel,
    ProviderConfig,
    align_and_merge,
    fetch_remote_daily,
    format_ohlcv_csv,
    format_panel_csv,
    load_macro_csv,
    load_ticker_csv,
    restrict_common_range,
)
from .models import (
    INTERCEPT,
    FeatureSpec,
    backward_stepwise_aic,
    build_feature_matrix,
    classification_metrics,
    fit_logistic,
    fit_ols,
    fit_to_dict,
    kmeans_sweep,
    logistic_table,
    pvalue_prune,
    regression_table,
    resample,
    roc_auc,
)
from .numerics import SeededRng, correlation_matrix, derive_seed, zscore_columns

# Stream keys under the run seed, one per random consumer.
RESAMPLE_STREAM, RANDOM_TRADER_STREAM = 1, 2

RANDOM_STAGES = frozenset({"cluster", "classify", "backtest", "report"})


class UsageError(Exception):
    """Invalid command-line or configuration values (exit code 2)."""

    exit_code = 2


@dataclass
class StageOutput:
    files: dict[str, str] = field(default_factory=dict)
    inputs: set[Path] = field(default_factory=set)
    summary: dict = field(default_factory=dict)


def sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def _num(v: float) -> str:
    return "" if not np.isfinite(v) else repr(float(v))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------- loading


def _ticker_path(cfg: RunConfig, ticker: str) -> Path:
    path = cfg.data_dir / f"{ticker}.csv"
    if not path.exists():
        raise DataError(f"no price file for {ticker} at {path}")
    return path


def _macro_paths(cfg: RunConfig) -> list[Path]:
    folder = cfg.data_dir / "macro"
    if cfg.macros is None:
        if not folder.is_dir():
            return []
        return sorted(p for p in folder.glob("*.csv") if p.stem in MACRO_SERIES)
    paths = []
    for name in cfg.macros:
        path = Path(name) if name.endswith(".csv") else folder / f"{name}.csv"
        path = path if path.is_absolute() else (cfg.data_dir / path if not path.exists() else path)
        if not path.exists():
            raise DataError(f"no macro file {path}")
        paths.append(path)
    return paths


def load_panel(cfg: RunConfig, out: StageOutput) -> AlignedPanel:
    """Aligned, range-restricted panel of the configured tickers and macro series."""
    series = []
    for t in cfg.tickers:
        path = _ticker_path(cfg, t)
        out.inputs.add(path)
        series.append(load_ticker_csv(path, t))
    macros = []
    for path in _macro_paths(cfg):
        out.inputs.add(path)
        macros.append(load_macro_csv(path))
    panel = align_and_merge(series, macros)
    return restrict_common_range(panel, cfg.tickers, cfg.trailing_years)


def enriched_panel(cfg: RunConfig, out: StageOutput) -> AlignedPanel:
    """Panel with indicator columns and a ``{ticker}.target`` label column per ticker."""
    panel = load_panel(cfg, out)
    try:
        panel = add_indicators(panel, cfg.tickers, **cfg.indicator_params)
    except ValueError as exc:
        raise DataError(f"indicators: {exc}") from exc
    targets = {
        f"{t}.target": label_target(panel[f"{t}.adjusted_close"], cfg.target_depth,
                                    cfg.lookahead, cfg.min_duration).astype(np.float64)
        for t in cfg.tickers
    }
    return panel.with_columns(targets)


def ticker_view(panel: AlignedPanel, ticker: str) -> dict[str, np.ndarray]:
    """Bare feature name -> column for one ticker; macro columns pass through."""
    view = {name: col for name, col in panel.columns.items() if "." not in name}
    prefix = f"{ticker}."
    view.update({name[len(prefix):]: col for name, col in panel.columns.items() if name.startswith(prefix)})
    return view


# ---------------------------------------------------------------- stages


def run_fetch(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    provider = ProviderConfig(base_url=cfg.provider_url, requests_per_minute=cfg.requests_per_minute,
                              cache_dir=cfg.cache_dir)
    for t in cfg.tickers:
        out.files[f"{t}.csv"] = format_ohlcv_csv(fetch_remote_daily(t, provider))
    out.summary = {"tickers": list(cfg.tickers)}
    return out


def run_ingest(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    panel = load_panel(cfg, out)
    out.files["panel.csv"] = format_panel_csv(panel)
    out.summary = {"rows": len(panel), "start": str(panel.dates[0]), "end": str(panel.dates[-1]),
                   "columns": len(panel.columns)}
    return out


def run_indicators(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    panel = load_panel(cfg, out)
    try:
        panel = add_indicators(panel, cfg.tickers, **cfg.indicator_params)
    except ValueError as exc:
        raise DataError(f"indicators: {exc}") from exc
    out.files["indicators.csv"] = format_panel_csv(panel)
    out.summary = {"rows": len(panel), "columns": len(panel.columns)}
    return out


def run_label(cfg: RunConfig) -> StageOutput:
    """Episodes and targets per ticker, each on its own full price history."""
    out = StageOutput()
    counts = {}
    for t in cfg.tickers:
        path = _ticker_path(cfg, t)
        out.inputs.add(path)
        s = load_ticker_csv(path, t)
        prices = s.column("adjusted_close")
        dates = [str(d) for d in s.dates]
        try:
            episodes = detect_episodes(prices, THRESHOLDS["pullback"], dates)
            target = label_target(prices, cfg.target_depth, cfg.lookahead, cfg.min_duration)
            counts[t] = episode_counts(prices)
        except ValueError as exc:
            raise DataError(f"{t}: {exc}") from exc
        rows = [[e.peak_date, e.trough_date, e.recovery_date or "", repr(e.depth), e.classification]
                for e in episodes]
        out.files[f"episodes_{t}.csv"] = _csv(["peak_date", "trough_date", "recovery_date", "depth", "class"], rows)
        out.files[f"labels_{t}.csv"] = _csv(["date", f"{t}.target"], zip(dates, target.tolist()))
        counts[t]["target_days"] = int(target.sum())
    out.files["counts.json"] = _dumps(counts)
    out.summary = counts
    return out


def run_correlate(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    panel = enriched_panel(cfg, out)
    ticker = cfg.correlate_ticker or cfg.train_ticker or cfg.tickers[0]
    view = ticker_view(panel, ticker)
    names = sorted(k for k, v in view.items() if k != "target" and np.nanstd(v) > 0)
    M = np.column_stack([view[k] for k in names])
    ok = np.all(np.isfinite(M), axis=1)
    corr, names = correlation_matrix({k: M[ok, j] for j, k in enumerate(names)})
    out.files["correlation.csv"] = _csv([""] + names, ([n] + [repr(float(v)) for v in row]
                                                       for n, row in zip(names, corr)))
    out.summary = {"ticker": ticker, "variables": len(names), "rows": int(ok.sum())}
    return out


def _cluster_matrix(cfg: RunConfig, out: StageOutput) -> tuple[list[str], np.ndarray]:
    if cfg.cluster_matrix is not None:
        path = cfg.cluster_matrix
        if not path.exists():
            raise DataError(f"no cluster matrix at {path}")
        out.inputs.add(path)
        rows = list(csv.reader(io.StringIO(path.read_text())))
        try:
            names = [r[0] for r in rows[1:] if r]
            X = np.array([[float(v) for v in r[1:]] for r in rows[1:] if r])
        except (ValueError, IndexError) as exc:
            raise DataError(f"bad cluster matrix {path.name}: {exc}") from exc
        return names, X
    # One row per ticker: its factor series laid end to end over the panel dates.
    panel = enriched_panel(cfg, out)
    cols = [(f, i) for f in cfg.cluster_factors for i in range(len(panel))]
    X = np.array([[panel[f"{t}.{f}"][i] for f, i in cols] for t in cfg.tickers])
    keep = np.all(np.isfinite(X), axis=0) & (np.std(X, axis=0) > 0)
    return list(cfg.tickers), X[:, keep]


def run_cluster(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    names, X = _cluster_matrix(cfg, out)
    # Panel vectors mix units and are z-scored by default; a supplied matrix is taken as is.
    scale = cfg.scale if cfg.scale is not None else cfg.cluster_matrix is None
    if scale:
        X = zscore_columns(X)[0]
    ks = [k for k in cfg.k_values() if k <= len(X)]
    if not ks:
        raise UsageError(f"k range {cfg.k_range} exceeds the {len(X)} rows to cluster")
    report = kmeans_sweep(X, ks, cfg.restarts, cfg.seed, k=cfg.k)
    chosen = report.best[report.selected_k]
    out.files["elbow.csv"] = _csv(
        ["k", "wcss", "second_difference", "selected"],
        ([k, repr(w), _num(report.second_differences.get(k, np.nan)), int(k == report.selected_k)]
         for k, w in zip(report.k_values, report.wcss)))
    out.files["assignments.csv"] = _csv(["row", "cluster"], zip(names, chosen.assignments.tolist()))
    out.summary = {"selected_k": report.selected_k, "rule": report.rule,
                   "low_confidence": report.low_confidence, "rows": len(names),
                   "k_values": report.k_values, "restarts": cfg.restarts}
    out.files["summary.json"] = _dumps(out.summary)
    return out


def run_regress(cfg: RunConfig) -> StageOutput:
    """Pooled OLS of the target column on the regressors, one fit per market benchmark."""
    out = StageOutput()
    panel = enriched_panel(cfg, out)
    tickers = cfg.regress_tickers or cfg.tickers
    fits = []
    for market in cfg.regress_markets:
        bases = [market if r == "market_value" else r for r in cfg.regressors]
        spec = FeatureSpec(bases)
        Xs, ys = [], []
        for t in tickers:
            fm = build_feature_matrix(ticker_view(panel, t), spec, require=[cfg.regress_target])
            Xs.append(fm.X)
            ys.append(fm.extra[cfg.regress_target])
        # Report the market regressor under one name so benchmark columns line up.
        terms = [INTERCEPT] + ["market_value" if b == market else b for b in bases]
        fits.append(fit_ols(np.vstack(Xs), np.concatenate(ys), terms))
    # A price-level target is the default; say so in both outputs.
    level = cfg.regress_target == "adjusted_close"
    caption = f"Dependent variable: {cfg.regress_target}" + (" (price level, default)" if level else "")
    out.files["ols.txt"] = caption + "\n" + regression_table(fits, cfg.regress_markets)
    out.files["ols.json"] = _dumps({
        "target": cfg.regress_target,
        "target_is_price_level": level,
        "tickers": list(tickers),
        "fits": {m: fit_to_dict(f) for m, f in zip(cfg.regress_markets, fits)},
    })
    out.summary = {m: {"r2": f.r_squared, "n": f.n_obs} for m, f in zip(cfg.regress_markets, fits)}
    return out


@dataclass
class Classification:
    dates: np.ndarray
    prices: np.ndarray
    labels: np.ndarray
    probabilities: np.ndarray
    summary: dict
    files: dict[str, str]


def _design(panel: AlignedPanel, ticker: str, spec: FeatureSpec):
    fm = build_feature_matrix(ticker_view(panel, ticker), spec, require=["target", "adjusted_close"])
    if len(fm.rows) == 0:
        raise DataError(f"{ticker}: no rows with every feature defined")
    return fm


def _standardise(X: np.ndarray, terms: list[str], ticker: str) -> np.ndarray:
    mu = X.mean(axis=0)
    sd = X.std(axis=0, ddof=1) if len(X) > 1 else np.zeros(X.shape[1])
    const = sd == 0
    bad = [t for t, c in zip(terms, const) if c and t != INTERCEPT]
    if bad:
        raise ModelError(f"{ticker}: constant feature(s) {', '.join(bad)}")
    mu[const], sd[const] = 0.0, 1.0
    return (X - mu) / sd


def classify(cfg: RunConfig, out: StageOutput) -> Classification:
    """Fit on the training ticker, score the test ticker."""
    panel = enriched_panel(cfg, out)
    train_t = cfg.train_ticker or cfg.tickers[0]
    test_t = cfg.test_ticker or train_t
    for t in (train_t, test_t):
        if t not in cfg.tickers:
            raise UsageError(f"ticker {t} is not in the configured ticker list")
    spec = FeatureSpec(cfg.features, [tuple(p) for p in cfg.interactions])
    train = _design(panel, train_t, spec)
    test = _design(panel, test_t, spec)
    y_train = train.extra["target"].astype(np.int64)
    if y_train.min() == y_train.max():
        raise DataError(f"{train_t}: training labels are all {y_train[0]}")

    # Each ticker is standardised with its own statistics so that price-level
    # features mean the same thing across tickers; the intercept stays 1.
    Xtr = _standardise(train.X, spec.term_names(), train_t)
    Xte = _standardise(test.X, spec.term_names(), test_t)

    rng = SeededRng(derive_seed(cfg.seed, RESAMPLE_STREAM))
    Xr, yr = resample(Xtr, y_train, cfg.resample, rng) if cfg.resample != "none" else (Xtr, y_train)
    terms = spec.term_names()
    full = fit_logistic(Xr, yr, terms)
    stepped, steps = backward_stepwise_aic(Xr, yr, terms)
    final, pruned = pvalue_prune(Xr, yr, terms, cfg.alpha, start=stepped.terms)

    idx = [terms.index(t) for t in final.terms]
    prob = final.predict_proba(Xte[:, idx])
    y_test = test.extra["target"].astype(np.int64)
    pred = (prob >= cfg.threshold).astype(np.int64)
    metrics = classification_metrics(y_test, pred)
    roc = roc_auc(y_test, prob) if 0 < y_test.sum() < len(y_test) else None

    dates = panel.dates[test.rows]
    files = {
        "logistic_full.txt": logistic_table(full),
        "logistic_stepwise.txt": logistic_table(stepped),
        "logistic.txt": logistic_table(final),
        "logistic.json": _dumps({
            "full": fit_to_dict(full), "stepwise": fit_to_dict(stepped), "final": fit_to_dict(final),
            "stepwise_log": [{"term": s.term, "aic_before": s.aic_before, "aic_after": s.aic_after}
                             for s in steps],
            "pvalue_removed": list(pruned),
        }),
        "confusion.json": _dumps({**metrics.confusion.as_dict(), **metrics.as_dict(),
                                  "threshold": cfg.threshold, "auc": roc.auc if roc else None}),
        "probabilities.csv": _csv(["date", "probability", "label"],
                                  ([str(d), repr(float(p)), int(y)] for d, p, y in zip(dates, prob, y_test))),
    }
    if roc is not None:
        files["roc.csv"] = _csv(["threshold", "fpr", "tpr"],
                                ([_num(t), repr(float(f)), repr(float(r))]
                                 for t, f, r in zip(roc.thresholds, roc.fpr, roc.tpr)))
    summary = {
        "train_ticker": train_t, "test_ticker": test_t,
        "train_rows": int(len(y_train)), "train_positives": int(y_train.sum()),
        "resampled_rows": int(len(yr)), "test_rows": int(len(y_test)), "test_positives": int(y_test.sum()),
        "aic": {"full": full.aic, "stepwise": stepped.aic, "final": final.aic},
        "terms": {"full": len(full.terms), "stepwise": len(stepped.terms), "final": len(final.terms)},
        "f1": metrics.f1, "auc": roc.auc if roc else None,
    }
    return Classification(dates, test.extra["adjusted_close"], y_test, prob, summary, files)


def run_classify(cfg: RunConfig) -> StageOutput:
    out = StageOutput()
    result = classify(cfg, out)
    out.files.update(result.files)
    out.summary = result.summary
    return out


def run_backtest(cfg: RunConfig) -> StageOutput:
    """Trade the test ticker on classifier probabilities against two baselines."""
    out = StageOutput()
    c = classify(cfg, out)
    dates = [str(d) for d in c.dates]
    strategy = bt.StrategyConfig(cfg.exit_threshold, cfg.reentry_threshold, cfg.cost_bps)
    signal = bt.run_signal_strategy(c.prices, c.probabilities, strategy, dates)
    hold = bt.run_buy_and_hold(c.prices, dates)
    rnd = bt.run_random_trader(c.prices, cfg.trade_probability,
                               SeededRng(derive_seed(cfg.seed, RANDOM_TRADER_STREAM)), cfg.cost_bps, dates)
    out.files["report.json"] = bt.comparison(signal, hold, rnd)
    out.files["equity.csv"] = signal.equity_csv()
    out.files["equity_buy_and_hold.csv"] = hold.equity_csv()
    out.files["equity_random.csv"] = rnd.equity_csv()
    out.summary = {name: {"total_return": r.total_return, "max_drawdown": r.max_drawdown, "trades": r.n_trades}
                   for name, r in (("signal", signal), ("buy_and_hold", hold), ("random", rnd))}
    return out


STAGES = {
    "fetch": run_fetch,
    "ingest": run_ingest,
    "indicators": run_indicators,
    "label": run_label,
    "correlate": run_correlate,
    "cluster": run_cluster,
    "regress": run_regress,
    "classify": run_classify,
    "backtest": run_backtest,
}

# Stages bundled by ``report``, in pipeline order.
REPORT_STAGES = ("ingest", "indicators", "label", "correlate", "cluster", "regress", "classify", "backtest")

# Files copied into the report directory: (stage, file, name in report).
REPORT_BUNDLE = (
    ("regress", "ols.txt", "table_regression.txt"),
    ("classify", "logistic.txt", "table_logistic.txt"),
    ("cluster", "elbow.csv", "elbow.csv"),
    ("classify", "roc.csv", "roc.csv"),
    ("classify", "confusion.json", "confusion.json"),
    ("backtest", "equity.csv", "equity.csv"),
)
