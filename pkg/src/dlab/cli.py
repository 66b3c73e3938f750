"""``dlab`` command-line interface.

Every subcommand writes its artifacts to ``<output_dir>/<command>/`` along
with a ``manifest.json`` recording parameters, seed and SHA-256 hashes of
inputs and outputs. Failures print one JSON line to stderr and exit with
2 (usage), 3 (data) or 4 (numeric/model).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import fields
from pathlib import Path

from . import __version__
from .config import RunConfig
from .errors import DlabError
from .pipeline import (
    RANDOM_STAGES,
    REPORT_BUNDLE,
    REPORT_STAGES,
    STAGES,
    StageOutput,
    UsageError,
    sha256,
)

logger = logging.getLogger("dlab")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _pairs(text: str) -> list[list[str]]:
    out = []
    for item in _csv_list(text):
        a, sep, b = item.partition(":")
        if not sep or not a or not b:
            raise argparse.ArgumentTypeError(f"interaction {item!r} is not of the form a:b")
        out.append([a, b])
    return out


def _common(p):
    g = p.add_argument_group("run")
    g.add_argument("--config", help="JSON run configuration; flags override its values")
    g.add_argument("--data-dir", dest="data_dir")
    g.add_argument("--output-dir", "--out", dest="output_dir")
    g.add_argument("--seed", type=int)
    g.add_argument("--tickers", type=_csv_list, help="comma-separated symbols")
    g.add_argument("--ticker", help="shorthand for a single-symbol --tickers")
    g.add_argument("--macros", type=_csv_list, help="macro series names or CSV paths")
    g.add_argument("--trailing-years", dest="trailing_years", type=int)
    g.add_argument("--target-depth", dest="target_depth", type=float)
    g.add_argument("--lookahead", type=int)
    g.add_argument("--min-duration", dest="min_duration", type=int)
    g.add_argument("-v", "--verbose", action="store_true")


def _fetch_args(p):
    g = p.add_argument_group("provider")
    g.add_argument("--provider-url", dest="provider_url")
    g.add_argument("--cache-dir", dest="cache_dir")
    g.add_argument("--requests-per-minute", dest="requests_per_minute", type=float)


def _cluster_args(p):
    g = p.add_argument_group("cluster")
    g.add_argument("--matrix", dest="cluster_matrix", help="CSV of rows to cluster (first column = row name)")
    g.add_argument("--factors", dest="cluster_factors", type=_csv_list)
    g.add_argument("--k-range", dest="k_range", help="inclusive range lo:hi")
    g.add_argument("--restarts", type=int)
    g.add_argument("--k", type=int, help="override the elbow choice")
    g.add_argument("--scale", dest="scale", action=argparse.BooleanOptionalAction, default=None,
                   help="z-score columns (default: on for panel vectors, off for --matrix)")


def _regress_args(p):
    g = p.add_argument_group("regress")
    g.add_argument("--target", dest="regress_target")
    g.add_argument("--regressors", type=_csv_list)
    g.add_argument("--markets", dest="regress_markets", type=_csv_list,
                   help="benchmark columns, one fitted column each")
    g.add_argument("--regress-tickers", dest="regress_tickers", type=_csv_list)


def _classify_args(p):
    g = p.add_argument_group("classify")
    g.add_argument("--train-ticker", dest="train_ticker")
    g.add_argument("--test-ticker", dest="test_ticker")
    g.add_argument("--features", type=_csv_list)
    g.add_argument("--interactions", type=_pairs, help="comma-separated a:b pairs")
    g.add_argument("--resample", choices=["up", "down", "none"])
    g.add_argument("--alpha", type=float)
    g.add_argument("--threshold", type=float)


def _backtest_args(p):
    g = p.add_argument_group("backtest")
    g.add_argument("--exit-threshold", dest="exit_threshold", type=float)
    g.add_argument("--reentry-threshold", dest="reentry_threshold", type=float)
    g.add_argument("--cost-bps", dest="cost_bps", type=float)
    g.add_argument("--trade-probability", dest="trade_probability", type=float)


COMMANDS = {
    "fetch": ("download daily adjusted prices", [_fetch_args]),
    "ingest": ("align tickers and macro series into one panel", []),
    "indicators": ("add technical indicator columns", []),
    "label": ("detect drawdown episodes and label downturn onsets", []),
    "correlate": ("correlation matrix of one ticker's variables", [_classify_args]),
    "cluster": ("k-means sweep with elbow selection", [_cluster_args]),
    "regress": ("pooled OLS of price on indicators and macro series", [_regress_args]),
    "classify": ("logistic downturn classifier with stepwise selection", [_classify_args]),
    "backtest": ("trade on classifier output against baselines", [_classify_args, _backtest_args]),
    "report": ("run every stage and bundle the tables and plot data",
               [_cluster_args, _regress_args, _classify_args, _backtest_args]),
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dlab", description="Drawdown analysis pipeline.")
    parser.add_argument("--version", action="version", version=f"dlab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (help_text, groups) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        _common(p)
        for add in groups:
            add(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    known = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in known}
    if args.ticker:
        overrides["tickers"] = [args.ticker]
    try:
        cfg = RunConfig.load(args.config, overrides)
        cfg.k_values()
    except (OSError, ValueError, TypeError) as exc:
        raise UsageError(f"config: {exc}") from exc
    if args.command in RANDOM_STAGES and cfg.seed is None:
        raise UsageError(f"{args.command} needs a seed (--seed or config 'seed')")
    if not cfg.tickers:
        raise UsageError("empty ticker list")
    return cfg


# ---------------------------------------------------------------- writing


def _params(cfg: RunConfig) -> dict:
    names = [f.name for f in fields(RunConfig) if f.name not in RunConfig.PATH_FIELDS]
    params = cfg.params(*names)
    if cfg.cluster_matrix is not None:
        params["cluster_matrix"] = _rel(cfg.cluster_matrix, cfg.data_dir)
    return params


def _rel(path: Path, base: Path) -> str:
    try:
        return Path(os.path.relpath(path, base)).as_posix()
    except ValueError:
        return path.as_posix()


def write_stage(cfg: RunConfig, command: str, result: StageOutput) -> Path:
    """Write artifacts and manifest under ``output_dir/command``; stale artifacts are removed."""
    folder = cfg.output_dir / command
    old = folder / "manifest.json"
    if old.exists():
        try:
            for name in json.loads(old.read_text()).get("outputs", {}):
                (folder / name).unlink(missing_ok=True)
        except (ValueError, OSError):
            pass
    folder.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for name in sorted(result.files):
        data = result.files[name].encode()
        (folder / name).write_bytes(data)
        outputs[name] = sha256(data)
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "params": _params(cfg),
        "inputs": {_rel(p, cfg.data_dir): sha256(p.read_bytes()) for p in sorted(result.inputs)},
        "outputs": outputs,
        "summary": result.summary,
    }
    old.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return folder


def run_command(cfg: RunConfig, command: str) -> dict:
    if command != "report":
        result = STAGES[command](cfg)
        write_stage(cfg, command, result)
        return result.summary
    results = {}
    for stage in REPORT_STAGES:
        logger.info("stage %s", stage)
        results[stage] = STAGES[stage](cfg)
        write_stage(cfg, stage, results[stage])
    bundle = StageOutput(summary={s: r.summary for s, r in results.items()})
    for stage, src, dst in REPORT_BUNDLE:
        if src in results[stage].files:
            bundle.files[dst] = results[stage].files[src]
    for r in results.values():
        bundle.inputs |= r.inputs
    bundle.files["summary.json"] = json.dumps(bundle.summary, indent=2, sort_keys=True) + "\n"
    write_stage(cfg, "report", bundle)
    return bundle.summary


def _fail(exc: BaseException, code: int) -> int:
    line = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(line), file=sys.stderr)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        cfg = config_from_args(args)
        summary = run_command(cfg, args.command)
    except UsageError as exc:
        return _fail(exc, 2)
    except DlabError as exc:
        return _fail(exc, exc.exit_code)
    except (ValueError, ArithmeticError, FloatingPointError) as exc:
        return _fail(exc, 4)
    except OSError as exc:
        return _fail(exc, 3)
    print(json.dumps({"command": args.command, "output_dir": str(cfg.output_dir / args.command),
                      "summary": summary}, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
