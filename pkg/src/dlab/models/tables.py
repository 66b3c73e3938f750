"""JSON and plain-text renderings of fit summaries.

The text tables follow the layout of published regression tables: each term
gets an estimate line with significance stars and a parenthesised standard
error line beneath it, and a footer of fit statistics.
"""

from __future__ import annotations

import json
import math
from typing import Sequence

from scipy.stats import t as student_t

from .logistic import LogisticFit
from .ols import RegressionFit

STAR_NOTE = "Note: *p<0.1; **p<0.05; ***p<0.01"


def _num(v) -> float | None:
    v = float(v)
    return v if math.isfinite(v) else None


def fit_to_dict(fit: RegressionFit | LogisticFit) -> dict:
    rows = []
    if isinstance(fit, RegressionFit):
        q = float(student_t.ppf(0.975, fit.dof))
        lo = fit.coefficients - q * fit.std_errors
        hi = fit.coefficients + q * fit.std_errors
        stats = fit.t_stats
    else:
        lo, hi, stats = fit.ci_low, fit.ci_high, fit.z_stats
    for j, term in enumerate(fit.terms):
        rows.append(
            {
                "term": term,
                "estimate": _num(fit.coefficients[j]),
                "se": _num(fit.std_errors[j]),
                "statistic": _num(stats[j]),
                "p": _num(fit.p_values[j]),
                "stars": fit.stars[j],
                "ci_low": _num(lo[j]),
                "ci_high": _num(hi[j]),
            }
        )
    out = {"terms": rows, "n": fit.n_obs}
    if isinstance(fit, RegressionFit):
        out.update(model="ols", r2=fit.r_squared, adj_r2=fit.adj_r_squared)
    else:
        out.update(model="logistic", logL=fit.log_likelihood, aic=fit.aic,
                   converged=fit.converged, iterations=fit.iterations,
                   warnings=list(fit.warnings))
    return out


def fit_to_json(fit) -> str:
    return json.dumps(fit_to_dict(fit), indent=2, sort_keys=True) + "\n"


def _fmt(v: float, digits: int) -> str:
    if not math.isfinite(v):
        return "NA"
    return f"{v:,.{digits}f}"


def _render(header: Sequence[str], body: list[list[str]], footer: list[list[str]]) -> str:
    table = [list(header)] + body + footer
    widths = [max(len(r[c]) for r in table) for c in range(len(header))]

    def line(r):
        return "  ".join(cell.ljust(widths[0]) if i == 0 else cell.rjust(widths[i])
                         for i, cell in enumerate(r)).rstrip()

    rule = "-" * (sum(widths) + 2 * (len(widths) - 1))
    out = [rule, line(header), rule]
    out += [line(r) for r in body]
    out += [rule] + [line(r) for r in footer] + [rule, STAR_NOTE]
    return "\n".join(out) + "\n"


def regression_table(fits: Sequence[RegressionFit], labels: Sequence[str] | None = None,
                     digits: int = 3) -> str:
    """Side-by-side OLS columns: estimate+stars, (standard error), R^2 footer."""
    labels = list(labels) if labels is not None else [f"({i + 1})" for i in range(len(fits))]
    terms: list[str] = []
    for f in fits:
        terms += [t for t in f.terms if t not in terms]
    body = []
    for term in terms:
        est, se = [term], [""]
        for f in fits:
            if term in f.terms:
                j = f.terms.index(term)
                est.append(_fmt(f.coefficients[j], digits) + f.stars[j])
                se.append(f"({_fmt(f.std_errors[j], digits)})")
            else:
                est.append("")
                se.append("")
        body += [est, se]
    footer = [
        ["Observations"] + [f"{f.n_obs:,}" for f in fits],
        ["R-squared"] + [_fmt(f.r_squared, 3) for f in fits],
        ["Adjusted R-squared"] + [_fmt(f.adj_r_squared, 3) for f in fits],
    ]
    return _render([""] + labels, body, footer)


def logistic_table(fit: LogisticFit, label: str = "Dependent variable: downturn", digits: int = 3) -> str:
    """Estimate+stars, (standard error) and [95% Wald interval] per term; logL/AIC footer."""
    body = []
    for j, term in enumerate(fit.terms):
        body.append([term, _fmt(fit.coefficients[j], digits) + fit.stars[j]])
        body.append(["", f"({_fmt(fit.std_errors[j], digits)})"])
        body.append(["", f"[{_fmt(fit.ci_low[j], digits)}, {_fmt(fit.ci_high[j], digits)}]"])
    footer = [
        ["Observations", f"{fit.n_obs:,}"],
        ["Log Likelihood", _fmt(fit.log_likelihood, 3)],
        ["Akaike Inf. Crit.", _fmt(fit.aic, 3)],
    ]
    return _render(["", label], body, footer)
