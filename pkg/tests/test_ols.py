import numpy as np
import pytest
from scipy import stats

from dlab.errors import ModelError, RankError
from dlab.models import fit_ols, regression_table, significance_stars
from dlab.models.tables import fit_to_dict


def ols_oracle(X, y):
    """Brute force: normal equations and scipy's t survival function."""
    n, p = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ X.T @ y
    resid = y - X @ beta
    s2 = resid @ resid / (n - p)
    se = np.sqrt(s2 * np.diag(xtx_inv))
    t = beta / se
    p_two = 2 * stats.t.sf(np.abs(t), n - p)
    return beta, se, t, p_two


def test_noiseless_line():
    x = np.linspace(0, 5, 20)
    fit = fit_ols(np.column_stack([np.ones(20), x]), 2 + 3 * x, ["const", "x"])
    np.testing.assert_allclose(fit.coefficients, [2, 3], atol=1e-10)
    assert fit.r_squared == pytest.approx(1.0)


def test_intercept_only():
    y = np.array([1.0, 4.0, 2.0, 7.0])
    fit = fit_ols(np.ones((4, 1)), y, ["const"])
    assert fit.coefficients[0] == pytest.approx(y.mean())
    assert fit.r_squared == pytest.approx(0.0, abs=1e-15)


def test_random_system_matches_oracle(nprng):
    n = 40
    X = np.column_stack([np.ones(n), nprng.normal(size=n), nprng.normal(size=n)])
    y = X @ [0.5, -1.0, 0.3] + nprng.normal(size=n)
    fit = fit_ols(X, y)
    beta, se, t, p = ols_oracle(X, y)
    np.testing.assert_allclose(fit.coefficients, beta, rtol=1e-8)
    np.testing.assert_allclose(fit.std_errors, se, rtol=1e-8)
    np.testing.assert_allclose(fit.t_stats, t, rtol=1e-8)
    np.testing.assert_allclose(fit.p_values, p, rtol=1e-8)


def test_r2_and_adjusted(nprng):
    n = 60
    X = np.column_stack([np.ones(n), nprng.normal(size=(n, 3))])
    y = X @ [1, 2, 0, -1] + nprng.normal(size=n)
    fit = fit_ols(X, y)
    resid = y - X @ fit.coefficients
    r2 = 1 - resid @ resid / np.sum((y - y.mean()) ** 2)
    assert fit.r_squared == pytest.approx(r2)
    assert fit.adj_r_squared == pytest.approx(1 - (1 - r2) * (n - 1) / (n - 4))
    assert fit.adj_r_squared <= fit.r_squared
    assert 0 <= fit.r_squared <= 1
    # residuals orthogonal to the design
    assert np.max(np.abs(X.T @ resid)) <= 1e-8 * np.linalg.norm(y)


def test_stars():
    assert [significance_stars(p) for p in (0.005, 0.01, 0.04, 0.07, 0.1, 0.5)] == \
           ["***", "**", "**", "*", "", ""]


def test_rank_and_size_errors():
    x = np.arange(6.0)
    with pytest.raises(RankError):
        fit_ols(np.column_stack([np.ones(6), x, 2 * x]), x)
    with pytest.raises(ModelError):
        fit_ols(np.ones((2, 2)), [1.0, 2.0])


def test_table_layout(nprng):
    n = 50
    X = np.column_stack([np.ones(n), nprng.normal(size=n)])
    y = X @ [1, 2] + nprng.normal(size=n)
    fit = fit_ols(X, y, ["Constant", "RSI"])
    text = regression_table([fit, fit], ["NASDAQ", "S&P 500"])
    lines = text.splitlines()
    assert any(l.startswith("RSI") and "***" in l for l in lines)
    se_line = lines[lines.index(next(l for l in lines if l.startswith("RSI"))) + 1]
    assert se_line.strip().startswith("(") and se_line.strip().endswith(")")
    for label in ("Observations", "R-squared", "Adjusted R-squared", "Note: *p<0.1; **p<0.05; ***p<0.01"):
        assert any(l.startswith(label) for l in lines)
    d = fit_to_dict(fit)
    assert set(d["terms"][0]) == {"term", "estimate", "se", "statistic", "p", "stars", "ci_low", "ci_high"}
    assert d["r2"] == fit.r_squared
