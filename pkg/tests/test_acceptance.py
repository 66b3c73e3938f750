"""Acceptance gate. Each criterion prints one PASS/FAIL line.

Expected values come from independent oracles (normal equations, scipy's
t distribution, pair counting, hand walks) rather than from the package.
"""

import filecmp
import itertools
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest
from scipy import stats
from scipy.special import expit

import dlab
from dlab.backtest import run_buy_and_hold, run_random_trader, run_signal_strategy
from dlab.cli import main
from dlab.drawdown import THRESHOLDS, detect_episodes, label_target
from dlab.models import aic, backward_stepwise_aic, fit_logistic, fit_ols, kmeans_sweep, resample, roc_auc
from dlab.models.logistic import score
from dlab.numerics import SeededRng

from helpers import planted_blobs, same_partition

FIXTURES = Path(dlab.__file__).parent / "fixtures"


@pytest.fixture
def verdict(capsys):
    def report(number, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return report


def test_criterion_01_aic_identity(verdict):
    start = time.perf_counter()
    value = aic(-143.841, 27)
    elapsed = time.perf_counter() - start
    ok = abs(value - 341.682) < 1e-9 and abs(value - 341.683) <= 0.01 and elapsed < 1e-3
    verdict(1, ok, f"AIC(logL=-143.841, k=27) = {value:.3f} vs published 341.683; {elapsed * 1e6:.1f} us")


def _ols_oracle(X, y):
    n, p = X.shape
    xtx_inv = np.linalg.inv(X.T @ X)
    beta = xtx_inv @ (X.T @ y)
    resid = y - X @ beta
    se = np.sqrt(resid @ resid / (n - p) * np.diag(xtx_inv))
    t = beta / se
    return beta, se, t, 2 * stats.t.sf(np.abs(t), n - p)


def test_criterion_02_ols_oracle_suite(verdict):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        p = int(rng.integers(1, 9))
        n = int(rng.integers(p + 2, 51))
        X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
        y = X @ rng.normal(size=p) + rng.normal(size=n)
        fit = fit_ols(X, y)
        for got, want in zip((fit.coefficients, fit.std_errors, fit.t_stats, fit.p_values), _ols_oracle(X, y)):
            rel = np.abs(got - want) / np.maximum(np.abs(want), 1e-300)
            worst = max(worst, float(rel.max()))
    elapsed = time.perf_counter() - start
    verdict(2, worst <= 1e-6 and elapsed < 5, f"500 systems, worst relative error {worst:.2e}; {elapsed:.2f} s")


def test_criterion_03_logistic_recovery(verdict):
    truth = np.array([-1.0, 0.8, -0.5])
    n = 5000
    start = time.perf_counter()
    covered, worst_grad = 0, 0.0
    for seed in range(100):
        rng = np.random.default_rng(1000 + seed)
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 2))])
        y = (rng.random(n) < expit(X @ truth)).astype(float)
        fit = fit_logistic(X, y)
        covered += bool(np.all(np.abs(fit.coefficients - truth) <= 3 * fit.std_errors))
        worst_grad = max(worst_grad, float(np.linalg.norm(score(X, y, fit.coefficients))))
    elapsed = time.perf_counter() - start
    ok = covered >= 95 and worst_grad <= 1e-6 * n and elapsed < 30
    verdict(3, ok, f"{covered}/100 within 3 SE; max |gradient| {worst_grad:.2e} <= {1e-6 * n:.0e}; {elapsed:.1f} s")


def test_criterion_04_stepwise_behaviour(verdict):
    names = ["(Intercept)", "x1", "x2", "x3", "noise1", "noise2", "noise3"]
    noise = set(names[4:])
    n = 1500
    clean, monotone = 0, 0
    for seed in range(100):
        rng = np.random.default_rng(4000 + seed)
        X = np.column_stack([np.ones(n), rng.normal(size=(n, 6))])
        y = (rng.random(n) < expit(X @ [-0.5, 1.0, -1.0, 0.8, 0, 0, 0])).astype(float)
        _, log = backward_stepwise_aic(X, y, names)
        clean += {s.term for s in log} <= noise
        aics = [log[0].aic_before] + [s.aic_after for s in log] if log else []
        monotone += all(b < a for a, b in zip(aics, aics[1:]))
    verdict(4, clean >= 95 and monotone == 100,
            f"only noise removed in {clean}/100; AIC log strictly decreasing in {monotone}/100")


def test_criterion_05_imbalance_shapes(verdict):
    y = np.array([1] * 12 + [0] * 5555)
    X = np.arange(len(y), dtype=float)[:, None]
    _, up = resample(X, y, "up", SeededRng(5))
    _, down = resample(X, y, "down", SeededRng(5))
    again_up = resample(X, y, "up", SeededRng(5))
    again_down = resample(X, y, "down", SeededRng(5))
    up_c, down_c = Counter(up.tolist()), Counter(down.tolist())
    same = (np.array_equal(again_up[1], up) and np.array_equal(again_down[1], down)
            and np.array_equal(again_up[0], resample(X, y, "up", SeededRng(5))[0]))
    ok = up_c == {0: 5555, 1: 5555} and down_c == {0: 12, 1: 12} and same
    verdict(5, ok, f"up {up_c[1]}/{up_c[0]}, down {down_c[1]}/{down_c[0]}, deterministic per seed: {same}")


def test_criterion_06_drawdown_golden(verdict):
    checks = []
    (ep,) = detect_episodes([100, 95, 89, 94, 101])
    checks.append((ep.peak_index, ep.trough_index, ep.recovery_index, ep.classification) == (0, 2, 4, "correction"))
    checks.append(abs(ep.depth - 0.11) < 1e-12)
    (ep,) = detect_episodes([100, 79, 100])
    checks.append((ep.peak_index, ep.trough_index, ep.recovery_index, ep.classification) == (0, 1, 2, "crash"))
    checks.append(abs(ep.depth - 0.21) < 1e-12)
    checks.append(detect_episodes(np.arange(1.0, 30.0)) == [])
    checks.append(label_target([100, 95, 89, 94, 101], 0.10).tolist() == [0, 0, 1, 0, 0])
    checks.append(label_target([100, 95, 89, 94, 101], 0.10, lookahead=2).tolist() == [1, 1, 1, 0, 0])
    checks.append(label_target(np.arange(1.0, 30.0)).sum() == 0)
    checks.append(THRESHOLDS == {"pullback": 0.05, "correction": 0.10, "crash": 0.20})
    verdict(6, all(checks), f"{sum(checks)}/{len(checks)} golden checks")


def test_criterion_07_kmeans_elbow(verdict):
    start = time.perf_counter()
    selected, exact, monotone = 0, 0, 0
    for seed in range(100):
        X, truth = planted_blobs(seed)
        rep = kmeans_sweep(X, range(2, 11), restarts=10, seed=seed)
        selected += rep.selected_k == 3
        exact += same_partition(rep.best[3].assignments, truth)
        monotone += all(
            all(b <= a + 1e-9 for a, b in zip(r.history, r.history[1:])) for r in rep.best.values())
    elapsed = time.perf_counter() - start
    verdict(7, selected == exact == monotone == 100,
            f"k=3 chosen {selected}/100, partition exact {exact}/100, Lloyd wcss monotone {monotone}/100; "
            f"{elapsed:.1f} s")


def _pair_auc(labels, scores):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def test_criterion_08_roc_auc_oracle(verdict):
    rng = np.random.default_rng(8)
    worst, cases = 0.0, 0
    for n in range(2, 13):
        for labels in itertools.product((0, 1), repeat=n):
            if 0 < sum(labels) < n:
                # Coarse scores force plenty of ties.
                scores = rng.integers(0, 4, size=n) / 4
                worst = max(worst, abs(roc_auc(labels, scores).auc - _pair_auc(labels, scores)))
                cases += 1
    example = roc_auc([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]).auc
    verdict(8, worst < 1e-12 and example == 0.75,
            f"{cases} label vectors, max |AUC - pair count| {worst:.1e}; worked example {example}")


def test_criterion_09_backtest_identities(verdict):
    rng = np.random.default_rng(9)
    prices = 100 * np.exp(np.cumsum(rng.normal(0, 0.02, 300)))
    zero = run_signal_strategy(prices, np.zeros(300)).equity.tobytes() == run_buy_and_hold(prices).equity.tobytes()
    foresight = run_signal_strategy([100, 90, 81, 100], [1.0, 1.0, 0.0, 0.0]).total_return
    hand = 100 / 81 - 1
    rnd = run_random_trader(prices, 0.0, SeededRng(9)).equity.tobytes() == run_buy_and_hold(prices).equity.tobytes()
    ok = zero and abs(foresight - 0.2346) <= 1e-4 and abs(foresight - hand) <= 1e-10 and rnd
    verdict(9, ok, f"zero-signal == hold: {zero}; foresight {foresight:.10f} (hand {hand:.10f}); "
                   f"p=0 random == hold: {rnd}")


def _tree(root):
    return sorted(p.relative_to(root).as_posix() for p in root.rglob("*") if p.is_file())


def test_criterion_10_end_to_end(verdict, tmp_path, capsys):
    start = time.perf_counter()
    codes = [main(["report", "--config", str(FIXTURES / "config.json"), "--out", str(tmp_path / r)])
             for r in ("run1", "run2")]
    capsys.readouterr()
    a, b = tmp_path / "run1", tmp_path / "run2"
    files = _tree(a)
    identical = files == _tree(b) and all(filecmp.cmp(a / f, b / f, shallow=False) for f in files)

    ols = (a / "report" / "table_regression.txt").read_text().splitlines()
    logit = (a / "report" / "table_logistic.txt").read_text().splitlines()

    def estimate_se_pairs(lines):
        body = [l for l in lines if l and not set(l) <= {"-"}]
        start_i = next(i for i, l in enumerate(body) if l.startswith("(Intercept)"))
        first, se = body[start_i], body[start_i + 1]
        return any(ch.isdigit() for ch in first) and se.strip().startswith("(") and se.strip().endswith(")")

    stars = any(l.rstrip().endswith("*") for l in ols + logit)
    ols_ok = estimate_se_pairs(ols) and any(l.startswith("R-squared") for l in ols) \
        and any(l.startswith("Adjusted R-squared") for l in ols)
    logit_ok = estimate_se_pairs(logit) and any(l.startswith("Akaike Inf. Crit.") for l in logit) \
        and any(l.startswith("Log Likelihood") for l in logit)
    elapsed = time.perf_counter() - start
    ok = codes == [0, 0] and identical and stars and ols_ok and logit_ok
    verdict(10, ok, f"{len(files)} files byte-identical across runs: {identical}; regression table {ols_ok}, "
                    f"logistic table {logit_ok}, stars present {stars}; {elapsed:.1f} s")
