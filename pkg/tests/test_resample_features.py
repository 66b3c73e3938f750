from collections import Counter

import numpy as np
import pytest

from dlab.errors import DataError, ModelError
from dlab.models import FeatureSpec, build_feature_matrix, resample
from dlab.numerics import SeededRng


def imbalanced():
    y = np.array([1] * 12 + [0] * 5555)
    X = np.column_stack([np.arange(len(y), dtype=float), y * 10.0])
    return X, y


def test_up_sampling_counts():
    X, y = imbalanced()
    X2, y2 = resample(X, y, "up", SeededRng(1))
    assert Counter(y2.tolist()) == {0: 5555, 1: 5555}


def test_down_sampling_counts():
    X, y = imbalanced()
    X2, y2 = resample(X, y, "down", SeededRng(1))
    assert Counter(y2.tolist()) == {0: 12, 1: 12}


def test_resampling_deterministic():
    X, y = imbalanced()
    for mode in ("up", "down"):
        a = resample(X, y, mode, SeededRng(9))
        b = resample(X, y, mode, SeededRng(9))
        assert a[0].tobytes() == b[0].tobytes() and a[1].tobytes() == b[1].tobytes()


def test_resampling_preserves_rows():
    X, y = imbalanced()
    original = {tuple(r) for r in X}
    Xu, yu = resample(X, y, "up", SeededRng(2))
    assert {tuple(r) for r in Xu} == original  # every row kept, only duplicates added
    assert all(row[1] == 10.0 * label for row, label in zip(Xu, yu))
    Xd, yd = resample(X, y, "down", SeededRng(2))
    assert len({tuple(r) for r in Xd}) == len(Xd)  # no duplicates
    assert {tuple(r) for r in Xd} <= original
    assert {tuple(r) for r in X[y == 1]} <= {tuple(r) for r in Xd}


def test_single_class():
    with pytest.raises(ModelError):
        resample(np.ones((3, 1)), np.zeros(3), "up", SeededRng(0))


def test_feature_matrix_order():
    cols = {"x1": np.array([1.0, 2.0]), "x2": np.array([3.0, 4.0])}
    fm = build_feature_matrix(cols, FeatureSpec(["x1", "x2"], [("x1", "x2")]))
    assert fm.names == ["(Intercept)", "x1", "x2", "x1:x2"]
    np.testing.assert_array_equal(fm.X, [[1, 1, 3, 3], [1, 2, 4, 8]])


def test_feature_matrix_drops_warmup():
    cols = {"rsi": np.array([np.nan, np.nan, 40.0, 55.0]), "cpi": np.array([1.0, 1, 1, 2])}
    fm = build_feature_matrix(cols, FeatureSpec(["rsi", "cpi"]))
    assert fm.n_excluded == 2
    np.testing.assert_array_equal(fm.rows, [2, 3])


def test_feature_matrix_errors():
    with pytest.raises(DataError):
        build_feature_matrix({"a": np.ones(2)}, FeatureSpec(["a", "b"]))
    with pytest.raises(ModelError):
        FeatureSpec(["a:b", "a", "b"], [("a", "b")])
