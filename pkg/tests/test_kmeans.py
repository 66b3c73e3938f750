import numpy as np
import pytest

from dlab.errors import ModelError
from dlab.models import kmeans, kmeans_sweep
from dlab.numerics import SeededRng

from helpers import planted_blobs, same_partition


def test_k1_centroid_is_mean(nprng):
    X = nprng.normal(size=(15, 4))
    res = kmeans(X, 1, SeededRng(1))
    np.testing.assert_allclose(res.centroids[0], X.mean(axis=0))
    assert res.wcss == pytest.approx(((X - X.mean(axis=0)) ** 2).sum())


def test_k_equals_rows(nprng):
    X = nprng.normal(size=(8, 3))
    res = kmeans(X, 8, SeededRng(2))
    assert res.wcss == pytest.approx(0.0, abs=1e-20)
    assert sorted(res.assignments) == list(range(8))


def test_blobs_recovered():
    X, labels = planted_blobs(0)
    res = kmeans(X, 3, SeededRng(4))
    assert same_partition(res.assignments, labels)


def test_errors(nprng):
    X = nprng.normal(size=(4, 2))
    with pytest.raises(ModelError):
        kmeans(X, 5, SeededRng(0))
    with pytest.raises(ModelError):
        kmeans(X, 0, SeededRng(0))


def test_wcss_definition_and_history(nprng):
    X = nprng.normal(size=(60, 5))
    for seed in range(20):
        res = kmeans(X, 4, SeededRng(seed))
        assert res.wcss == pytest.approx(((X - res.centroids[res.assignments]) ** 2).sum())
        h = np.array(res.history)
        assert np.all(np.diff(h) <= 1e-9 * h[0])
        assert len(np.unique(res.assignments)) == 4


def test_empty_cluster_reseeded():
    # duplicated points make k-means++ pick coincident centres
    X = np.array([[0.0, 0.0]] * 5 + [[10.0, 0.0]])
    res = kmeans(X, 3, SeededRng(0), init=np.array([[0.0, 0.0], [0.0, 0.0], [10.0, 0.0]]))
    assert len(np.unique(res.assignments)) == 3


def test_sweep_selects_three():
    X, labels = planted_blobs(1)
    rep = kmeans_sweep(X, range(2, 11), restarts=10, seed=5)
    assert rep.selected_k == 3 and not rep.low_confidence
    assert same_partition(rep.best[3].assignments, labels)
    assert all(b <= a for a, b in zip(rep.wcss, rep.wcss[1:]))


def test_sweep_isotropic_is_low_confidence():
    X = np.random.default_rng(9).normal(size=(29, 8))
    rep = kmeans_sweep(X, range(2, 11), restarts=10, seed=1)
    assert rep.low_confidence
    assert rep.selected_k == 2


def test_more_restarts_never_worse(nprng):
    X = nprng.normal(size=(29, 5))
    one = kmeans_sweep(X, range(2, 11), restarts=1, seed=3)
    ten = kmeans_sweep(X, range(2, 11), restarts=10, seed=3)
    assert all(b <= a for a, b in zip(one.wcss, ten.wcss))


def test_sweep_explicit_override():
    X, _ = planted_blobs(2)
    assert kmeans_sweep(X, range(2, 6), restarts=2, seed=0, k=4).selected_k == 4


def test_sweep_deterministic():
    X, _ = planted_blobs(3)
    a = kmeans_sweep(X, range(2, 8), restarts=3, seed=11)
    b = kmeans_sweep(X, range(2, 8), restarts=3, seed=11)
    assert a.wcss == b.wcss
    for k in a.best:
        np.testing.assert_array_equal(a.best[k].assignments, b.best[k].assignments)
