"""Histograms, point clouds, cost matrices, and CSV round trips."""

import numpy as np
import pytest

from advot import (
    Histogram,
    PointCloud,
    check_marginals,
    clip_plan,
    load_point_cloud,
    mahalanobis_cost,
    save_point_cloud,
    squared_euclidean_cost,
)


def test_histogram_normalizes():
    h = Histogram(np.array([1.0, 3.0]))
    assert np.allclose(h.w, [0.25, 0.75])
    assert h.n == 2


def test_histogram_rejects_bad_input():
    with pytest.raises(ValueError):
        Histogram(np.array([-1.0, 2.0]))
    with pytest.raises(ValueError):
        Histogram(np.array([0.0, 0.0]))
    with pytest.raises(ValueError):
        Histogram(np.array([[1.0, 2.0]]))


def test_uniform_cloud():
    pts = np.arange(6.0).reshape(3, 2)
    cloud = PointCloud.uniform(pts)
    assert cloud.n == 3 and cloud.d == 2
    assert np.allclose(cloud.weights.w, 1.0 / 3)


def test_squared_euclidean_cost_matches_loops():
    rng = np.random.default_rng(0)
    X = PointCloud.uniform(rng.standard_normal((4, 3)))
    Y = PointCloud.uniform(rng.standard_normal((5, 3)))
    c = squared_euclidean_cost(X, Y)
    ref = np.array([[np.sum((x - y) ** 2) for y in Y.points]
                    for x in X.points])
    assert np.allclose(c, ref, atol=1e-12)
    assert c.min() >= 0


def test_mahalanobis_identity_reduces_to_euclidean():
    rng = np.random.default_rng(1)
    X = PointCloud.uniform(rng.standard_normal((4, 3)))
    Y = PointCloud.uniform(rng.standard_normal((4, 3)))
    c = mahalanobis_cost(X, Y, np.eye(3))
    assert np.allclose(c, squared_euclidean_cost(X, Y), atol=1e-12)


def test_check_marginals_and_clip():
    mu = Histogram(np.array([0.5, 0.5]))
    nu = Histogram(np.array([0.25, 0.75]))
    pi = np.outer(mu.w, nu.w)
    assert check_marginals(pi, mu, nu) <= 1e-15
    dirty = pi.copy()
    dirty[0, 0] = -1e-12
    assert clip_plan(dirty).min() >= 0.0


def test_point_cloud_csv_roundtrip(tmp_path):
    rng = np.random.default_rng(2)
    cloud = PointCloud(rng.standard_normal((5, 3)),
                       Histogram(rng.random(5) + 0.1))
    path = tmp_path / "cloud.csv"
    save_point_cloud(path, cloud)
    back = load_point_cloud(path)
    assert np.array_equal(back.points, cloud.points)
    assert np.array_equal(back.weights.w, cloud.weights.w)
