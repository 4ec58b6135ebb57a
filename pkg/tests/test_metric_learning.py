"""Palette extraction, barycentric maps, MDS, and metric learning."""

import numpy as np
import pytest

from advot import Histogram, PointCloud
from advot.metric_learning import (
    GroupedMeasures,
    barycentric_projection,
    color_transfer,
    kmeans_palette,
    learn_separating_omega,
    mds_embed,
)
from advot.srw import TsrwConfig


def test_kmeans_palette_recovers_distinct_colors():
    rng = np.random.default_rng(0)
    colors = rng.random((5, 3))
    pixels = np.repeat(colors, 40, axis=0)
    pal = kmeans_palette(pixels, 5, seed=0)
    assert pal.n == 5
    assert pal.weights.w.sum() == pytest.approx(1.0)
    found = sorted(tuple(np.round(p, 8)) for p in pal.points)
    expect = sorted(tuple(np.round(c, 8)) for c in colors)
    assert found == expect


def test_barycentric_projection_of_product_plan():
    rng = np.random.default_rng(1)
    X = PointCloud.uniform(rng.standard_normal((4, 2)))
    Y = PointCloud(rng.standard_normal((5, 2)), Histogram(rng.random(5) + 0.1))
    pi = np.outer(X.weights.w, Y.weights.w)
    proj = barycentric_projection(X, Y, pi)
    mean_y = Y.weights.w @ Y.points
    assert np.allclose(proj, np.tile(mean_y, (4, 1)), atol=1e-12)


def test_mds_embed_recovers_euclidean_geometry():
    rng = np.random.default_rng(2)
    pts = rng.standard_normal((6, 2))
    D = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    coords = mds_embed(D, dims=2)
    D2 = np.sum((coords[:, None, :] - coords[None, :, :]) ** 2, axis=2)
    assert np.abs(D - D2).max() <= 1e-8


def test_color_transfer_output_shape_and_range():
    rng = np.random.default_rng(3)
    src = rng.random((8, 8, 3))
    tgt = rng.random((8, 8, 3))
    out = color_transfer(src, tgt, K=6, seed=0, inner_eps=0.0)
    assert out.shape == src.shape
    assert out.min() >= 0.0 and out.max() <= 1.0
    again = color_transfer(src, tgt, K=6, seed=0, inner_eps=0.0)
    assert np.array_equal(out, again)
    with pytest.raises(ValueError):
        color_transfer(src[..., :2], tgt, K=4)


def test_learn_separating_omega_finds_discriminative_axis():
    # group A and B differ only along the first coordinate, so the learned
    # rank-1 projection should concentrate there
    rng = np.random.default_rng(4)
    shift = np.array([3.0, 0.0, 0.0])
    A = [PointCloud.uniform(rng.standard_normal((10, 3))) for _ in range(2)]
    B = [PointCloud.uniform(rng.standard_normal((10, 3)) + shift)
         for _ in range(2)]
    res = learn_separating_omega(
        GroupedMeasures(A, B), k=1,
        cfg=TsrwConfig(k=1, maxiter=200, seed=0, inner_eps=0.0))
    assert np.trace(res.omega) == pytest.approx(1.0, abs=1e-6)
    assert res.omega[0, 0] >= 0.9


def test_grouped_measures_validation():
    rng = np.random.default_rng(5)
    X = PointCloud.uniform(rng.standard_normal((4, 2)))
    Y = PointCloud.uniform(rng.standard_normal((4, 3)))
    with pytest.raises(ValueError):
        GroupedMeasures([X], [])
    with pytest.raises(ValueError):
        GroupedMeasures([X], [Y])
