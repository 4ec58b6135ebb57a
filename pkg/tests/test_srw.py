"""Subspace robust Wasserstein distances, static and time-coupled."""

import numpy as np
import pytest

from advot import Histogram, PointCloud, solve_exact, squared_euclidean_cost
from advot.srw import (
    TsrwConfig,
    bures,
    bures_grads,
    capped_simplex_project,
    displacement_second_moment,
    project_Rk,
    srw,
    tsrw,
)

from oracles import capped_simplex_qp


def _clouds(seed, n=10, d=3, T=2, step=0.4):
    rng = np.random.default_rng(seed)
    return [PointCloud.uniform(rng.standard_normal((n, d)) + t * step)
            for t in range(T)]


def test_project_rk_feasibility_and_idempotence():
    rng = np.random.default_rng(0)
    d, k = 5, 2
    M = rng.standard_normal((d, d))
    M = 0.5 * (M + M.T)
    omega = project_Rk(M, k)
    vals = np.linalg.eigvalsh(omega)
    assert vals.min() >= -1e-10 and vals.max() <= 1 + 1e-10
    assert np.trace(omega) == pytest.approx(k, abs=1e-8)
    assert np.allclose(project_Rk(omega, k), omega, atol=1e-8)


def test_capped_simplex_against_qp_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, d + 1))
        lam = rng.standard_normal(d) * 3
        assert np.abs(capped_simplex_project(lam, k)
                      - capped_simplex_qp(lam, k)).max() <= 1e-8


def test_displacement_second_moment_trace_identity():
    X, Y = _clouds(2)
    pi = np.outer(X.weights.w, Y.weights.w)
    V = displacement_second_moment(X, Y, pi)
    assert np.allclose(V, V.T, atol=1e-12)
    assert np.trace(V) == pytest.approx(
        float(np.sum(pi * squared_euclidean_cost(X, Y))), abs=1e-10)


def test_srw_full_rank_equals_exact_ot():
    X, Y = _clouds(3, d=3)
    w2 = solve_exact(squared_euclidean_cost(X, Y),
                     X.weights, Y.weights).value
    res = srw(X, Y, 3)
    assert res.converged
    assert abs(res.value - w2) <= 1e-6 * (1 + abs(w2))


def test_srw_monotone_in_k_with_certified_gap():
    X, Y = _clouds(4, d=4)
    vals = []
    for k in range(1, 5):
        res = srw(X, Y, k)
        assert res.gap <= 1e-4 * (1 + abs(res.value))
        omega_vals = np.linalg.eigvalsh(res.omega)
        assert omega_vals.min() >= -1e-7 and omega_vals.max() <= 1 + 1e-7
        assert np.trace(res.omega) == pytest.approx(k, abs=1e-6)
        vals.append(res.value)
    assert all(vals[i + 1] >= vals[i] - 1e-8 for i in range(3))


def test_srw_rejects_bad_rank():
    X, Y = _clouds(5)
    with pytest.raises(ValueError):
        srw(X, Y, 0)
    with pytest.raises(ValueError):
        srw(X, Y, 4)


def test_bures_basics_and_gradients():
    rng = np.random.default_rng(6)
    M = rng.standard_normal((4, 4))
    A = M @ M.T + 0.3 * np.eye(4)
    assert bures(A, A) <= 1e-8
    N = rng.standard_normal((4, 4))
    B = N @ N.T + 0.3 * np.eye(4)
    assert bures(A, B) > 0
    gA, gB = bures_grads(A, B)
    H = rng.standard_normal((4, 4))
    H = 0.5 * (H + H.T)
    h = 1e-5
    fd = (bures(A + h * H, B) - bures(A - h * H, B)) / (2 * h)
    assert abs(np.sum(gA * H) - fd) <= 1e-5 * (1 + abs(fd))


def test_tsrw_two_steps_equals_srw():
    clouds = _clouds(7, n=8, d=3, T=2)
    pair = srw(clouds[0], clouds[1], 2)
    res = tsrw(clouds, TsrwConfig(k=2, eta=1.0, maxiter=150, seed=0))
    assert abs(res.value - pair.value) <= 1e-4 * (1 + abs(pair.value))
    assert len(res.omegas) == 1


def test_tsrw_zero_coupling_separates():
    clouds = _clouds(8, n=8, d=3, T=3)
    res = tsrw(clouds, TsrwConfig(k=2, eta=0.0, maxiter=150, seed=0))
    ssum = sum(srw(clouds[t], clouds[t + 1], 2).value for t in range(2))
    assert abs(res.value - ssum) <= 1e-4 * (1 + abs(ssum))
