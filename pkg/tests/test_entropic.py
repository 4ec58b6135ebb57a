"""Sinkhorn and the alternating dual solver."""

import numpy as np
import pytest

from advot import (
    Entropy,
    Histogram,
    PowerP,
    alternating_dual_solve,
    sinkhorn,
    solve_exact,
)
from advot.entropic import (
    dual_objective,
    quadratic_row_solve,
    separable_adversarial_cost,
)
from advot.regularizers import reg_conjugate_grad


def _random_problem(seed, n=8, m=8):
    rng = np.random.default_rng(seed)
    mu = Histogram(rng.random(n) + 0.1)
    nu = Histogram(rng.random(m) + 0.1)
    return mu, nu, rng.random((n, m)) * 2.0


def test_sinkhorn_plan_is_feasible():
    mu, nu, c = _random_problem(0)
    sol = sinkhorn(c, mu, nu, eta=0.1, tol=1e-12)
    assert sol.converged
    assert np.abs(sol.plan.sum(1) - mu.w).max() <= 1e-10
    assert np.abs(sol.plan.sum(0) - nu.w).max() <= 1e-10
    assert sol.marg_residual <= 1e-10


def test_sinkhorn_approaches_exact_value():
    mu, nu, c = _random_problem(1)
    w = solve_exact(c, mu, nu).value
    vals = [np.sum(c * sinkhorn(c, mu, nu, eta=eta, tol=1e-12,
                                maxiter=200000).plan)
            for eta in (0.5, 0.1, 0.02)]
    errs = [abs(v - w) for v in vals]
    assert errs[2] < errs[0]
    assert errs[2] <= 2e-2 * (1 + abs(w))


def test_sinkhorn_rejects_bad_input():
    mu, nu, c = _random_problem(2)
    with pytest.raises(ValueError):
        sinkhorn(c, mu, nu, eta=0.0)
    with pytest.raises(ValueError):
        sinkhorn(c[:, :3], mu, nu, eta=0.1)


def test_alternating_dual_entropy_matches_sinkhorn():
    mu, nu, c = _random_problem(3)
    R = Entropy(eps=0.3, c0=c)
    alt = alternating_dual_solve(R, mu, nu, tol=0.0, maxiter=50, record=True)
    sk = sinkhorn(c, mu, nu, eta=0.3, tol=0.0, maxiter=50, record=True)
    for (pa, qa), (ps, qs) in zip(alt.history, sk.history):
        assert np.abs(pa - ps).max() <= 1e-12
        assert np.abs(qa - qs).max() <= 1e-12


def test_alternating_dual_quadratic_residual():
    mu, nu, c = _random_problem(4)
    R = PowerP(eps=0.5, c0=c, p=2.0)
    res = alternating_dual_solve(R, mu, nu, tol=1e-10, maxiter=20000)
    assert res.converged
    assert res.residual <= 1e-10
    plan = reg_conjugate_grad(
        R, (separable_adversarial_cost(res.potentials) - c) / R.eps)
    assert np.abs(plan.sum(1) - mu.w).max() <= 1e-9
    assert np.abs(plan.sum(0) - nu.w).max() <= 1e-9


def test_dual_objective_increases_along_solve():
    mu, nu, c = _random_problem(5)
    R = PowerP(eps=0.5, c0=c, p=2.0)
    short = alternating_dual_solve(R, mu, nu, tol=0.0, maxiter=2)
    long = alternating_dual_solve(R, mu, nu, tol=0.0, maxiter=200)
    assert dual_objective(R, long.potentials, mu, nu) >= \
        dual_objective(R, short.potentials, mu, nu) - 1e-12


def test_quadratic_row_solve_hits_target():
    rng = np.random.default_rng(6)
    psi = rng.standard_normal(7)
    c0_row = rng.random(7)
    eps, mass = 0.4, 0.3
    phi = quadratic_row_solve(psi, c0_row, eps, mass)
    total = np.maximum(phi + psi - c0_row, 0.0).sum()
    assert total == pytest.approx(eps * mass, abs=1e-10)
    with pytest.raises(ValueError):
        quadratic_row_solve(psi, c0_row, eps, 0.0)
