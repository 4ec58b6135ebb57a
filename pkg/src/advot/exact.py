"""Exact discrete Kantorovich solver.

Solves min <c, pi> over the transportation polytope with a simplex-type LP
solver, returning a vertex plan together with optimal dual potentials
(normalized so the last column potential is zero).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.optimize import linprog

from advot.measures import Histogram, clip_plan


@dataclass(frozen=True)
class DualPotentials:
    """Kantorovich dual pair (phi, psi) with phi_i + psi_j <= c_ij."""

    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        psi = np.asarray(self.psi, dtype=float)
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(psi))):
            raise ValueError("potentials must be finite")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)


@dataclass(frozen=True)
class ExactSolution:
    plan: np.ndarray
    potentials: DualPotentials
    value: float


class SolverError(RuntimeError):
    """LP solver failed to return an optimal vertex."""


def _marginal_matrix(n: int, m: int) -> sparse.csr_matrix:
    """Constraint matrix mapping vec(pi) to (row sums, column sums)."""
    row_idx = np.repeat(np.arange(n), m)
    col_idx = np.tile(np.arange(m), n)
    cols = np.arange(n * m)
    data = np.ones(2 * n * m)
    rows = np.concatenate([row_idx, n + col_idx])
    return sparse.csr_matrix(
        (data, (rows, np.concatenate([cols, cols]))), shape=(n + m, n * m)
    )


def solve_exact(c: np.ndarray, mu: Histogram, nu: Histogram) -> ExactSolution:
    """Exact OT via the dual simplex method (vertex plan + potentials)."""
    c = np.asarray(c, dtype=float)
    n, m = mu.n, nu.n
    if c.shape != (n, m):
        raise ValueError(f"cost is {c.shape}, marginals need ({n}, {m})")
    if not np.all(np.isfinite(c)):
        raise ValueError("cost entries must be finite")
    A = _marginal_matrix(n, m)
    b = np.concatenate([mu.w, nu.w])
    res = linprog(
        c.ravel(),
        A_eq=A,
        b_eq=b,
        bounds=(0, None),
        method="highs-ds",
        options={"presolve": True},
    )
    if res.status != 0:
        raise SolverError(f"LP solver failed: {res.message}")
    pi = clip_plan(res.x.reshape(n, m))
    y = res.eqlin.marginals
    phi, psi = y[:n].copy(), y[n:].copy()
    # potentials are defined up to a constant split; pin psi_m = 0
    shift = psi[-1]
    psi -= shift
    phi += shift
    value = float(np.sum(c * pi))
    return ExactSolution(pi, DualPotentials(phi, psi), value)


def separable_value(pots: DualPotentials, mu: Histogram, nu: Histogram) -> float:
    """OT value for the separable cost phi (+) psi: every plan attains it."""
    if pots.phi.size != mu.n or pots.psi.size != nu.n:
        raise ValueError("potential sizes do not match marginals")
    return float(pots.phi @ mu.w + pots.psi @ nu.w)
