"""Separable regularizers: evaluation, conjugates and linearization.

Each regularizer penalizes a transport plan entrywise around a reference
ground cost c0 with strength eps. The conjugate tables use the bare per-entry
forms (entropy: R*(y) = e^y); additive constants from specific conventions
are accounted for in the objectives that consume them.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class SeparableRegularizer:
    """Base: entrywise convex R with strength eps and reference cost c0."""

    eps: float
    c0: np.ndarray

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "c0", np.asarray(self.c0, dtype=float))

    # entrywise tables, overridden per kind
    def value(self, x):
        raise NotImplementedError

    def conjugate(self, y):
        raise NotImplementedError

    def conjugate_grad(self, y):
        raise NotImplementedError

    def derivative(self, x):
        raise NotImplementedError


@dataclass(frozen=True)
class Entropy(SeparableRegularizer):
    """R(x) = x(log x - 1) on x >= 0, with R(0) = 0; R*(y) = e^y.

    ``reference`` selects the convention used when recovering an adversarial
    cost from a plan: 'counting' uses c0 + eps*log(pi), 'product' measures the
    plan against mu (x) nu (the KL variant).
    """

    reference: str = "counting"

    def __post_init__(self):
        super().__post_init__()
        if self.reference not in ("counting", "product"):
            raise ValueError(f"unknown reference {self.reference!r}")

    def value(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            v = np.where(x > 0, x * (np.log(np.where(x > 0, x, 1.0)) - 1.0), 0.0)
        return v

    def conjugate(self, y):
        return np.exp(np.asarray(y, dtype=float))

    def conjugate_grad(self, y):
        return np.exp(np.asarray(y, dtype=float))

    def derivative(self, x):
        return np.log(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PowerP(SeparableRegularizer):
    """R(x) = (1/p) w x^p on x >= 0 (+inf below); R*(y) = (1/q) w^{1-q} y_+^q."""

    p: float = 2.0
    w: np.ndarray = field(default=None)

    def __post_init__(self):
        super().__post_init__()
        if self.p <= 1:
            raise ValueError("p must exceed 1")
        w = self.w
        if w is None:
            w = np.ones_like(self.c0)
        w = np.asarray(w, dtype=float) * np.ones_like(self.c0)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        total, size = w.sum(), w.size
        if abs(total - size) > 1e-12 * size:
            warnings.warn("rescaling weights to sum to n*m")
            w = w * (size / total)
        object.__setattr__(self, "w", w)

    @property
    def q(self) -> float:
        return self.p / (self.p - 1.0)

    def value(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x < -1e-12):
            raise ValueError("PowerP is +inf on negative entries")
        return (1.0 / self.p) * self.w * np.maximum(x, 0.0) ** self.p

    def conjugate(self, y):
        yp = np.maximum(np.asarray(y, dtype=float), 0.0)
        return (1.0 / self.q) * self.w ** (1.0 - self.q) * yp**self.q

    def conjugate_grad(self, y):
        yp = np.maximum(np.asarray(y, dtype=float), 0.0)
        return self.w ** (1.0 - self.q) * yp ** (self.q - 1.0)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        return self.w * np.maximum(x, 0.0) ** (self.p - 1.0)


@dataclass(frozen=True)
class MatrixNormRegularizer:
    """Matrix-level norm regularizer, penalty or constraint flavour.

    Penalty:    R(pi) = ||pi||_{w,p}      <-> ball  ||c - c0||_{1/w,q} <= eps
    Constraint: R(pi) = i(||pi||_{w,p}<=eps) <-> penalty eps*||c - c0||_{1/w,q}
    """

    mode: str
    p: float
    eps: float
    c0: np.ndarray
    w: np.ndarray = None

    def __post_init__(self):
        if self.mode not in ("penalty", "constraint"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if not (self.p >= 1):
            raise ValueError("p must be in [1, inf]")
        c0 = np.asarray(self.c0, dtype=float)
        w = self.w
        if w is None:
            w = np.ones_like(c0)
        w = np.asarray(w, dtype=float) * np.ones_like(c0)
        if np.any(w <= 0):
            raise ValueError("weights must be positive")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "w", w)

    @property
    def q(self) -> float:
        if self.p == 1:
            return np.inf
        if np.isinf(self.p):
            return 1.0
        return self.p / (self.p - 1.0)

    def norm(self, pi) -> float:
        pi = np.asarray(pi, dtype=float)
        if np.isinf(self.p):
            return float(np.max(self.w * np.abs(pi)))
        return float(np.sum(self.w * np.abs(pi) ** self.p) ** (1.0 / self.p))


@dataclass(frozen=True)
class LinearizedRegularizer:
    """R with its short-range branch replaced by the tangent at x_hat.

    thresholds = (R*)'(-c0/eps); below them the tangent (-c0/eps) x - R*(-c0/eps)
    applies, above them R itself. Continuous, and C^1 when R is.
    """

    base: SeparableRegularizer
    thresholds: np.ndarray
    intercepts: np.ndarray
    slopes: np.ndarray


def reg_eval(R: SeparableRegularizer, pi: np.ndarray) -> float:
    """Sum of R_ij(pi_ij) over all entries (0·log 0 = 0 for entropy)."""
    pi = np.asarray(pi, dtype=float)
    if pi.min() < -1e-12:
        raise ValueError(f"plan entry {pi.min():.3e} is negative")
    return float(np.sum(R.value(np.maximum(pi, 0.0))))


def reg_conjugate(R: SeparableRegularizer, y: np.ndarray) -> float:
    """Sum of the entrywise conjugates R*_ij(y_ij)."""
    return float(np.sum(R.conjugate(y)))


def reg_conjugate_grad(R: SeparableRegularizer, y: np.ndarray) -> np.ndarray:
    """Entrywise derivative of the conjugate, the plan-side map of R*."""
    return R.conjugate_grad(np.asarray(y, dtype=float))


def linearize(R: SeparableRegularizer) -> LinearizedRegularizer:
    """Tangent-extend R below x_hat = (R*)'(-c0/eps).

    The tangent has slope -c0/eps and intercept -R*(-c0/eps): the pieces meet
    with matching value and derivative at x_hat, which encodes the
    nonnegativity constraint on the adversarial cost.
    """
    y0 = -R.c0 / R.eps
    thresholds = R.conjugate_grad(y0)
    intercepts = -R.conjugate(y0)
    return LinearizedRegularizer(R, thresholds, intercepts, y0)


def linearized_eval(lin: LinearizedRegularizer, pi: np.ndarray) -> float:
    """Evaluate the linearized regularizer entrywise and sum."""
    pi = np.asarray(pi, dtype=float)
    tangent = lin.slopes * pi + lin.intercepts
    above = pi >= lin.thresholds
    vals = np.where(above, lin.base.value(np.maximum(pi, 0.0)), tangent)
    return float(np.sum(vals))
