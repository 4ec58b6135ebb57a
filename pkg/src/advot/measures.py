"""Discrete measures, cost matrices and couplings.

Histograms are probability vectors, point clouds carry support locations in
R^d together with a histogram of weights. Cost matrices, transport plans and
dual potentials are plain float64 numpy arrays; the helpers here validate
their contracts.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

MASS_TOL = 1e-12
MARGINAL_TOL = 1e-8
ZERO_ATOM = 1e-15


class ParseError(ValueError):
    """Malformed point-cloud file."""


@dataclass(frozen=True)
class Histogram:
    """Probability vector: nonnegative entries summing to one."""

    w: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise ValueError("histogram must be a nonempty vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("histogram entries must be finite")
        if np.any(w < 0):
            raise ValueError("histogram entries must be nonnegative")
        total = w.sum()
        if total <= 0:
            raise ValueError("histogram must have positive total mass")
        w = w / total
        object.__setattr__(self, "w", w)

    @classmethod
    def uniform(cls, n: int) -> "Histogram":
        return cls(np.full(n, 1.0 / n))

    @property
    def n(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class PointCloud:
    """Weighted point cloud: n support points in R^d plus a histogram."""

    points: np.ndarray
    weights: Histogram

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        if pts.shape[0] != self.weights.n:
            raise ValueError(
                f"{pts.shape[0]} points but {self.weights.n} weights"
            )
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, points: np.ndarray) -> "PointCloud":
        points = np.atleast_2d(np.asarray(points, dtype=float))
        return cls(points, Histogram.uniform(points.shape[0]))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def load_point_cloud(path, has_weights: bool | None = None) -> PointCloud:
    """Read a CSV point cloud: d coordinate columns, optional weight column.

    The header row is optional and detected by a non-numeric first row. When
    ``has_weights`` is None, a trailing column named ``weight`` in the header
    decides; without a header the file is assumed weightless. Weights are
    normalized to sum one; atoms below 1e-15 are dropped with a warning.
    """
    rows = []
    weight_col = has_weights
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    start = 0
    if lines:
        first = [tok.strip() for tok in lines[0].split(",")]
        try:
            [float(tok) for tok in first]
        except ValueError:
            start = 1
            if weight_col is None:
                weight_col = first[-1].strip().lower() == "weight"
    if weight_col is None:
        weight_col = False
    for lineno, line in enumerate(lines[start:], start=start + 1):
        if not line.strip():
            continue
        toks = [tok.strip() for tok in line.split(",")]
        try:
            vals = [float(tok) for tok in toks]
        except ValueError:
            raise ParseError(f"malformed row at line {lineno}")
        if not all(np.isfinite(vals)):
            raise ParseError(f"nonfinite value at line {lineno}")
        if weight_col and vals[-1] < 0:
            raise ParseError(f"negative weight at line {lineno}")
        rows.append(vals)
    if not rows:
        raise ParseError("empty point cloud file")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise ParseError("inconsistent number of columns")
    data = np.asarray(rows, dtype=float)
    if weight_col:
        pts, w = data[:, :-1], data[:, -1]
    else:
        pts, w = data, np.ones(data.shape[0])
    keep = w >= ZERO_ATOM
    if not np.all(keep):
        warnings.warn(f"dropped {int((~keep).sum())} zero-mass atoms")
        pts, w = pts[keep], w[keep]
    return PointCloud(pts, Histogram(w))


def save_point_cloud(path, cloud: PointCloud) -> None:
    """Write a point cloud as CSV with a trailing ``weight`` column."""
    header = ",".join(f"x{i}" for i in range(cloud.d)) + ",weight"
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row, w in zip(cloud.points, cloud.weights.w):
            fh.write(",".join(repr(float(v)) for v in row)
                     + f",{float(w)!r}\n")


def squared_euclidean_cost(X: PointCloud, Y: PointCloud) -> np.ndarray:
    """Pairwise squared Euclidean distances, c[i, j] = ||x_i - y_j||^2."""
    if X.d != Y.d:
        raise ValueError(f"dimension mismatch: {X.d} vs {Y.d}")
    diff = X.points[:, None, :] - Y.points[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def mahalanobis_cost(X: PointCloud, Y: PointCloud, omega: np.ndarray) -> np.ndarray:
    """Pairwise squared Mahalanobis distances (x - y)^T Omega (x - y)."""
    omega = np.asarray(omega, dtype=float)
    if X.d != Y.d:
        raise ValueError(f"dimension mismatch: {X.d} vs {Y.d}")
    if omega.shape != (X.d, X.d):
        raise ValueError(f"Omega must be {X.d}x{X.d}, got {omega.shape}")
    if np.abs(omega - omega.T).max() > 1e-10:
        raise ValueError("Omega must be symmetric")
    diff = X.points[:, None, :] - Y.points[None, :, :]
    c = np.einsum("ijk,kl,ijl->ij", diff, omega, diff)
    # PSD Omega gives nonnegative costs; scrub rounding noise
    return np.maximum(c, 0.0)


def check_marginals(pi: np.ndarray, mu: Histogram, nu: Histogram,
                    tol: float = MARGINAL_TOL) -> float:
    """Max marginal violation of a plan; raises when it exceeds tol."""
    pi = np.asarray(pi, dtype=float)
    res = max(
        np.abs(pi.sum(axis=1) - mu.w).max(),
        np.abs(pi.sum(axis=0) - nu.w).max(),
    )
    if res > tol:
        raise ValueError(f"marginal violation {res:.3e} exceeds {tol:.1e}")
    return res


def clip_plan(pi: np.ndarray) -> np.ndarray:
    """Clip tiny negative plan entries to zero; reject real negativity."""
    pi = np.asarray(pi, dtype=float)
    if pi.min() < -1e-15:
        low = pi.min()
        if low < -1e-8:
            raise ValueError(f"plan entry {low:.3e} is negative")
    return np.maximum(pi, 0.0)
