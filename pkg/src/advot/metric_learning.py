"""Color-space metric learning, palette OT and embedding pipelines.

Covers palette quantization by k-means, stochastic learning of a separating
Mahalanobis matrix between two groups of measures, barycentric-projection
color transfer and classical MDS embedding of composite cost matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from advot.entropic import sinkhorn
from advot.exact import solve_exact
from advot.measures import (
    Histogram,
    PointCloud,
    mahalanobis_cost,
    squared_euclidean_cost,
)
from advot.srw import TsrwConfig, displacement_second_moment, project_Rk


@dataclass(frozen=True)
class GroupedMeasures:
    groupA: list
    groupB: list

    def __post_init__(self):
        if not self.groupA or not self.groupB:
            raise ValueError("both groups must be nonempty")
        d = self.groupA[0].d
        for cloud in list(self.groupA) + list(self.groupB):
            if cloud.d != d:
                raise ValueError("all measures must share the dimension")

    @property
    def d(self) -> int:
        return self.groupA[0].d


@dataclass
class OmegaLearnResult:
    omega: np.ndarray
    converged: bool
    trace: list = field(default_factory=list, repr=False)


def kmeans_palette(pixels: np.ndarray, K: int, seed: int = 0) -> PointCloud:
    """Quantize colors into at most K weighted centroids in [0,1]^3.

    When there are at most K distinct colors the palette is exact: the
    distinct colors with their frequencies. Otherwise k-means++ / Lloyd runs
    on the distinct colors weighted by their pixel counts.
    """
    pixels = np.asarray(pixels, dtype=float).reshape(-1, 3)
    if pixels.shape[0] < 1:
        raise ValueError("empty pixel set")
    if K < 1:
        raise ValueError("K must be at least 1")
    if pixels.min() < -1e-12 or pixels.max() > 1 + 1e-12:
        raise ValueError("pixel values must lie in [0,1]")
    colors, counts = np.unique(pixels, axis=0, return_counts=True)
    if colors.shape[0] <= K:
        return PointCloud(colors, Histogram(counts.astype(float)))
    km = KMeans(n_clusters=K, init="k-means++", n_init=1, max_iter=50,
                tol=1e-6, random_state=seed)
    labels = km.fit_predict(colors, sample_weight=counts.astype(float))
    weights = np.bincount(labels, weights=counts, minlength=K)
    keep = weights > 0
    centroids = np.clip(km.cluster_centers_[keep], 0.0, 1.0)
    return PointCloud(centroids, Histogram(weights[keep]))


def learn_separating_omega(groups: GroupedMeasures, k: int,
                           cfg: TsrwConfig | None = None) -> OmegaLearnResult:
    """Projected stochastic supergradient ascent maximizing the summed
    cross-group OT values under d^2_Omega over the trace-k feasible set.

    One pair is sampled per step; the iterates of the last half are averaged
    (Polyak-Ruppert) and projected back before returning.
    """
    d = groups.d
    if not 1 <= k <= d:
        raise ValueError(f"k={k} outside [1, {d}]")
    if cfg is None:
        cfg = TsrwConfig(k=k)
    rng = np.random.default_rng(cfg.seed)
    omega = (k / d) * np.eye(d)
    nA, nB = len(groups.groupA), len(groups.groupB)
    # fixed validation pairs for the convergence check
    val_pairs = [(i % nA, (i * 7 + 3) % nB) for i in range(min(4, nA * nB))]

    def pair_value(omega_, i, j):
        X, Y = groups.groupA[i], groups.groupB[j]
        c = mahalanobis_cost(X, Y, omega_)
        eps = cfg.inner_eps if cfg.inner_eps is not None else 1e-2 * max(
            float(np.mean(c)), 1e-12)
        if eps > 0:
            sol = sinkhorn(c, X.weights, Y.weights, eps, tol=1e-9,
                           maxiter=2000)
            return float(np.sum(c * sol.plan))
        return solve_exact(c, X.weights, Y.weights).value

    avg = np.zeros((d, d))
    avg_count = 0
    trace = []
    eval_every = max(1, cfg.maxiter // 20)
    for it in range(1, cfg.maxiter + 1):
        i = int(rng.integers(0, nA))
        j = int(rng.integers(0, nB))
        X, Y = groups.groupA[i], groups.groupB[j]
        c = mahalanobis_cost(X, Y, omega)
        eps = cfg.inner_eps if cfg.inner_eps is not None else 1e-2 * max(
            float(np.mean(c)), 1e-12)
        if eps > 0:
            plan = sinkhorn(c, X.weights, Y.weights, eps, tol=1e-9,
                            maxiter=2000).plan
        else:
            plan = solve_exact(c, X.weights, Y.weights).plan
        grad = displacement_second_moment(X, Y, plan)
        lr_t = cfg.lr / (1.0 + it / 100.0)
        omega = project_Rk(omega + lr_t * grad, k)
        if it > cfg.maxiter // 2:
            avg += omega
            avg_count += 1
        if it % eval_every == 0:
            trace.append(sum(pair_value(omega, i, j) for i, j in val_pairs))
    final = project_Rk(avg / max(avg_count, 1), k)
    converged = (
        len(trace) >= 3
        and trace[-1] - trace[-3] <= 1e-3 * (1.0 + abs(trace[-1]))
    )
    return OmegaLearnResult(omega=final, converged=converged, trace=trace)


def barycentric_projection(X: PointCloud, Y: PointCloud,
                           pi: np.ndarray) -> np.ndarray:
    """Row k of the output is sum_l (pi_kl / a_k) y_l."""
    pi = np.asarray(pi, dtype=float)
    a = X.weights.w
    if np.any(a <= 1e-15):
        raise ValueError("source palette has zero-mass atoms")
    if np.abs(pi.sum(axis=1) - a).max() > 1e-6:
        raise ValueError("plan row sums do not match source weights")
    return (pi @ Y.points) / a[:, None]


def color_transfer(source_img: np.ndarray, target_img: np.ndarray,
                   omega: np.ndarray | None = None, K: int = 1000,
                   seed: int = 0, inner_eps: float = 0.01) -> np.ndarray:
    """Recolor the source image with the target palette through OT.

    Both images are quantized to palettes; an OT plan between them under the
    squared Euclidean cost (or d^2_omega when omega is given) sends each
    source centroid to its barycentric projection; pixels follow their
    centroids. inner_eps > 0 uses entropic OT, 0 the exact solver.
    """
    src = np.asarray(source_img, dtype=float)
    tgt = np.asarray(target_img, dtype=float)
    if src.ndim != 3 or src.shape[2] != 3 or tgt.ndim != 3 or tgt.shape[2] != 3:
        raise ValueError("images must be HxWx3 arrays")
    src_pal = kmeans_palette(src.reshape(-1, 3), K, seed=seed)
    tgt_pal = kmeans_palette(tgt.reshape(-1, 3), K, seed=seed + 1)
    if omega is None:
        cost = squared_euclidean_cost(src_pal, tgt_pal)
    else:
        cost = mahalanobis_cost(src_pal, tgt_pal, omega)
    if inner_eps > 0:
        plan = sinkhorn(cost, src_pal.weights, tgt_pal.weights, inner_eps,
                        tol=1e-10, maxiter=10000).plan
    else:
        plan = solve_exact(cost, src_pal.weights, tgt_pal.weights).plan
    projected = barycentric_projection(src_pal, tgt_pal, plan)
    # send each pixel to the image of its nearest centroid
    flat = src.reshape(-1, 3)
    d2 = (
        np.sum(flat**2, axis=1)[:, None]
        - 2.0 * flat @ src_pal.points.T
        + np.sum(src_pal.points**2, axis=1)[None, :]
    )
    labels = np.argmin(d2, axis=1)
    out = projected[labels].reshape(src.shape)
    return np.clip(out, 0.0, 1.0)


def mds_embed(costs: np.ndarray, dims: int = 2) -> np.ndarray:
    """Classical MDS of a symmetric squared-dissimilarity matrix.

    Double-centers -0.5*J*D*J, keeps the top eigenpairs with eigenvalues
    clipped at zero, and returns the coordinates (descending eigenvalue
    order).
    """
    D = np.asarray(costs, dtype=float)
    n = D.shape[0]
    if D.shape != (n, n):
        raise ValueError("cost matrix must be square")
    if np.abs(D - D.T).max() > 1e-8:
        raise ValueError("cost matrix must be symmetric")
    J = np.eye(n) - np.ones((n, n)) / n
    B = -0.5 * J @ D @ J
    B = 0.5 * (B + B.T)
    lam, U = np.linalg.eigh(B)
    order = np.argsort(lam)[::-1][:dims]
    lam_top = np.maximum(lam[order], 0.0)
    return U[:, order] * np.sqrt(lam_top)[None, :]
