"""Projected (super)gradient ascent over adversarial ground costs.

The ascended objective is g(c) = OT_c(mu, nu) - eps * R*((c - c0)/eps); a
supergradient is pi_star - grad R*((c - c0)/eps). With an entropic inner
solver the objective is smooth and a constant step with Armijo backtracking
is used; with an exact inner solver a diminishing-step subgradient method
with iterate averaging is used. Norm-ball and norm-penalty variants cover
the matrix p-norm regularizers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from advot.entropic import sinkhorn
from advot.exact import DualPotentials, solve_exact
from advot.measures import Histogram
from advot.regularizers import (
    Entropy,
    PowerP,
    SeparableRegularizer,
    reg_conjugate,
    reg_conjugate_grad,
)


@dataclass(frozen=True)
class AscentConfig:
    lr0: float = 1.0
    schedule: str = "constant"  # constant | inv_sqrt
    maxiter: int = 5000
    inner: str = "entropic"  # entropic | exact
    eta: float | None = None  # entropic smoothing; default 1e-2*mean|c0|
    tol_grad: float | None = None  # default 1e-6*(1+mean|c0|)
    seed: int = 0
    sink_tol: float = 1e-10
    sink_maxiter: int = 5000

    def __post_init__(self):
        if self.lr0 <= 0:
            raise ValueError("lr0 must be positive")
        if self.maxiter < 1:
            raise ValueError("maxiter must be at least 1")
        if self.schedule not in ("constant", "inv_sqrt"):
            raise ValueError(f"unknown schedule {self.schedule!r}")
        if self.inner not in ("entropic", "exact"):
            raise ValueError(f"unknown inner solver {self.inner!r}")
        if self.inner == "entropic" and self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")


@dataclass
class AscentTrace:
    objectives: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def _inner_plan(c, mu, nu, inner, eta, warm, sink_tol, sink_maxiter):
    """Optimal plan (and value, potentials) of the inner OT problem."""
    if inner == "exact":
        sol = solve_exact(c, mu, nu)
        return sol.plan, sol.value, None
    sol = sinkhorn(c, mu, nu, eta, tol=sink_tol, maxiter=sink_maxiter,
                   potentials0=warm)
    return sol.plan, sol.value, sol.potentials


def danskin_subgradient(c, mu: Histogram, nu: Histogram,
                        R: SeparableRegularizer,
                        inner: str = "entropic",
                        eta: float | None = None) -> np.ndarray:
    """A supergradient of c -> OT_c - eps*R*((c-c0)/eps).

    With an exact inner solver the LP vertex fixes the chosen element of the
    superdifferential; the entropic inner plan is unique so the objective is
    differentiable there.
    """
    c = np.asarray(c, dtype=float)
    if not np.all(np.isfinite(c)):
        raise ValueError("cost entries must be finite")
    if eta is None:
        eta = 1e-2 * max(np.mean(np.abs(R.c0)), 1e-12)
    pi, _, _ = _inner_plan(c, mu, nu, inner, eta, None, 1e-12, 20000)
    return pi - reg_conjugate_grad(R, (c - R.c0) / R.eps)


def _objective(c, mu, nu, R, inner, eta, warm, sink_tol, sink_maxiter):
    pi, ot_val, pots = _inner_plan(c, mu, nu, inner, eta, warm, sink_tol,
                                   sink_maxiter)
    obj = ot_val - R.eps * reg_conjugate(R, (c - R.c0) / R.eps)
    return obj, pi, pots


def ascend_nonneg_cost(mu: Histogram, nu: Histogram, R: SeparableRegularizer,
                       cfg: AscentConfig = AscentConfig(),
                       c_init: np.ndarray | None = None):
    """Projected gradient ascent for sup_{c >= 0} OT_c - eps*R*((c-c0)/eps).

    Returns the final cost iterate and the ascent trace. The projection is
    entrywise max(., 0); with the entropic inner solver each accepted step is
    Armijo-backtracked so the smoothed objective trace is nondecreasing.
    c_init warm-starts the iterate (default max(c0, 0)), e.g. to continue a
    run at a smaller smoothing eta.
    """
    c0 = R.c0
    n, m = mu.n, nu.n
    if c0.shape != (n, m):
        raise ValueError(f"c0 is {c0.shape}, marginals need ({n}, {m})")
    eta = cfg.eta if cfg.eta is not None else 1e-2 * max(np.mean(np.abs(c0)), 1e-12)
    tol_grad = cfg.tol_grad
    if tol_grad is None:
        tol_grad = 1e-6 * (1.0 + np.mean(np.abs(c0)))
    if c_init is None:
        c = np.maximum(c0, 0.0)
    else:
        c = np.maximum(np.asarray(c_init, dtype=float), 0.0)
    trace = AscentTrace()
    warm = None
    lr = cfg.lr0
    obj, pi, warm = _objective(c, mu, nu, R, cfg.inner, eta, warm,
                               cfg.sink_tol, cfg.sink_maxiter)
    best_c, best_obj = c, obj
    avg_c, avg_count = np.zeros_like(c), 0
    pg_norm = np.inf
    for t in range(1, cfg.maxiter + 1):
        grad = pi - reg_conjugate_grad(R, (c - R.c0) / R.eps)
        if cfg.inner == "entropic" and cfg.schedule == "constant":
            # Armijo backtracking on the projected step
            lr = min(lr * 2.0, 1e6 * cfg.lr0)
            accepted = False
            for _ in range(40):
                c_new = np.maximum(c + lr * grad, 0.0)
                step = c_new - c
                pg_norm = np.abs(step).max() / lr
                if pg_norm <= tol_grad:
                    accepted = True
                    obj_new, pi_new, warm_new = obj, pi, warm
                    break
                obj_new, pi_new, warm_new = _objective(
                    c_new, mu, nu, R, cfg.inner, eta, warm,
                    cfg.sink_tol, cfg.sink_maxiter)
                if obj_new >= obj + 1e-4 * float(np.sum(grad * step)) - 1e-14:
                    accepted = True
                    break
                lr *= 0.5
            if not accepted:
                c_new, obj_new, pi_new, warm_new = c, obj, pi, warm
            step = c_new - c
        else:
            lr_t = cfg.lr0 / np.sqrt(t) if cfg.schedule == "inv_sqrt" else cfg.lr0
            c_new = np.maximum(c + lr_t * grad, 0.0)
            step = c_new - c
            pg_norm = np.abs(step).max() / max(lr_t, 1e-300)
            obj_new, pi_new, warm_new = _objective(
                c_new, mu, nu, R, cfg.inner, eta, warm,
                cfg.sink_tol, cfg.sink_maxiter)
            avg_c += c_new
            avg_count += 1
        c, obj, pi, warm = c_new, obj_new, pi_new, warm_new
        if obj > best_obj:
            best_obj, best_c = obj, c
        trace.objectives.append(obj)
        trace.step_norms.append(float(np.linalg.norm(step)))
        trace.iterations = t
        if pg_norm <= tol_grad:
            trace.converged = True
            break
    if cfg.inner == "exact" and avg_count > 0:
        # Polyak-Ruppert style: keep the best of final average and incumbent
        c_avg = avg_c / avg_count
        obj_avg, _, _ = _objective(c_avg, mu, nu, R, cfg.inner, eta, None,
                                   cfg.sink_tol, cfg.sink_maxiter)
        if obj_avg > best_obj:
            best_obj, best_c = obj_avg, c_avg
        c = best_c
    return c, trace


def adversarial_cost_from_plan(R: SeparableRegularizer, pi: np.ndarray,
                               mu: Histogram, nu: Histogram) -> np.ndarray:
    """Optimal adversarial cost c* = grad F(pi*) at a primal minimizer."""
    pi = np.asarray(pi, dtype=float)
    if isinstance(R, Entropy):
        if np.any(pi <= 0):
            raise ValueError("entropy gradient undefined at zero plan entries")
        if R.reference == "product":
            return R.c0 + R.eps * np.log(pi / np.outer(mu.w, nu.w))
        return R.c0 + R.eps * np.log(pi)
    if isinstance(R, PowerP):
        return R.c0 + R.eps * R.derivative(pi)
    raise ValueError(f"unsupported regularizer {type(R).__name__}")


def primal_from_cost(R: SeparableRegularizer, c: np.ndarray) -> np.ndarray:
    """Plan candidate pi = grad F*(c*); feasible only at the true optimum."""
    c = np.asarray(c, dtype=float)
    return reg_conjugate_grad(R, (c - R.c0) / R.eps)


def _project_weighted_ball(delta: np.ndarray, w: np.ndarray, q: float,
                           radius: float) -> np.ndarray:
    """Map delta into {||delta||_{1/w,q} <= radius}.

    q=2 rescales radially, q=inf clips, q=1 soft-thresholds with a bisected
    shift (weighted L1 ball projection).
    """
    if np.isinf(q):
        bound = radius * w
        return np.clip(delta, -bound, bound)
    if q == 2:
        norm = np.sqrt(np.sum(delta**2 / w))
        if norm <= radius:
            return delta
        return delta * (radius / norm)
    if q == 1:
        a = 1.0 / w
        if np.sum(a * np.abs(delta)) <= radius:
            return delta
        # soft threshold |x| = max(|delta| - theta*a, 0); find theta by bisection
        lo, hi = 0.0, float(np.max(np.abs(delta) / a)) + 1.0

        def total(theta):
            return np.sum(a * np.maximum(np.abs(delta) - theta * a, 0.0))

        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if total(mid) > radius:
                lo = mid
            else:
                hi = mid
        theta = 0.5 * (lo + hi)
        return np.sign(delta) * np.maximum(np.abs(delta) - theta * a, 0.0)
    raise ValueError(f"unsupported q={q}")


def _norm_subgrad(delta: np.ndarray, w: np.ndarray, q: float) -> np.ndarray:
    """A subgradient of ||.||_{1/w,q} at delta."""
    if q == 1:
        return np.sign(delta) / w
    if q == 2:
        norm = np.sqrt(np.sum(delta**2 / w))
        if norm < 1e-300:
            return np.zeros_like(delta)
        return delta / (w * norm)
    if np.isinf(q):
        vals = np.abs(delta) / w
        g = np.zeros_like(delta)
        idx = np.unravel_index(np.argmax(vals), vals.shape)
        g[idx] = np.sign(delta[idx]) / w[idx]
        return g
    raise ValueError(f"unsupported q={q}")


def norm_adversarial_ascent(mu: Histogram, nu: Histogram, c0: np.ndarray,
                            eps: float, p: float, w=None, mode: str = "ball",
                            cfg: AscentConfig = AscentConfig()):
    """Adversarial ascent for the matrix p-norm regularizers.

    ball mode:    sup { OT_c : ||c - c0||_{1/w,q} <= eps }
    penalty mode: sup_c OT_c - eps*||c - c0||_{1/w,q}
    with q conjugate to p in {1, 2, inf}.
    """
    c0 = np.asarray(c0, dtype=float)
    if p not in (1, 2) and not np.isinf(p):
        raise ValueError("p must be in {1, 2, inf}")
    if mode not in ("ball", "penalty"):
        raise ValueError(f"unknown mode {mode!r}")
    q = np.inf if p == 1 else (2.0 if p == 2 else 1.0)
    if w is None:
        w = np.ones_like(c0)
    w = np.asarray(w, dtype=float) * np.ones_like(c0)
    eta = cfg.eta if cfg.eta is not None else 1e-2 * max(np.mean(np.abs(c0)), 1e-12)

    def project(c):
        if mode == "ball":
            return c0 + _project_weighted_ball(c - c0, w, q, eps)
        return c

    def objective(c, warm):
        pi, ot_val, pots = _inner_plan(c, mu, nu, cfg.inner, eta, warm,
                                       cfg.sink_tol, cfg.sink_maxiter)
        obj = ot_val
        if mode == "penalty":
            delta = c - c0
            if q == 1:
                obj -= eps * float(np.sum(np.abs(delta) / w))
            elif q == 2:
                obj -= eps * float(np.sqrt(np.sum(delta**2 / w)))
            else:
                obj -= eps * float(np.max(np.abs(delta) / w))
        return obj, pi, pots

    c = project(c0.copy())
    trace = AscentTrace()
    warm = None
    obj, pi, warm = objective(c, warm)
    best_c, best_obj = c.copy(), obj
    for t in range(1, cfg.maxiter + 1):
        grad = pi.copy()
        if mode == "penalty":
            grad -= eps * _norm_subgrad(c - c0, w, q)
        lr_t = cfg.lr0 / np.sqrt(t) if cfg.schedule == "inv_sqrt" else cfg.lr0
        c_new = project(c + lr_t * grad)
        step = c_new - c
        obj, pi, warm = objective(c_new, warm)
        c = c_new
        if obj > best_obj:
            best_obj, best_c = obj, c.copy()
        trace.objectives.append(obj)
        trace.step_norms.append(float(np.linalg.norm(step)))
        trace.iterations = t
        if np.abs(step).max() / max(lr_t, 1e-300) <= (
                cfg.tol_grad or 1e-6 * (1.0 + np.mean(np.abs(c0)))):
            trace.converged = True
            break
    return best_c, trace
