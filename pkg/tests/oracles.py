"""Independent reference implementations used by the test suite.

Everything here is deliberately naive (brute force, finite differences,
Frank-Wolfe over the transportation polytope, generic LPs) and shares no
code path with the library's solvers beyond the LP used as a linear
minimization oracle.
"""

import itertools

import numpy as np
from scipy.optimize import linprog, minimize_scalar

from advot import Histogram, solve_exact


def permutation_min(c):
    """Brute-force min over permutation matrices, scaled to uniform marginals."""
    c = np.asarray(c, dtype=float)
    n = c.shape[0]
    best = np.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(c[i, perm[i]] for i in range(n)) / n)
    return best


def fd_gradient(f, x, h=1e-6):
    """Central finite-difference gradient of a scalar function of an array."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    it = np.nditer(x, flags=["multi_index"])
    while not it.finished:
        idx = it.multi_index
        xp = x.copy(); xp[idx] += h
        xm = x.copy(); xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
        it.iternext()
    return g


def frank_wolfe_plan(grad_fn, obj_fn, mu, nu, maxiter=20000, gap_tol=1e-6,
                     line_search=None):
    """Minimize a convex objective over Pi(mu, nu) by Frank-Wolfe.

    grad_fn(pi) -> gradient matrix; obj_fn(pi) -> scalar. The linear
    minimization oracle is an exact OT solve. line_search(pi, v) may return
    the optimal step in [0, 1]; default is a bounded scalar minimization.
    Returns (plan, objective, certified duality gap).
    """
    pi = np.outer(mu.w, nu.w)
    gap = np.inf
    for _ in range(maxiter):
        g = grad_fn(pi)
        v = solve_exact(g, Histogram(mu.w), Histogram(nu.w)).plan
        gap = float(np.sum(g * (pi - v)))
        if gap <= gap_tol:
            break
        d = v - pi
        if line_search is not None:
            t = line_search(pi, v)
        else:
            t = minimize_scalar(lambda s: obj_fn(pi + s * d), bounds=(0.0, 1.0),
                                method="bounded",
                                options={"xatol": 1e-12}).x
        t = min(max(t, 0.0), 1.0)
        if t <= 0.0:
            break
        pi = pi + t * d
    return pi, obj_fn(pi), gap


def linearized_entropy_primal(c0, eps, mu, nu, gap_tol=None, maxiter=20000):
    """Oracle for min over Pi of <c0, pi> + eps * sum R_hat(pi_ij), entropy.

    R_hat is x(log x - 1) above x_hat = exp(-c0/eps) and its tangent below,
    so the entrywise gradient is max(c0 + eps*log pi, 0).
    """
    c0 = np.asarray(c0, dtype=float)
    xhat = np.exp(-c0 / eps)

    def rhat(pi):
        hi = pi >= xhat
        out = np.where(hi, pi * (np.log(np.maximum(pi, 1e-300)) - 1.0),
                       -c0 / eps * pi - xhat)
        return out

    def obj(pi):
        return float(np.sum(c0 * pi) + eps * np.sum(rhat(pi)))

    def grad(pi):
        return np.maximum(c0 + eps * np.log(np.maximum(pi, 1e-300)), 0.0)

    if gap_tol is None:
        ref = abs(obj(np.outer(mu.w, nu.w)))
        gap_tol = 1e-5 * (1.0 + ref)
    return frank_wolfe_plan(grad, obj, mu, nu, maxiter=maxiter,
                            gap_tol=gap_tol)


def quadratic_primal(c0, eps, mu, nu, gap_tol=None, maxiter=20000):
    """Oracle for min over Pi of <c0, pi> + (eps/2) * sum pi^2.

    Frank-Wolfe with the closed-form exact line search of a quadratic.
    """
    c0 = np.asarray(c0, dtype=float)

    def obj(pi):
        return float(np.sum(c0 * pi) + 0.5 * eps * np.sum(pi**2))

    def grad(pi):
        return c0 + eps * pi

    def line(pi, v):
        d = v - pi
        denom = eps * np.sum(d**2)
        if denom <= 0:
            return 1.0
        return float(-np.sum((c0 + eps * pi) * d) / denom)

    if gap_tol is None:
        ref = abs(obj(np.outer(mu.w, nu.w)))
        gap_tol = 1e-6 * (1.0 + ref)
    return frank_wolfe_plan(grad, obj, mu, nu, maxiter=maxiter,
                            gap_tol=gap_tol, line_search=line)


def capped_simplex_qp(s, k):
    """Active-set solve of max <s, x> - penalty-free projection relative.

    Projection of eigenvalue scores onto {0 <= x <= 1, sum x = k} in the
    Euclidean sense, solved by enumerating the clamp pattern through the
    sorted breakpoints of theta -> sum clip(s - theta, 0, 1).
    """
    s = np.asarray(s, dtype=float)
    d = s.size
    if k >= d:
        return np.ones(d)
    # breakpoints where entries enter/leave the clamped ranges
    cand = np.concatenate([s, s - 1.0])
    lo, hi = cand.min() - 1.0, cand.max() + 1.0
    for _ in range(200):
        theta = 0.5 * (lo + hi)
        total = np.clip(s - theta, 0.0, 1.0).sum()
        if total > k:
            lo = theta
        else:
            hi = theta
    return np.clip(s - 0.5 * (lo + hi), 0.0, 1.0)


def box_constrained_ot(c0, mu, nu, cap):
    """LP oracle: min <c0, pi> over Pi(mu, nu) with 0 <= pi_ij <= cap_ij."""
    c0 = np.asarray(c0, dtype=float)
    n, m = c0.shape
    A = []
    b = []
    for i in range(n):
        row = np.zeros((n, m)); row[i, :] = 1.0
        A.append(row.ravel()); b.append(mu.w[i])
    for j in range(m):
        col = np.zeros((n, m)); col[:, j] = 1.0
        A.append(col.ravel()); b.append(nu.w[j])
    cap = np.broadcast_to(np.asarray(cap, dtype=float), (n, m))
    bounds = [(0.0, cap.ravel()[k]) for k in range(n * m)]
    res = linprog(c0.ravel(), A_eq=np.array(A), b_eq=np.array(b),
                  bounds=bounds, method="highs")
    if not res.success:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return res.x.reshape(n, m), float(res.fun)


def norm_penalty_primal(c0, eps, mu, nu, w, p):
    """LP/QP oracle: min <c0, pi> + eps * ||pi||_{w,p} over Pi(mu, nu).

    p=1 is a plain LP (weighted linear term since pi >= 0); p=inf introduces
    an auxiliary bound variable t with pi_ij <= w_ij * t; p=2 falls back to
    Frank-Wolfe with numerical line search on the smooth-away-from-0 norm.
    """
    c0 = np.asarray(c0, dtype=float)
    n, m = c0.shape
    w = np.broadcast_to(np.asarray(w, dtype=float), (n, m))
    if p == 1:
        obj = (c0 + eps / w).ravel()
        plan, val = _marginal_lp(obj, mu, nu)
        return plan, val
    if np.isinf(p):
        # variables: pi (n*m), t; minimize <c0,pi> + eps*t
        nm = n * m
        cvec = np.concatenate([c0.ravel(), [eps]])
        A_eq = np.zeros((n + m, nm + 1))
        b_eq = np.concatenate([mu.w, nu.w])
        for i in range(n):
            A_eq[i, i * m:(i + 1) * m] = 1.0
        for j in range(m):
            A_eq[n + j, j::m] = 1.0
        A_ub = np.zeros((nm, nm + 1))
        A_ub[:, :nm] = np.eye(nm)
        A_ub[:, nm] = -w.ravel()
        res = linprog(cvec, A_eq=A_eq, b_eq=b_eq, A_ub=A_ub,
                      b_ub=np.zeros(nm), method="highs")
        if not res.success:
            raise RuntimeError(f"LP oracle failed: {res.message}")
        return res.x[:nm].reshape(n, m), float(res.fun)
    if p == 2:
        def obj(pi):
            return float(np.sum(c0 * pi)
                         + eps * np.sqrt(np.sum(pi**2 / w)))

        def grad(pi):
            norm = np.sqrt(np.sum(pi**2 / w))
            return c0 + eps * pi / (w * max(norm, 1e-300))

        ref = abs(obj(np.outer(mu.w, nu.w)))
        return frank_wolfe_plan(grad, obj, mu, nu, maxiter=50000,
                                gap_tol=1e-6 * (1.0 + ref))[:2]
    raise ValueError(f"unsupported p={p}")


def _marginal_lp(obj_vec, mu, nu):
    n, m = mu.n, nu.n
    A = np.zeros((n + m, n * m))
    for i in range(n):
        A[i, i * m:(i + 1) * m] = 1.0
    for j in range(m):
        A[n + j, j::m] = 1.0
    res = linprog(obj_vec, A_eq=A, b_eq=np.concatenate([mu.w, nu.w]),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise RuntimeError(f"LP oracle failed: {res.message}")
    return res.x.reshape(n, m), float(res.fun)
