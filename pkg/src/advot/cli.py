"""Command-line entry point wiring the solvers into reproducible runs.

Every command echoes its resolved configuration into a flat key-value
report, writes delimited CSV outputs, and (where a figure makes sense)
renders a matplotlib PNG next to them. Config precedence is CLI flag over
config-file entry over built-in default.

Exit codes: 0 success, 1 numerical non-convergence (outputs still written),
2 usage or contract error.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from advot.adversarial import AscentConfig, ascend_nonneg_cost
from advot.entropic import sinkhorn
from advot.exact import solve_exact
from advot.measures import (
    Histogram,
    ParseError,
    PointCloud,
    load_point_cloud,
    save_point_cloud,
    squared_euclidean_cost,
    mahalanobis_cost,
)
from advot.metric_learning import color_transfer, mds_embed
from advot.regularizers import Entropy, linearize, linearized_eval, reg_conjugate
from advot.reporting import (
    RunReport,
    render_embed_figure,
    render_eta_figure,
    render_sweep_figure,
    write_csv,
)
from advot.srw import TsrwConfig, srw, tsrw


class UsageError(Exception):
    """Contract violation reported with exit code 2."""


def gen_gaussian_cloud(rng: np.random.Generator, n: int, d: int,
                       shift: float = 0.0) -> PointCloud:
    """Uniform measure on n Gaussian samples with Wishart(d) covariance."""
    W = rng.standard_normal((d, d))
    sigma = W @ W.T / d
    L = np.linalg.cholesky(sigma + 1e-12 * np.eye(d))
    pts = rng.standard_normal((n, d)) @ L.T + shift
    return PointCloud.uniform(pts)


def _load_config(path) -> dict:
    config = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"bad config line: {line!r}")
            key, val = (tok.strip() for tok in line.split("=", 1))
            config[key.replace("-", "_")] = val
    return config


def _resolve(args, config: dict, defaults: dict) -> dict:
    """CLI flag > config file entry > built-in default."""
    resolved = {}
    for key, default in defaults.items():
        cli_val = getattr(args, key, None)
        if cli_val is not None:
            resolved[key] = cli_val
        elif key in config:
            raw = config[key]
            if isinstance(default, bool):
                resolved[key] = raw.lower() in ("1", "true", "yes")
            elif isinstance(default, int):
                resolved[key] = int(raw)
            elif isinstance(default, float):
                resolved[key] = float(raw)
            else:
                resolved[key] = raw
        else:
            resolved[key] = default
    return resolved


def _load_cloud(path) -> PointCloud:
    try:
        return load_point_cloud(path)
    except (OSError, ParseError) as exc:
        raise UsageError(f"cannot load point cloud {path}: {exc}")


def _load_matrix(path) -> np.ndarray:
    try:
        return np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load matrix {path}: {exc}")


# ---------------------------------------------------------------- commands


def cmd_gen_clouds(args) -> int:
    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(n=30, d=2, seed=0, shift=0.0))
    rng = np.random.default_rng(cfg["seed"])
    cloud = gen_gaussian_cloud(rng, cfg["n"], cfg["d"], cfg["shift"])
    save_point_cloud(args.out, cloud)
    report = RunReport("gen-clouds")
    report.add_config(cfg)
    report.add("out_cloud", args.out)
    report.add("n", cloud.n)
    report.add("d", cloud.d)
    if args.report:
        report.write(args.report)
    return 0


def cmd_exact(args) -> int:
    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(cost="sqeuclid", seed=0))
    mu = _load_cloud(args.mu)
    nu = _load_cloud(args.nu)
    if cfg["cost"] == "sqeuclid":
        c = squared_euclidean_cost(mu, nu)
    elif cfg["cost"] == "file":
        if not args.cost_file:
            raise UsageError("--cost file requires --cost-file")
        c = _load_matrix(args.cost_file)
        if c.shape != (mu.n, nu.n):
            raise UsageError(
                f"cost matrix is {c.shape[0]}x{c.shape[1]}, "
                f"need {mu.n}x{nu.n}")
    else:
        raise UsageError(f"unknown cost {cfg['cost']!r}")
    t0 = time.perf_counter()
    sol = solve_exact(c, mu.weights, nu.weights)
    wall = time.perf_counter() - t0
    report = RunReport("exact")
    report.add_config(cfg)
    report.add("value", sol.value)
    dual_val = sol.potentials.phi @ mu.weights.w + sol.potentials.psi @ nu.weights.w
    report.add("dual_value", float(dual_val))
    report.add("duality_gap", float(abs(sol.value - dual_val)))
    report.add("plan_nonzeros", int((sol.plan > 1e-12).sum()))
    if args.out_plan:
        write_csv(args.out_plan, [f"c{j}" for j in range(nu.n)],
                  [list(row) for row in sol.plan])
        report.add("out_plan", args.out_plan)
    if args.report:
        report.write(args.report)
    print(f"value = {sol.value:.12g}  wall_time_s = {wall:.3f}")
    return 0


def cmd_eps_sweep(args) -> int:
    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(
        n=30, d=10, instances=20, seed=0,
        eps_grid="0.001,0.01,0.1,1,10", lr=1.0, maxiter=150,
        eta_rel=0.1, plot=True))
    try:
        grid = sorted(float(tok) for tok in str(cfg["eps_grid"]).split(","))
    except ValueError:
        raise UsageError(f"bad eps grid {cfg['eps_grid']!r}")
    if not grid:
        raise UsageError("eps grid must be nonempty")
    rng = np.random.default_rng(cfg["seed"])
    t0 = time.perf_counter()
    rows = []
    all_converged = True
    for inst in range(cfg["instances"]):
        mu = gen_gaussian_cloud(rng, cfg["n"], cfg["d"])
        nu = gen_gaussian_cloud(rng, cfg["n"], cfg["d"])
        c0 = squared_euclidean_cost(mu, nu)
        scale = float(np.mean(c0))
        exact_w = solve_exact(c0, mu.weights, nu.weights).value
        for eps_rel in grid:
            eps = eps_rel * scale
            R = Entropy(eps=eps, c0=c0)
            acfg = AscentConfig(lr0=cfg["lr"] * eps, maxiter=cfg["maxiter"],
                                inner="entropic",
                                eta=cfg["eta_rel"] * scale, seed=cfg["seed"],
                                sink_tol=1e-8,
                                tol_grad=1e-4 * (1.0 + scale))
            c_star, trace = ascend_nonneg_cost(mu.weights, nu.weights, R, acfg)
            all_converged &= trace.converged
            ot_adv = solve_exact(c_star, mu.weights, nu.weights)
            adv_obj = ot_adv.value - eps * reg_conjugate(R, (c_star - c0) / eps)
            sink = sinkhorn(c0, mu.weights, nu.weights, eps,
                            tol=1e-10, maxiter=20000)
            lin = linearize(R)
            primal_ub = float(np.sum(c0 * ot_adv.plan)) + eps * linearized_eval(
                lin, ot_adv.plan)
            rows.append(dict(
                instance=inst, eps=eps, eps_rel=eps_rel,
                ot_adversarial=ot_adv.value, sinkhorn=sink.value,
                linearized_value=adv_obj, exact_w=exact_w,
                weak_duality_slack=primal_ub - adv_obj,
                ascent_converged=trace.converged,
            ))
    wall = time.perf_counter() - t0
    rows.sort(key=lambda r: (r["eps"], r["instance"]))
    header = ["eps", "eps_rel", "instance", "ot_adversarial", "sinkhorn",
              "linearized_value", "exact_w", "weak_duality_slack",
              "ascent_converged"]
    write_csv(args.out_csv, header, [[r[k] for k in header] for r in rows])
    report = RunReport("eps-sweep")
    report.add_config(cfg)
    report.add("out_csv", args.out_csv)
    for eps_rel in grid:
        sub = [r for r in rows if r["eps_rel"] == eps_rel]
        gap = float(np.mean([abs(r["ot_adversarial"] - r["exact_w"])
                             for r in sub]))
        report.add(f"mean_gap_eps_rel_{eps_rel:g}", gap)
        report.add(f"mean_ot_adv_eps_rel_{eps_rel:g}",
                   float(np.mean([r["ot_adversarial"] for r in sub])))
    report.add("mean_exact_w", float(np.mean([r["exact_w"] for r in rows])))
    report.add("all_converged", all_converged)
    if cfg["plot"]:
        fig_path = str(args.out_csv) + ".png"
        render_sweep_figure(rows, fig_path)
        report.add("out_figure", fig_path)
    if args.report:
        report.write(args.report)
    print(f"wall_time_s = {wall:.3f}")
    return 0 if all_converged else 1


def cmd_tsrw(args) -> int:
    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(
        k=1, eta_grid="0", lr=0.1, maxiter=300, inner_eps=-1.0,
        seed=0, plot=True))
    clouds = [_load_cloud(p) for p in args.clouds]
    if len(clouds) < 2:
        raise UsageError("need at least two clouds")
    try:
        etas = [float(tok) for tok in str(cfg["eta_grid"]).split(",")]
    except ValueError:
        raise UsageError(f"bad eta grid {cfg['eta_grid']!r}")
    inner_eps = None if cfg["inner_eps"] < 0 else cfg["inner_eps"]
    t0 = time.perf_counter()
    srw_sum = 0.0
    for t in range(len(clouds) - 1):
        scfg = TsrwConfig(k=cfg["k"], lr=cfg["lr"], maxiter=cfg["maxiter"],
                          inner_eps=inner_eps, seed=cfg["seed"])
        srw_sum += srw(clouds[t], clouds[t + 1], cfg["k"], scfg).value
    rows = []
    all_converged = True
    for eta in etas:
        tcfg = TsrwConfig(k=cfg["k"], eta=eta, lr=cfg["lr"],
                          maxiter=cfg["maxiter"], inner_eps=inner_eps,
                          seed=cfg["seed"])
        res = tsrw(clouds, tcfg)
        all_converged &= res.converged
        rows.append([eta, res.value, srw_sum, res.converged])
    wall = time.perf_counter() - t0
    write_csv(args.out_csv, ["eta", "tsrw_value", "srw_sum", "converged"],
              rows)
    report = RunReport("tsrw")
    report.add_config(cfg)
    report.add("num_clouds", len(clouds))
    report.add("out_csv", args.out_csv)
    report.add("srw_sum", srw_sum)
    for row in rows:
        report.add(f"tsrw_value_eta_{row[0]:g}", row[1])
    report.add("all_converged", all_converged)
    if cfg["plot"]:
        fig_path = str(args.out_csv) + ".png"
        render_eta_figure([r[0] for r in rows], [r[1] for r in rows], fig_path)
        report.add("out_figure", fig_path)
    if args.report:
        report.write(args.report)
    print(f"wall_time_s = {wall:.3f}")
    return 0 if all_converged else 1


def cmd_color_transfer(args) -> int:
    from PIL import Image

    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(
        metric="euclid", K=1000, inner_eps=0.01, seed=0))
    if cfg["metric"] not in ("euclid", "learned"):
        raise UsageError(f"unknown metric {cfg['metric']!r}")
    omega = None
    if cfg["metric"] == "learned":
        if not args.omega_file:
            raise UsageError("--metric learned requires --omega-file")
        omega = _load_matrix(args.omega_file)
    try:
        src = np.asarray(Image.open(args.source).convert("RGB"), dtype=float) / 255.0
        tgt = np.asarray(Image.open(args.target).convert("RGB"), dtype=float) / 255.0
    except OSError as exc:
        raise UsageError(f"cannot decode image: {exc}")
    t0 = time.perf_counter()
    out = color_transfer(src, tgt, omega=omega, K=cfg["K"], seed=cfg["seed"],
                         inner_eps=cfg["inner_eps"])
    wall = time.perf_counter() - t0
    img = Image.fromarray(np.round(out * 255.0).astype(np.uint8))
    img.save(args.out)
    report = RunReport("color-transfer")
    report.add_config(cfg)
    report.add("out_image", args.out)
    report.add("source_shape", "x".join(str(s) for s in src.shape))
    if args.report:
        report.write(args.report)
    print(f"wall_time_s = {wall:.3f}")
    return 0


def cmd_embed(args) -> int:
    config = _load_config(args.config) if args.config else {}
    cfg = _resolve(args, config, dict(
        epsilon=0.1, relative_eps=True, dims=2, lr=1.0, maxiter=150,
        eta_rel=0.1, seed=0, plot=True))
    mu = _load_cloud(args.mu)
    nu = _load_cloud(args.nu)
    if mu.d != nu.d:
        raise UsageError(f"dimension mismatch: {mu.d} vs {nu.d}")
    t0 = time.perf_counter()
    cross = squared_euclidean_cost(mu, nu)
    scale = float(np.mean(cross))
    eps = cfg["epsilon"] * scale if cfg["relative_eps"] else cfg["epsilon"]

    def adversarial_block(a, b):
        R = Entropy(eps=eps, c0=squared_euclidean_cost(a, b))
        acfg = AscentConfig(lr0=cfg["lr"] * eps, maxiter=cfg["maxiter"],
                            inner="entropic", eta=cfg["eta_rel"] * scale,
                            seed=cfg["seed"], sink_tol=1e-8,
                            tol_grad=1e-4 * (1.0 + scale))
        return ascend_nonneg_cost(a.weights, b.weights, R, acfg)

    # every block of the composite dissimilarity is an adversarial cost:
    # the self blocks shrink alongside the cross block as epsilon grows
    c_star, trace = adversarial_block(mu, nu)
    c_mu, trace_mu = adversarial_block(mu, mu)
    c_nu, trace_nu = adversarial_block(nu, nu)
    n, m = mu.n, nu.n
    D = np.zeros((n + m, n + m))
    D[:n, :n] = c_mu
    D[n:, n:] = c_nu
    D[:n, n:] = c_star
    D[n:, :n] = c_star.T
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    trace.converged = (trace.converged and trace_mu.converged
                       and trace_nu.converged)
    coords = mds_embed(D, dims=cfg["dims"])
    wall = time.perf_counter() - t0
    header = ["label"] + [f"y{j}" for j in range(cfg["dims"])]
    rows = [["mu"] + list(coords[i]) for i in range(n)]
    rows += [["nu"] + list(coords[n + i]) for i in range(m)]
    write_csv(args.out_csv, header, rows)
    emb_cross = np.linalg.norm(
        coords[:n, None, :] - coords[None, n:, :], axis=2)
    report = RunReport("embed")
    report.add_config(cfg)
    report.add("out_csv", args.out_csv)
    report.add("epsilon_abs", eps)
    report.add("mean_cross_cost", float(np.mean(c_star)))
    report.add("mean_cross_embedded_distance", float(np.mean(emb_cross)))
    report.add("ascent_converged", trace.converged)
    if cfg["plot"]:
        fig_path = str(args.out_csv) + ".png"
        render_embed_figure(coords, n, fig_path)
        report.add("out_figure", fig_path)
    if args.report:
        report.write(args.report)
    print(f"wall_time_s = {wall:.3f}")
    return 0 if trace.converged else 1


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="advot",
        description="Ground-cost adversarial optimal transport toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--report", default=None, help="report output path")

    p = sub.add_parser("gen", help="random instance generators")
    gen_sub = p.add_subparsers(dest="gen_command", required=True)
    pg = gen_sub.add_parser("clouds", help="Gaussian-Wishart point cloud")
    common(pg)
    pg.add_argument("--n", type=int, default=None)
    pg.add_argument("--d", type=int, default=None)
    pg.add_argument("--shift", type=float, default=None)
    pg.add_argument("--out", required=True)
    pg.set_defaults(func=cmd_gen_clouds)

    p = sub.add_parser("exact", help="exact Kantorovich solve")
    common(p)
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--cost", choices=["sqeuclid", "file"], default=None)
    p.add_argument("--cost-file", default=None)
    p.add_argument("--out-plan", default=None)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("eps-sweep",
                       help="adversarial cost sweep over regularization")
    common(p)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--instances", type=int, default=None)
    p.add_argument("--eps-grid", default=None,
                   help="comma list, multiples of mean(c0)")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--maxiter", type=int, default=None)
    p.add_argument("--eta-rel", type=float, default=None)
    p.add_argument("--plot", dest="plot", action="store_true", default=None)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_eps_sweep)

    p = sub.add_parser("tsrw", help="time-varying subspace robust Wasserstein")
    common(p)
    p.add_argument("--clouds", nargs="+", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--eta-grid", default=None, help="comma list of eta values")
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--maxiter", type=int, default=None)
    p.add_argument("--inner-eps", type=float, default=None,
                   help="entropic smoothing; 0 = exact, negative = auto")
    p.add_argument("--plot", dest="plot", action="store_true", default=None)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_tsrw)

    p = sub.add_parser("color-transfer", help="palette OT color transfer")
    common(p)
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--metric", choices=["euclid", "learned"], default=None)
    p.add_argument("--omega-file", default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--inner-eps", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_color_transfer)

    p = sub.add_parser("embed", help="composite-cost MDS embedding")
    common(p)
    p.add_argument("--mu", required=True)
    p.add_argument("--nu", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--absolute-eps", dest="relative_eps",
                   action="store_false", default=None)
    p.add_argument("--dims", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--maxiter", type=int, default=None)
    p.add_argument("--eta-rel", type=float, default=None)
    p.add_argument("--plot", dest="plot", action="store_true", default=None)
    p.add_argument("--no-plot", dest="plot", action="store_false")
    p.add_argument("--out-csv", required=True)
    p.set_defaults(func=cmd_embed)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
