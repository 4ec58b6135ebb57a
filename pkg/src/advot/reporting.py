"""Run reports, CSV output and figure rendering for the CLI.

Reports are flat key-value text files; every numeric is written with 17
significant digits so reruns can be compared bytewise. Figures are rendered
next to the delimited outputs with matplotlib's Agg backend.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


class RunReport:
    """Ordered flat key-value report for one CLI run."""

    def __init__(self, command: str):
        self.items = [("command", command)]

    def add(self, key: str, value) -> None:
        self.items.append((key, value))

    def add_config(self, config: dict) -> None:
        for key in sorted(config):
            self.items.append((f"config.{key}", config[key]))

    def render(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.items)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.render())


def write_csv(path, header: list[str], rows: list[list]) -> None:
    """Plain comma-separated output, floats at full precision."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def render_sweep_figure(rows, path) -> None:
    """Mean |value - W| per epsilon for the three sweep quantities."""
    eps = sorted({r["eps"] for r in rows})
    series = {"ot_adversarial": [], "sinkhorn": [], "linearized_value": []}
    for e in eps:
        sub = [r for r in rows if r["eps"] == e]
        for key in series:
            series[key].append(
                np.mean([abs(r[key] - r["exact_w"]) for r in sub]))
    fig, ax = plt.subplots(figsize=(6, 4))
    labels = {
        "ot_adversarial": r"$|OT_{c^\star} - W|$",
        "sinkhorn": r"$|S_\epsilon - W|$",
        "linearized_value": r"$|\widehat{W}_\epsilon - W|$",
    }
    for key, vals in series.items():
        ax.loglog(eps, np.maximum(vals, 1e-16), marker="o", label=labels[key])
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel("mean gap to exact W")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_eta_figure(etas, values, path) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogx(np.maximum(etas, 1e-12), values, marker="o")
    ax.set_xlabel(r"$\eta$")
    ax.set_ylabel("time-varying SRW value")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_embed_figure(coords, split: int, path) -> None:
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(coords[:split, 0], coords[:split, 1], label="mu", alpha=0.7)
    ax.scatter(coords[split:, 0], coords[split:, 1], label="nu", alpha=0.7)
    ax.set_aspect("equal")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
