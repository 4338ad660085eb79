"""Matplotlib figures for a finished run.

Four SVG files: overhead trajectories, estimate-vs-truth series, tracking
error / spacing angle of the sensing agent, and its control input.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import TWO_PI  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.0,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "circumnav",
    "svg.fonttype": "none",
}

TRUE = "tab:red"
EST = "tab:blue"


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def trajectory_figure(rec):
    fig, ax = plt.subplots(figsize=(5, 5))
    for i in range(rec.n):
        ax.plot(rec.p[:, i, 0], rec.p[:, i, 1], color=EST, alpha=0.6,
                label="agents" if i == 0 else None)
        ax.plot(*rec.p[-1, i], "s", color=EST, ms=4)
    ax.plot(rec.c[:, 0], rec.c[:, 1], color=TRUE, lw=0.8, label="target centre")
    th = np.linspace(0, TWO_PI, 200)
    ax.plot(rec.c[-1, 0] + rec.r[-1] * np.cos(th), rec.c[-1, 1] + rec.r[-1] * np.sin(th),
            color=TRUE, label="final target")
    ax.plot(rec.c_hat[-1, 0] + rec.r_hat[-1] * np.cos(th),
            rec.c_hat[-1, 1] + rec.r_hat[-1] * np.sin(th), "--", color="k", lw=0.8,
            label="final estimate")
    ax.set_aspect("equal", adjustable="datalim")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(loc="best")
    return fig


def estimates_figure(rec):
    fig, axes = plt.subplots(3, 1, figsize=(6, 6), sharex=True)
    series = [("x", rec.c[:, 0], rec.c_hat[:, 0]),
              ("y", rec.c[:, 1], rec.c_hat[:, 1]),
              ("r", rec.r, rec.r_hat)]
    for ax, (label, truth, est) in zip(axes, series):
        ax.plot(rec.t, truth, color=TRUE, label="true")
        ax.plot(rec.t, est, color=EST, label="estimate")
        ax.set_ylabel(label)
    axes[0].legend(loc="best")
    axes[-1].set_xlabel("t [s]")
    return fig


def tracking_figure(rec):
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3))
    a1.plot(rec.t, rec.Db[:, 0], color=EST)
    a1.set_xlabel("t [s]")
    a1.set_ylabel(r"$D^b_1$")
    a2.plot(rec.t, rec.beta[:, 0], color=EST)
    a2.axhline(TWO_PI / rec.n, color=TRUE)
    a2.set_xlabel("t [s]")
    a2.set_ylabel(r"$\beta_1$ [rad]")
    fig.tight_layout()
    return fig


def control_figure(rec):
    fig, axes = plt.subplots(1, 2, figsize=(8, 3))
    u_max = rec.config.controller.u_max
    for ax, k, name in zip(axes, (0, 1), ("x", "y")):
        ax.plot(rec.t, rec.U[:, 0, k], color=EST)
        for s in (-1, 1):
            ax.axhline(s * u_max, color=TRUE, lw=0.8)
        ax.set_xlabel("t [s]")
        ax.set_ylabel(f"$U_1$ {name}")
    fig.tight_layout()
    return fig


FIGURES = {
    "trajectory": trajectory_figure,
    "estimates": estimates_figure,
    "tracking": tracking_figure,
    "control": control_figure,
}


def render_all(rec, directory) -> list[Path]:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    out = []
    with plt.rc_context(STYLE):
        for name, build in FIGURES.items():
            out.append(_save(build(rec), d / f"{name}.svg"))
    return out
