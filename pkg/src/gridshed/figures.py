"""Matplotlib renderers for sweep and comparison outputs.

Pure file emitters used by the CLI report path; the core library never
imports this module. All figures are written as PNG next to the
delimited data they visualize.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sweep import METHOD_OPS, SweepResult, TradeoffPoint, pareto_front

_METHOD_COLORS = {
    "ops": "tab:blue",
    "transmission": "tab:orange",
    "area": "tab:green",
    "standard": "black",
}

_METHOD_LABELS = {
    "ops": "optimal shut-off",
    "transmission": "transmission heuristic",
    "area": "area heuristic",
    "standard": "standard operation",
}


def plot_tradeoff(
    sweeps: list[SweepResult],
    path: str,
    standard: TradeoffPoint | None = None,
    extra_points: list[TradeoffPoint] | None = None,
) -> None:
    """Risk vs served load, one series per method, baseline starred."""
    fig, ax = plt.subplots(figsize=(6.5, 5))
    for sweep in sweeps:
        pts = sweep.ok_points()
        if not pts:
            continue
        color = _METHOD_COLORS.get(sweep.method, "gray")
        ax.scatter(
            [p.r_fire for p in pts],
            [p.d_tot for p in pts],
            s=14,
            alpha=0.55,
            color=color,
            label=_METHOD_LABELS.get(sweep.method, sweep.method),
        )
        front = pareto_front(pts)
        ax.plot([p.r_fire for p in front], [p.d_tot for p in front], color=color, lw=1.2)
    for p in extra_points or []:
        ax.scatter([p.r_fire], [p.d_tot], marker="*", s=160,
                   color=_METHOD_COLORS.get(p.method, "gray"), edgecolor="black", zorder=5,
                   label=_METHOD_LABELS.get(p.method, p.method))
    if standard is not None:
        ax.scatter([standard.r_fire], [standard.d_tot], marker="*", s=200,
                   color="black", zorder=6, label=_METHOD_LABELS["standard"])
    ax.set_xlabel("wildfire risk")
    ax.set_ylabel("load served (MW)")
    ax.legend(loc="lower right", fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_parameter_sweep(sweep: SweepResult, path: str) -> None:
    """Risk and load curves against the sweep parameter, twin axes."""
    pts = sweep.ok_points()
    fig, ax_risk = plt.subplots(figsize=(6.5, 4.2))
    xs = [p.parameter for p in pts]
    ax_risk.plot(xs, [p.r_fire for p in pts], color="tab:red", lw=1.6, label="risk")
    ax_risk.set_ylabel("wildfire risk", color="tab:red")
    ax_risk.tick_params(axis="y", labelcolor="tab:red")
    ax_load = ax_risk.twinx()
    ax_load.plot(xs, [p.d_tot for p in pts], color="tab:blue", lw=1.6, label="load")
    ax_load.set_ylabel("load served (MW)", color="tab:blue")
    ax_load.tick_params(axis="y", labelcolor="tab:blue")
    if sweep.method == METHOD_OPS:
        ax_risk.set_xlabel("risk weight alpha")
    else:
        ax_risk.set_xlabel("shut-off risk threshold")
        ax_risk.invert_xaxis()  # tightening thresholds read left to right
    ax_risk.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_line_scatter(rows: list[dict], path: str, title: str = "") -> None:
    """Per-line risk vs carried power, energized lines highlighted."""
    on = [r for r in rows if r["energized"]]
    off = [r for r in rows if not r["energized"]]
    fig, ax = plt.subplots(figsize=(6, 4.2))
    ax.scatter([r["r_l"] for r in on], [r["abs_flow_mw"] for r in on],
               color="tab:blue", s=22, label="energized")
    ax.scatter([r["r_l"] for r in off], [r["abs_flow_mw"] for r in off],
               color="tab:orange", s=22, label="de-energized")
    ax.set_xlabel("line wildfire risk")
    ax.set_ylabel("|power flow| (MW)")
    if title:
        ax.set_title(title, fontsize=10)
    ax.legend(fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
