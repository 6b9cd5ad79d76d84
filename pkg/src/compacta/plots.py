"""Figure rendering for the report paths.

Every figure goes straight to a file through the Agg canvas; no display
is ever needed.  Callers pass plain arrays and already-computed reports,
so rendering stays a side-effect-only leaf of the command layer.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_REGIME_COLORS = {
    "overdamped": "tab:blue",
    "oscillatory": "tab:orange",
    "critical": "tab:red",
}


def render_trajectory(trajectory, t0: float, path: str | Path) -> None:
    """Descriptors on top, pore pressure below, settling end marked."""
    fig, (ax_q, ax_p) = plt.subplots(2, 1, sharex=True, figsize=(8.0, 6.0))
    ax_q.plot(trajectory.times, trajectory.q0, label="$Q_0$ (lateral)")
    ax_q.plot(trajectory.times, trajectory.q1, label="$Q_1$ (axial)")
    ax_q.axvline(t0, color="0.75", linewidth=0.8)
    ax_q.set_ylabel("descriptor amplitude")
    ax_q.legend(loc="best", frameon=False)
    ax_p.plot(trajectory.times, trajectory.pressure, color="tab:red")
    ax_p.axvline(t0, color="0.75", linewidth=0.8)
    ax_p.set_xlabel("t (s)")
    ax_p.set_ylabel("pore pressure (Pa)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(rows: list[dict], param: str, scale: str, path: str | Path) -> None:
    """Discriminant against the swept value, colored by damping class."""
    fig, ax = plt.subplots(figsize=(8.0, 5.0))
    for regime, color in _REGIME_COLORS.items():
        xs = [r["value"] for r in rows if r["status"] == "ok" and r["regime"] == regime]
        ys = [r["discriminant"] for r in rows if r["status"] == "ok" and r["regime"] == regime]
        if xs:
            ax.plot(xs, ys, "o", color=color, label=regime)
    bad = [r["value"] for r in rows if r["status"] != "ok"]
    if bad:
        ax.plot(bad, np.zeros(len(bad)), "x", color="0.5", label="singular")
    ax.axhline(0.0, color="0.75", linewidth=0.8)
    if scale == "log":
        ax.set_xscale("log")
    ax.set_yscale("symlog")
    ax.set_xlabel(param)
    ax.set_ylabel(r"$\alpha_0^2 - 4\beta_0$")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_limit(report, path: str | Path) -> None:
    """Convergence measures against cell size on log-log axes."""
    l0 = [row.l0 for row in report.rows]
    fig, ax = plt.subplots(figsize=(7.0, 5.0))
    ax.loglog(l0, [row.root_gap for row in report.rows], "o-",
              label=f"slow-root gap (order {report.fitted_order_root:.2f})")
    ax.loglog(l0, [row.supnorm_gap for row in report.rows], "s-",
              label=f"sup-norm gap (order {report.fitted_order_supnorm:.2f})")
    ax.set_xlabel(r"$l_0$ (m)")
    ax.set_ylabel("gap to the first-order model")
    ax.legend(loc="best", frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
