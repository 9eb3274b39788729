"""Static SVG rendering of recorded trajectories (2-d problems only)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .dynamics import Trajectory  # noqa: E402


def _draw(ax, traj: Trajectory) -> None:
    lo, hi = traj.domain_lower, traj.domain_upper
    ax.add_patch(plt.Rectangle((lo[0], lo[1]), hi[0] - lo[0], hi[1] - lo[1],
                               fill=False, edgecolor="0.4", linewidth=0.8))
    xs = [r.x[0] for r in traj.rows]
    ys = [r.x[1] for r in traj.rows]
    ax.plot(xs, ys, "-", linewidth=1.2)
    ax.plot(xs[0], ys[0], "o", markersize=6)
    ax.plot(xs[-1], ys[-1], "*", markersize=10)
    pad = 0.05 * max(hi[0] - lo[0], hi[1] - lo[1])
    ax.set_xlim(lo[0] - pad, hi[0] + pad)
    ax.set_ylim(lo[1] - pad, hi[1] + pad)
    ax.set_aspect("equal")
    ax.set_title(f"{traj.problem} / {traj.method} ({traj.status})", fontsize=9)


def _require_plottable(traj: Trajectory) -> None:
    if traj.n != 2:
        raise ValueError(f"plots are only rendered for 2-d problems, got n={traj.n}")
    if not traj.rows:
        raise ValueError("trajectory has no data rows to plot")


def plot_trajectory(traj: Trajectory, path) -> None:
    """Polyline over the problem-unit box: dot at the start, star at the end."""
    _require_plottable(traj)
    fig, ax = plt.subplots(figsize=(4, 4))
    _draw(ax, traj)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg")
    plt.close(fig)


def plot_comparison(groups: dict[str, list[Trajectory]], path) -> None:
    """One panel per method, all runs of that method overlaid."""
    names = [name for name, trajs in groups.items() if trajs]
    if not names:
        raise ValueError("nothing to plot")
    for trajs in groups.values():
        for t in trajs:
            _require_plottable(t)
    cols = min(3, len(names))
    rows = (len(names) + cols - 1) // cols
    fig, axes = plt.subplots(rows, cols, figsize=(4 * cols, 4 * rows), squeeze=False)
    for ax in axes.flat:
        ax.set_axis_off()
    for ax, name in zip(axes.flat, names):
        ax.set_axis_on()
        for t in groups[name]:
            _draw(ax, t)
        ax.set_title(name, fontsize=10)
    fig.tight_layout()
    fig.savefig(Path(path), format="svg")
    plt.close(fig)
