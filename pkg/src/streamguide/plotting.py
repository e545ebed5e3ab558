"""SVG figures for runs and flow fields.

Output is deterministic: the Agg backend, a fixed hash salt for SVG ids,
and no embedded dates.
"""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from .bezier import eval_bezier  # noqa: E402
from .flowfield import field_on_grid  # noqa: E402
from .simulator import RunTrace  # noqa: E402
from .workspace import Workspace  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "streamguide"

_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def _setup_axes(ax, w: Workspace) -> None:
    ax.set_xlim(0.0, w.grid.length_x)
    ax.set_ylim(0.0, w.grid.length_y)
    ax.set_aspect("equal")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")


def plot_run(trace: RunTrace, w: Workspace, destination: str) -> None:
    """Vessel track, planned segments, waypoints, and obstacle motion."""
    fig, ax = plt.subplots(figsize=(7.0, 7.0))
    _setup_axes(ax, w)

    theta = np.linspace(0.0, 1.0, 64)
    for seg in trace.segments:
        pts = eval_bezier(seg, theta)
        ax.plot(pts[:, 0], pts[:, 1], color="tab:green", lw=1.0, ls="--",
                zorder=3)
    if trace.waypoints:
        wps = np.array(trace.waypoints)
        ax.plot(wps[:, 0], wps[:, 1], "s", color="tab:green", ms=3.5, zorder=4)

    pos = trace.positions()
    if len(pos):
        ax.plot(pos[:, 0], pos[:, 1], color="tab:blue", lw=1.6, zorder=5,
                label="own ship")
        ax.plot(pos[0, 0], pos[0, 1], "o", color="tab:blue", ms=6, zorder=6)

    for i, ob in enumerate(w.obstacles):
        track = trace.obstacle_track(i)
        if len(track):
            ax.plot(track[:, 0], track[:, 1], color="tab:red", lw=0.8,
                    ls=":", zorder=2)
            last = track[-1]
        else:
            last = ob.position
        ax.add_patch(Circle(ob.position, ob.radius, fill=False,
                            color="tab:red", lw=1.0, zorder=2))
        ax.add_patch(Circle(last, ob.radius, fill=False, color="tab:red",
                            lw=0.8, alpha=0.4, zorder=2))
    ax.plot(w.target[0], w.target[1], "*", color="tab:orange", ms=12,
            zorder=6, label="target")
    ax.legend(loc="upper right", fontsize=8)
    fig.savefig(destination, **_SAVE_KW)
    plt.close(fig)


def plot_field(w: Workspace, current_wp, destination: str, levels: int = 41) -> None:
    """Streamline contours of the composite field for one planning state."""
    fg = field_on_grid(w, current_wp)
    fig, ax = plt.subplots(figsize=(7.0, 7.0))
    _setup_axes(ax, w)

    x, y = np.meshgrid(fg.x_coords, fg.y_coords, indexing="ij")
    vals = np.where(fg.masked, np.nan, fg.values)
    finite = vals[np.isfinite(vals)]
    if finite.size:
        lo, hi = np.percentile(finite, [2.0, 98.0])
        ax.contour(x, y, vals, levels=np.linspace(lo, hi, levels),
                   linewidths=0.6, cmap="viridis")
    for ob in w.obstacles:
        ax.add_patch(Circle(ob.position, ob.radius, fill=True,
                            color="0.8", ec="tab:red", lw=1.0, zorder=3))
    ax.plot(current_wp[0], current_wp[1], "o", color="tab:blue", ms=6, zorder=4)
    ax.plot(w.target[0], w.target[1], "*", color="tab:orange", ms=12, zorder=4)
    fig.savefig(destination, **_SAVE_KW)
    plt.close(fig)
