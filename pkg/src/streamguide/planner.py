"""Stepwise waypoint selection on the grid.

Each planning step scores the grid points on a square ring around the
current waypoint by how well they preserve the current streamline value,
plus a small pull toward the target, and picks the minimizer. Once the
target enters the search box the target itself is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .flowfield import FlowContext, VortexSpin
from .workspace import GridSpec, Obstacle, Workspace, grid_index_of, grid_point

_BOX_TOL = 1e-9


class PlanningStuckError(RuntimeError):
    """No admissible candidate waypoint remains on the search ring."""


@dataclass(frozen=True)
class WaypointQuery:
    current_wp: np.ndarray
    ring_radius: int
    gamma: float
    target: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "current_wp", np.asarray(self.current_wp, dtype=float).reshape(2))
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float).reshape(2))
        if self.ring_radius < 1:
            raise ValueError("ring_radius must be >= 1")
        if self.gamma < 0:
            raise ValueError("gamma must be >= 0")


@dataclass(frozen=True)
class PlanningRecord:
    """What one planning step decided and why (for run logs)."""

    current_wp: np.ndarray
    next_wp: np.ndarray
    target_in_box: bool
    stream_cost: float
    distance_cost: float
    spins: tuple
    candidate_count: int

    @property
    def total_cost(self) -> float:
        return self.stream_cost + self.distance_cost


def _ring_indices(m0: int, n0: int, n_r: int, grid: GridSpec):
    out = []
    for dm in range(-n_r, n_r + 1):
        dns = (-n_r, n_r) if abs(dm) != n_r else tuple(range(-n_r, n_r + 1))
        for dn in dns:
            m, n = m0 + dm, n0 + dn
            if 1 <= m <= grid.count_x and 1 <= n <= grid.count_y:
                out.append((m, n))
    out.sort()
    return out


def candidate_ring(q: WaypointQuery, grid: GridSpec,
                   obstacles: Sequence[Obstacle] = ()) -> np.ndarray:
    """Grid points on the boundary of the search box, clipped to the
    workspace, with points strictly inside any obstacle disc removed.

    Returns an (K, 2) array ordered by (m, n); raises PlanningStuckError
    if nothing remains.
    """
    m0, n0 = grid_index_of(grid, q.current_wp)
    idx = _ring_indices(m0, n0, q.ring_radius, grid)
    pts = np.array([grid_point(grid, m, n) for m, n in idx]).reshape(-1, 2)
    keep = np.ones(len(pts), dtype=bool)
    for ob in obstacles:
        keep &= np.linalg.norm(pts - ob.position, axis=1) >= ob.radius
    if not keep.any():
        raise PlanningStuckError(
            f"all {len(pts)} ring candidates around {q.current_wp.tolist()} are blocked")
    return pts[keep]


def _target_in_box(q: WaypointQuery, grid: GridSpec) -> bool:
    dx = abs(q.target[0] - q.current_wp[0])
    dy = abs(q.target[1] - q.current_wp[1])
    return (dx <= q.ring_radius * grid.spacing_x + _BOX_TOL
            and dy <= q.ring_radius * grid.spacing_y + _BOX_TOL)


def plan_step(q: WaypointQuery, w: Workspace,
              context: Optional[FlowContext] = None) -> PlanningRecord:
    """One waypoint-selection step with its full decision record."""
    if _target_in_box(q, w.grid):
        return PlanningRecord(
            current_wp=q.current_wp, next_wp=q.target.copy(), target_in_box=True,
            stream_cost=0.0, distance_cost=0.0, spins=(), candidate_count=0)

    ctx = context or FlowContext.for_waypoint(w, q.current_wp)
    candidates = candidate_ring(q, w.grid, w.obstacles)
    psi_ref = ctx.psi(q.current_wp)
    stream_costs = np.abs(np.atleast_1d(ctx.psi(candidates)) - psi_ref)
    dists = np.linalg.norm(candidates - q.target, axis=1)
    totals = stream_costs + q.gamma * dists

    # lexicographic tie-breaking: cost, then distance to target, then (m, n)
    # order (candidates are already (m, n)-sorted)
    best = 0
    for i in range(1, len(candidates)):
        if (totals[i], dists[i]) < (totals[best], dists[best]):
            best = i
    return PlanningRecord(
        current_wp=q.current_wp, next_wp=candidates[best], target_in_box=False,
        stream_cost=float(stream_costs[best]), distance_cost=float(q.gamma * dists[best]),
        spins=ctx.spins, candidate_count=len(candidates))


def select_next_waypoint(q: WaypointQuery, w: Workspace,
                         context: Optional[FlowContext] = None) -> np.ndarray:
    """Next waypoint: the target once it is inside the search box, else the
    ring minimizer of |psi(p) - psi(WP_k)| + gamma * |p - target|."""
    return plan_step(q, w, context).next_wp
