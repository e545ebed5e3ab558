"""Discretized planar world model: grid geometry, target, and obstacle roster.

The workspace is a rectangular region covered by an equidistant grid.
Waypoints, the target, and initial obstacle positions all live on grid
points; obstacles then move continuously and are never re-snapped.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

# Pairwise obstacle separation is checked against this slack so that
# exactly-touching discs are accepted.
_OVERLAP_TOL = 1e-12
_ONGRID_TOL = 1e-9


class ConfigurationError(ValueError):
    """A workspace or scenario violates a structural requirement."""


@dataclass(frozen=True)
class GridSpec:
    """Equidistant rectangular grid over a length_x by length_y region.

    Grid indices are 1-based: point (m, n) sits at ((m-1)*spacing_x,
    (n-1)*spacing_y) for m in 1..count_x, n in 1..count_y.
    """

    length_x: float
    length_y: float
    count_x: int
    count_y: int

    def __post_init__(self) -> None:
        if self.length_x <= 0 or self.length_y <= 0:
            raise ConfigurationError("grid lengths must be positive")
        if int(self.count_x) != self.count_x or int(self.count_y) != self.count_y:
            raise ConfigurationError("grid counts must be integers")
        if self.count_x < 1 or self.count_y < 1:
            raise ConfigurationError("grid counts must be positive")

    @property
    def spacing_x(self) -> float:
        return self.length_x / self.count_x

    @property
    def spacing_y(self) -> float:
        return self.length_y / self.count_y

    @property
    def total_points(self) -> int:
        return self.count_x * self.count_y

    def x_coords(self) -> np.ndarray:
        return np.arange(self.count_x) * self.spacing_x

    def y_coords(self) -> np.ndarray:
        return np.arange(self.count_y) * self.spacing_y


@dataclass(frozen=True)
class Obstacle:
    """Circular obstacle: disc of `radius`, influence annulus up to
    `influence_range`, and a vortex of strength vortex_gain * |velocity|.

    For COLREGs-compliant obstacles (target ships) `guided_destination`
    holds the goal position they steer toward; `velocity` is then their
    current straight-line leg velocity, refreshed by the simulator.
    """

    position: np.ndarray
    velocity: np.ndarray
    radius: float
    influence_range: float
    vortex_gain: float
    colregs_compliant: bool = False
    guided_destination: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(2))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float).reshape(2))
        if self.guided_destination is not None:
            object.__setattr__(
                self, "guided_destination",
                np.asarray(self.guided_destination, dtype=float).reshape(2))
        if not self.radius > 0:
            raise ConfigurationError("obstacle radius must be positive")
        if self.influence_range < self.radius:
            raise ConfigurationError(
                f"influence range {self.influence_range} smaller than radius {self.radius}")

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))

    def moved_to(self, position: np.ndarray, velocity: Optional[np.ndarray] = None) -> "Obstacle":
        """Copy of this obstacle at a new continuous position (not snapped)."""
        if velocity is None:
            return replace(self, position=np.asarray(position, dtype=float))
        return replace(self, position=np.asarray(position, dtype=float),
                       velocity=np.asarray(velocity, dtype=float))


@dataclass(frozen=True)
class Workspace:
    grid: GridSpec
    target: np.ndarray
    obstacles: tuple = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "target", np.asarray(self.target, dtype=float).reshape(2))
        object.__setattr__(self, "obstacles", tuple(self.obstacles))


def grid_point(grid: GridSpec, m: int, n: int) -> np.ndarray:
    """World coordinates of grid point (m, n), 1-based indices."""
    if not (1 <= m <= grid.count_x and 1 <= n <= grid.count_y):
        raise IndexError(f"grid index ({m}, {n}) outside 1..{grid.count_x} x 1..{grid.count_y}")
    return np.array([(m - 1) * grid.spacing_x, (n - 1) * grid.spacing_y])


def _snap_index(coord: float, spacing: float, count: int) -> int:
    # 0-based offset index; exact half-cell ties go to the smaller index
    f = coord / spacing
    low = int(np.floor(f))
    frac = f - low
    if frac > 0.5 + _OVERLAP_TOL:
        low += 1
    return min(max(low, 0), count - 1)


def snap_to_grid(grid: GridSpec, p: np.ndarray) -> np.ndarray:
    """Nearest grid point to p; ties break toward smaller indices.

    p must lie within the physical workspace rectangle.
    """
    p = np.asarray(p, dtype=float)
    if not (0.0 <= p[0] <= grid.length_x and 0.0 <= p[1] <= grid.length_y):
        raise ConfigurationError(
            f"position {p.tolist()} outside workspace "
            f"[0, {grid.length_x}] x [0, {grid.length_y}]")
    m = _snap_index(float(p[0]), grid.spacing_x, grid.count_x)
    n = _snap_index(float(p[1]), grid.spacing_y, grid.count_y)
    return np.array([m * grid.spacing_x, n * grid.spacing_y])


def grid_index_of(grid: GridSpec, p: np.ndarray) -> tuple:
    """1-based (m, n) of an on-grid point; raises if p is off-grid."""
    p = np.asarray(p, dtype=float)
    m = int(round(p[0] / grid.spacing_x)) + 1
    n = int(round(p[1] / grid.spacing_y)) + 1
    if not (1 <= m <= grid.count_x and 1 <= n <= grid.count_y):
        raise ConfigurationError(f"point {p.tolist()} outside the grid")
    err = np.abs(grid_point(grid, m, n) - p).max()
    if err > _ONGRID_TOL:
        raise ConfigurationError(f"point {p.tolist()} is not on a grid point (off by {err:.2e})")
    return m, n


def _is_on_grid(grid: GridSpec, p: np.ndarray) -> bool:
    try:
        grid_index_of(grid, p)
        return True
    except ConfigurationError:
        return False


def validate(w: Workspace) -> Workspace:
    """Check all structural invariants; returns the workspace unchanged.

    Raises ConfigurationError naming the offending element otherwise.
    """
    if not _is_on_grid(w.grid, w.target):
        raise ConfigurationError(f"target {w.target.tolist()} does not lie on a grid point")
    for i, ob in enumerate(w.obstacles):
        if not _is_on_grid(w.grid, ob.position):
            raise ConfigurationError(
                f"obstacle {i + 1} position {ob.position.tolist()} does not lie on a grid point")
        if float(np.linalg.norm(w.target - ob.position)) <= ob.radius:
            raise ConfigurationError(
                f"target lies inside the disc of obstacle {i + 1}")
    for i in range(len(w.obstacles)):
        for j in range(i + 1, len(w.obstacles)):
            a, b = w.obstacles[i], w.obstacles[j]
            dist = float(np.linalg.norm(a.position - b.position))
            if dist < a.radius + b.radius - _OVERLAP_TOL:
                raise ConfigurationError(
                    f"obstacles {i + 1} and {j + 1} overlap: "
                    f"distance {dist:.6g} < radii sum {a.radius + b.radius:.6g}")
    return w
