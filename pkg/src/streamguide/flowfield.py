"""Composite stream-function guidance field.

The field superposes, per obstacle, a sink flow toward the target with the
obstacle disc inserted by the circle theorem, plus a vortex term whose spin
encodes the required passing side for moving traffic. Influence thresholding
gates obstacle terms by distance. Streamlines (level sets of psi) are the
guidance geometry the waypoint planner follows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .geometry import cross2, unit, wrap_angle
from .workspace import Obstacle, Workspace

SINGULARITY_RADIUS = 1e-6


class SingularityError(ValueError):
    """Evaluation requested at (or too close to) a singular point."""

    def __init__(self, kind: str, location: np.ndarray):
        self.kind = kind
        self.location = np.asarray(location, dtype=float)
        super().__init__(f"stream function singular near {self.location.tolist()} ({kind})")


def _pts(p) -> tuple:
    """Normalize input to an (K, 2) array; remember if it was a single point."""
    arr = np.asarray(p, dtype=float)
    if arr.ndim == 1:
        return arr.reshape(1, 2), True
    return arr.reshape(-1, 2), False


def _out(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


def _check_clear(pts: np.ndarray, point: np.ndarray, kind: str) -> None:
    d2 = np.sum((pts - point) ** 2, axis=1)
    hit = np.argmin(d2)
    if d2[hit] < SINGULARITY_RADIUS**2:
        raise SingularityError(kind, point)


@dataclass(frozen=True)
class FlowPrimitive:
    """Elementary 2D potential flow about `center`.

    kind: "uniform" (flow of speed `strength` along +x), "source_sink"
    (strength > 0 emits, strength < 0 attracts), or "vortex" (strength > 0
    circulates counterclockwise).
    """

    kind: str
    strength: float
    center: np.ndarray = None

    def __post_init__(self) -> None:
        if self.kind not in ("uniform", "source_sink", "vortex"):
            raise ValueError(f"unknown flow kind {self.kind!r}")
        if self.kind != "uniform" and self.strength == 0.0:
            raise ValueError("source/sink/vortex strength must be nonzero")
        center = np.zeros(2) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", center.reshape(2))

    def psi(self, p):
        pts, scalar = _pts(p)
        rel = pts - self.center
        if self.kind == "uniform":
            return _out(self.strength * rel[:, 1], scalar)
        _check_clear(pts, self.center, self.kind)
        if self.kind == "source_sink":
            return _out(self.strength * np.arctan2(rel[:, 1], rel[:, 0]), scalar)
        rho2 = np.sum(rel**2, axis=1)
        return _out(-0.5 * self.strength * np.log(rho2), scalar)

    def phi(self, p):
        """Velocity potential (harmonic conjugate of psi)."""
        pts, scalar = _pts(p)
        rel = pts - self.center
        if self.kind == "uniform":
            return _out(self.strength * rel[:, 0], scalar)
        _check_clear(pts, self.center, self.kind)
        rho2 = np.sum(rel**2, axis=1)
        if self.kind == "source_sink":
            return _out(0.5 * self.strength * np.log(rho2), scalar)
        return _out(self.strength * np.arctan2(rel[:, 1], rel[:, 0]), scalar)

    def velocity(self, p):
        """Flow velocity (d phi/dx, d phi/dy) at p."""
        pts, scalar = _pts(p)
        rel = pts - self.center
        if self.kind == "uniform":
            v = np.tile([self.strength, 0.0], (len(pts), 1))
        else:
            _check_clear(pts, self.center, self.kind)
            rho2 = np.sum(rel**2, axis=1)[:, None]
            if self.kind == "source_sink":
                v = self.strength * rel / rho2
            else:
                # vortex: phi = C*atan2, grad = C*(-y, x)/rho^2
                v = self.strength * np.stack([-rel[:, 1], rel[:, 0]], axis=1) / rho2
        return v[0] if scalar else v


def sink_psi(p, target, strength: float = 1.0):
    """Stream function of a bare sink of given strength at `target`."""
    pts, scalar = _pts(p)
    target = np.asarray(target, dtype=float)
    _check_clear(pts, target, "sink")
    rel = pts - target
    return _out(-strength * np.arctan2(rel[:, 1], rel[:, 0]), scalar)


def image_point(target, obstacle: Obstacle) -> np.ndarray:
    """Location of the sink's image singularity inside the obstacle disc."""
    target = np.asarray(target, dtype=float)
    b = obstacle.position - target
    nb2 = float(np.sum(b**2))
    if nb2 <= obstacle.radius**2:
        raise SingularityError("target inside obstacle disc", obstacle.position)
    return target + b * (1.0 - obstacle.radius**2 / nb2)


def sink_obstacle_psi(p, target, obstacle: Obstacle, strength: float = 1.0):
    """Sink flow toward `target` with the obstacle disc inserted.

    Evaluated in target-centered coordinates so streamlines terminate at
    the target; the disc boundary is a single streamline (psi constant).
    Singular at the target, at the sink's image point inside the disc,
    and at the disc center.
    """
    pts, scalar = _pts(p)
    target = np.asarray(target, dtype=float)
    _check_clear(pts, target, "sink")
    _check_clear(pts, image_point(target, obstacle), "image")
    _check_clear(pts, obstacle.position, "obstacle center")

    rel = pts - target
    b = obstacle.position - target
    d = rel - b
    rho2 = np.sum(d**2, axis=1)
    r2 = obstacle.radius**2
    img_x = r2 * d[:, 0] / rho2 + b[0]
    img_y = r2 * d[:, 1] / rho2 + b[1]
    psi = -strength * np.arctan2(rel[:, 1], rel[:, 0]) \
        + strength * np.arctan2(img_y, img_x)
    return _out(psi, scalar)


def uniform_obstacle_psi(p, obstacle_radius: float, strength: float = 1.0):
    """Uniform flow along +x with a circular obstacle at the origin."""
    pts, scalar = _pts(p)
    _check_clear(pts, np.zeros(2), "obstacle center")
    rho2 = np.sum(pts**2, axis=1)
    psi = strength * pts[:, 1] * (1.0 - obstacle_radius**2 / rho2)
    return _out(psi, scalar)


@dataclass(frozen=True)
class VortexSpin:
    """Signed vortex direction for one obstacle.

    value +1 deflects passing traffic to starboard (the head-on/overtaking
    response); -1 is chosen only for non-compliant obstacles crossing from
    port. `stationary` marks obstacles with zero velocity, whose vortex
    vanishes regardless of spin.
    """

    value: int
    relative_angle: float
    stationary: bool = False

    def __post_init__(self) -> None:
        if self.value not in (-1, 1):
            raise ValueError("spin value must be -1 or +1")


def vortex_spin(obstacle: Obstacle, current_wp, target) -> VortexSpin:
    """Spin rule: angle between the to-target direction and the obstacle
    course decides the vortex sense for non-compliant obstacles."""
    if obstacle.speed == 0.0:
        return VortexSpin(value=1, relative_angle=0.0, stationary=True)
    current_wp = np.asarray(current_wp, dtype=float)
    target = np.asarray(target, dtype=float)
    d_t = unit(target - current_wp)
    d_i = unit(obstacle.velocity)
    rel = wrap_angle(np.arctan2(cross2(d_t, d_i), float(np.dot(d_t, d_i))))
    if obstacle.colregs_compliant:
        return VortexSpin(value=1, relative_angle=rel)
    value = -1 if (np.pi / 4 < rel < 3 * np.pi / 4) else 1
    return VortexSpin(value=value, relative_angle=rel)


def vortex_psi(p, obstacle: Obstacle, spin: VortexSpin):
    """Vortex term about the obstacle center, strength gain * |velocity|.

    The frame is North-East-down, so for spin +1 the swirl steers a vessel
    meeting the obstacle head-on into a starboard deviation, leaving the
    obstacle on the vessel's port side.
    """
    pts, scalar = _pts(p)
    _check_clear(pts, obstacle.position, "vortex center")
    rho2 = np.sum((pts - obstacle.position) ** 2, axis=1)
    coef = obstacle.vortex_gain * spin.value * obstacle.speed
    return _out(coef * np.log(rho2), scalar)


@dataclass(frozen=True)
class FlowContext:
    """Frozen per-planning-step view of the field.

    Spins are computed once from the current waypoint and reused for every
    candidate evaluation within the step.
    """

    target: np.ndarray
    obstacles: tuple
    spins: tuple
    sink_strength: float = 1.0

    @classmethod
    def for_waypoint(cls, w: Workspace, current_wp, sink_strength=None) -> "FlowContext":
        """Build the field context for one planning step.

        sink_strength defaults to 1/N_o so that the summed field carries a
        unit-strength sink toward the target no matter how many per-obstacle
        copies the superposition accumulates.  Each copy is weaker, but their
        sum attracts exactly as a single sink would, which keeps the distance
        weight gamma and the vortex gains meaningful at any obstacle count.
        """
        if sink_strength is None:
            sink_strength = 1.0 / max(1, len(w.obstacles))
        spins = tuple(vortex_spin(ob, current_wp, w.target) for ob in w.obstacles)
        return cls(target=np.asarray(w.target, dtype=float),
                   obstacles=tuple(w.obstacles), spins=spins,
                   sink_strength=sink_strength)

    def psi(self, p):
        pts, scalar = _pts(p)
        if not self.obstacles:
            return _out(np.atleast_1d(sink_psi(pts, self.target, self.sink_strength)), scalar)
        terms = np.empty((len(pts), len(self.obstacles)))
        within = np.empty((len(pts), len(self.obstacles)), dtype=bool)
        for i, (ob, spin) in enumerate(zip(self.obstacles, self.spins)):
            terms[:, i] = np.atleast_1d(
                sink_obstacle_psi(pts, self.target, ob, self.sink_strength)
            ) + np.atleast_1d(vortex_psi(pts, ob, spin))
            dist = np.linalg.norm(pts - ob.position, axis=1)
            within[:, i] = dist <= ob.influence_range
        thresholded = within.any(axis=1)
        total = np.where(thresholded, (terms * within).sum(axis=1), terms.sum(axis=1))
        return _out(total, scalar)


def composite_psi(p, w: Workspace, current_wp, sink_strength=None):
    """Composite field value at p (single point or (K, 2) batch).

    Builds a fresh spin context from current_wp; callers evaluating many
    points per planning step should build a FlowContext once instead.
    sink_strength of None applies the 1/N_o normalization documented on
    FlowContext.for_waypoint.
    """
    return FlowContext.for_waypoint(w, current_wp, sink_strength).psi(p)


@dataclass(frozen=True)
class FieldGrid:
    """Field sampled on the full grid; points inside obstacle discs are
    masked and never evaluated."""

    values: np.ndarray
    masked: np.ndarray
    x_coords: np.ndarray
    y_coords: np.ndarray

    def rows(self):
        """Yield (m, n, x, y, psi, masked) per grid point, m-major."""
        for mi, x in enumerate(self.x_coords):
            for ni, y in enumerate(self.y_coords):
                yield (mi + 1, ni + 1, float(x), float(y),
                       float(self.values[mi, ni]), bool(self.masked[mi, ni]))


def field_on_grid(w: Workspace, current_wp, sink_strength=None) -> FieldGrid:
    xs = w.grid.x_coords()
    ys = w.grid.y_coords()
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([gx.ravel(), gy.ravel()], axis=1)

    masked = np.zeros(len(pts), dtype=bool)
    for ob in w.obstacles:
        masked |= np.linalg.norm(pts - ob.position, axis=1) < ob.radius
    # an on-grid target puts the sink itself among the samples; blank it
    masked |= np.linalg.norm(pts - w.target, axis=1) < SINGULARITY_RADIUS

    ctx = FlowContext.for_waypoint(w, current_wp, sink_strength)
    values = np.full(len(pts), np.nan)
    if (~masked).any():
        values[~masked] = ctx.psi(pts[~masked])
    shape = (w.grid.count_x, w.grid.count_y)
    return FieldGrid(values=values.reshape(shape), masked=masked.reshape(shape),
                     x_coords=xs, y_coords=ys)
