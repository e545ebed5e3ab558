"""Degree-7 Bezier path segments with third-order junction continuity.

The first segment lies on the straight chord between the first two
waypoints. Every later segment inherits its first four control points
from the previous segment (which pins position and three derivatives at
the joint) and places the next three by a small quadratic program in a
path-fixed frame: minimize squared parametric speed subject to ordering,
corridor, and curvature-margin constraints on the control-point abscissas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


from .qp import QPInfeasibleError, QPResult, qp_solve

DEGREE = 7
_THETA_TOL = 1e-12


class DegenerateSegmentError(ValueError):
    """Segment endpoints coincide."""


class PathInfeasibleError(RuntimeError):
    """No admissible segment exists for the waypoint geometry.

    `rows` carries the conflicting constraint indices when the failure
    came from the corridor program.
    """

    def __init__(self, message: str, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


def bernstein_matrix(n: int) -> np.ndarray:
    """Lower-triangular change of basis from control points to monomial
    coefficients: curve(theta) = P' B' a(theta) with a = (1, theta, ...)."""
    if n < 1:
        raise ValueError("degree must be >= 1")
    B = np.zeros((n + 1, n + 1))
    for i in range(n + 1):
        for j in range(i + 1):
            B[i, j] = ((-1) ** (i - j) * math.factorial(n)
                       / math.factorial(n - i)
                       / (math.factorial(j) * math.factorial(i - j)))
    return B


_B7 = bernstein_matrix(DEGREE)


@dataclass(frozen=True)
class BezierSegment:
    """One path segment: 8 control points, parametrized on [0, 1]."""

    control_points: np.ndarray
    segment_index: int = 1
    # monomial coefficients, shape (2, 8); column j multiplies theta^j
    _coeffs: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        pts = np.asarray(self.control_points, dtype=float).reshape(-1, 2)
        if len(pts) != DEGREE + 1:
            raise ValueError(f"segment requires {DEGREE + 1} control points, got {len(pts)}")
        object.__setattr__(self, "control_points", pts)
        object.__setattr__(self, "_coeffs", pts.T @ _B7.T)

    @property
    def start(self) -> np.ndarray:
        return self.control_points[0]

    @property
    def end(self) -> np.ndarray:
        return self.control_points[DEGREE]

    def eval(self, theta, order: int = 0):
        return eval_bezier(self, theta, order)


def eval_bezier(seg: BezierSegment, theta, order: int = 0):
    """Point (order 0) or exact theta-derivative (orders 1..3) at theta.

    Accepts a scalar or an array of parameter values in [0, 1].
    """
    if order not in (0, 1, 2, 3):
        raise ValueError("derivative order must be 0..3")
    th = np.asarray(theta, dtype=float)
    if np.any(th < -_THETA_TOL) or np.any(th > 1.0 + _THETA_TOL):
        raise ValueError(f"theta {theta} outside [0, 1]")
    scalar = th.ndim == 0
    th = np.atleast_1d(np.clip(th, 0.0, 1.0))

    powers = np.arange(DEGREE + 1)
    if order == 0:
        basis = th[:, None] ** powers[None, :]
    else:
        fall = np.array([
            math.factorial(j) / math.factorial(j - order) if j >= order else 0.0
            for j in powers])
        shifted = np.maximum(powers - order, 0)
        basis = fall[None, :] * th[:, None] ** shifted[None, :]
        basis[:, :order] = 0.0
    vals = basis @ seg._coeffs.T
    return vals[0] if scalar else vals


def first_segment(wp0, wp1, zeta: float) -> BezierSegment:
    """Initial segment: control points spread along the chord wp0 -> wp1,
    clustered toward the endpoints by the corridor half-width fraction."""
    wp0 = np.asarray(wp0, dtype=float)
    wp1 = np.asarray(wp1, dtype=float)
    chord = wp1 - wp0
    if np.linalg.norm(chord) < 1e-12:
        raise DegenerateSegmentError("coincident waypoints")
    pts = np.empty((DEGREE + 1, 2))
    for i in range(4):
        pts[i] = wp0 + chord * (i / 3.0) * (zeta / 2.0)
    for i in range(4, DEGREE + 1):
        pts[i] = wp1 - chord * ((DEGREE - i) / 3.0) * (zeta / 2.0)
    return BezierSegment(control_points=pts, segment_index=1)


def continuation_points(prev: BezierSegment) -> np.ndarray:
    """First four control points of the next segment, fixed so position and
    the first three derivatives match at the joint.

    Solves the unit lower-triangular junction system by forward
    substitution; rows couple (P1, P2, P3) to the tail of `prev`.
    """
    p4, p5, p6, p7 = prev.control_points[4:]
    rhs1 = 2.0 * p7 - p6
    rhs2 = -2.0 * p6 + p5
    rhs3 = 2.0 * p7 - 3.0 * p6 + 3.0 * p5 - p4
    p1 = rhs1
    p2 = rhs2 + 2.0 * p1
    p3 = rhs3 - 3.0 * p1 + 3.0 * p2
    return np.array([p7, p1, p2, p3])


# Objective matrices of the corridor program (fixed for degree 7).
CORRIDOR_Q = np.array([
    [24500.0, -7350.0, 980.0],
    [-7350.0, 2646.0, -441.0],
    [980.0, -441.0, 98.0],
])

# linear term: rows are coefficients of (x0, x1, x2, x3, x7)
_CORRIDOR_Q_LIN = np.array([
    [8400.0, -41160.0, 82320.0, -85750.0, -70.0],
    [-1512.0, 8232.0, -18522.0, 22050.0, 42.0],
    [112.0, -686.0, 1764.0, -2450.0, -14.0],
])

# Constraint rows on chi = (x4, x5, x6): ordering of the control-point
# abscissas (rows 0-1, 8-9), corridor overhang of the continued head
# past the end waypoint (rows 2-4), curvature margin eps (rows 5-7).
CORRIDOR_A = np.array([
    [1.0, -1.0, 0.0],
    [0.0, 1.0, -1.0],
    [0.0, 0.0, -1.0],
    [0.0, 1.0, -4.0],
    [-1.0, 6.0, -12.0],
    [0.0, 0.0, 1.0],
    [0.0, -1.0, 4.0],
    [1.0, -6.0, 12.0],
    [0.0, -1.0, 3.0],
    [1.0, -5.0, 8.0],
])


def corridor_c(length: float, zeta: float, eps: float) -> np.ndarray:
    half = zeta / 2.0
    return np.array([
        0.0,
        0.0,
        half - length,
        half - 3.0 * length,
        half - 7.0 * length,
        length - eps,
        3.0 * length - eps,
        7.0 * length - eps,
        2.0 * length,
        4.0 * length,
    ])


def corridor_q(head_x: np.ndarray, length: float) -> np.ndarray:
    vec = np.concatenate([np.asarray(head_x, dtype=float), [length]])
    return _CORRIDOR_Q_LIN @ vec


def _warm_start(length: float, zeta: float, eps: float):
    hi = min(zeta / 6.0, length / 3.0)
    if hi < eps:
        return None
    delta = 0.5 * (eps + hi)
    return np.array([length - 3 * delta, length - 2 * delta, length - delta])


def solve_corridor_qp(wp_prev, wp_k, wp_next, prev: BezierSegment,
                      zeta: float, eps: float) -> BezierSegment:
    """Build the segment from wp_k to wp_next, continuing `prev`.

    The head (P0..P3) comes from the junction conditions; the tail
    abscissas along the new chord solve the corridor program. P7 lands
    exactly on wp_next.
    """
    wp_prev = np.asarray(wp_prev, dtype=float)
    wp_k = np.asarray(wp_k, dtype=float)
    wp_next = np.asarray(wp_next, dtype=float)
    chord = wp_next - wp_k
    length = float(np.linalg.norm(chord))
    if length < 1e-12:
        raise DegenerateSegmentError("coincident waypoints")

    head = continuation_points(prev)
    axis = chord / length
    head_x = (head - wp_k) @ axis

    q = corridor_q(head_x, length)
    c = corridor_c(length, zeta, eps)
    try:
        res: QPResult = qp_solve(
            CORRIDOR_Q, q, CORRIDOR_A, c,
            lo=np.zeros(3), hi=np.full(3, length),
            x0=_warm_start(length, zeta, eps))
    except QPInfeasibleError as exc:
        raise PathInfeasibleError(
            f"corridor program infeasible for chord {length:.3g} m "
            f"(zeta={zeta}, eps={eps}): {exc}", rows=exc.rows) from exc

    tail = wp_k[None, :] + res.x[:, None] * axis[None, :]
    pts = np.vstack([head, tail, wp_next[None, :]])
    return BezierSegment(control_points=pts, segment_index=prev.segment_index + 1)
