"""Backstepping path-following controller.

The geometric task tracks the Bezier path p_d(s); the dynamic task drives
the path speed toward the assignment that keeps ground speed at u_d.
Virtual controls stabilize position/heading errors, and the kinetic law
renders the velocity-error dynamics a damped linear cascade. All control
derivatives are computed analytically; no numeric differentiation happens
in the loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bezier import BezierSegment, eval_bezier
from .geometry import cross2, rotation, wrap_angle
from .vessel import VesselParams, VesselState

_SKEW = np.array([[0.0, -1.0], [1.0, 0.0]])


class PathExhausted(Exception):
    """Path parameter ran past the built segments; plan further first."""


class ControllerFaultError(RuntimeError):
    """Non-finite control computation; carries the offending signals."""

    def __init__(self, message: str, dump=None):
        super().__init__(message)
        self.dump = dump


@dataclass(frozen=True)
class PathSignal:
    """Desired-path signals at one value of the path parameter."""

    s: float
    segment: int
    theta: float
    p_d: np.ndarray
    p_d_s: np.ndarray
    p_d_s2: np.ndarray
    p_d_s3: np.ndarray
    psi_d: float
    psi_d_s: float
    psi_d_s2: float
    speed_assign: float
    speed_assign_s: float


@dataclass(frozen=True)
class ControlGains:
    K_p: np.ndarray
    k_psi: float
    K_nu: np.ndarray
    u_d: float
    eps_reg: float
    mu: float

    def __post_init__(self) -> None:
        K_p = np.asarray(self.K_p, dtype=float).reshape(2, 2)
        K_nu = np.asarray(self.K_nu, dtype=float).reshape(3, 3)
        object.__setattr__(self, "K_p", K_p)
        object.__setattr__(self, "K_nu", K_nu)
        if np.linalg.eigvalsh(0.5 * (K_p + K_p.T)).min() <= 0:
            raise ValueError("K_p must be positive definite")
        if np.linalg.eigvals(0.5 * (K_nu + K_nu.T)).real.min() <= 0:
            raise ValueError("K_nu must be positive definite")
        if self.k_psi <= 0:
            raise ValueError("k_psi must be positive")
        if self.eps_reg <= 0:
            raise ValueError("eps_reg must be positive")
        if self.mu < 0:
            raise ValueError("mu must be nonnegative")


@dataclass(frozen=True)
class ErrorState:
    """Transformed error signals plus the virtual control and its rate."""

    z_p: np.ndarray
    z_psi: float
    z_nu: np.ndarray
    omega: float
    alpha: np.ndarray
    alpha_dot: np.ndarray


def path_signal(segments: Sequence[BezierSegment], s: float,
                u_d: float, eps_reg: float) -> PathSignal:
    """Evaluate the path and its s-derivatives at parameter s.

    Segment k covers s in [k-1, k]; within it theta = s - (k-1), so
    d/ds equals d/dtheta. The end of the last segment (s = len) is valid.
    """
    n = len(segments)
    if n == 0 or s < 0 or s > n + 1e-12:
        raise PathExhausted(f"s={s} outside the built range [0, {n}]")
    if s >= n:
        k, theta = n, 1.0
    else:
        k = int(math.floor(s)) + 1
        theta = s - (k - 1)
    seg = segments[k - 1]

    p = eval_bezier(seg, theta, 0)
    g = eval_bezier(seg, theta, 1)
    g2 = eval_bezier(seg, theta, 2)
    g3 = eval_bezier(seg, theta, 3)

    rho = float(g @ g)
    psi_d = float(np.arctan2(g[1], g[0]))
    psi_d_s = cross2(g, g2) / rho
    psi_d_s2 = (cross2(g, g3) * rho - cross2(g, g2) * 2.0 * float(g @ g2)) / rho**2

    norm = float(np.sqrt(rho))
    speed = u_d / (norm + eps_reg)
    speed_s = -u_d * (float(g @ g2) / norm) / (norm + eps_reg) ** 2

    return PathSignal(s=float(s), segment=k, theta=float(theta),
                      p_d=p, p_d_s=g, p_d_s2=g2, p_d_s3=g3,
                      psi_d=psi_d, psi_d_s=psi_d_s, psi_d_s2=psi_d_s2,
                      speed_assign=speed, speed_assign_s=speed_s)


def hold_signal(point: np.ndarray, heading: float, s: float, segment: int) -> PathSignal:
    """Stationary target signal: park at `point` with zero feedforward.

    Used once the planned path is complete, so the controller regulates
    position instead of chasing a moving reference.
    """
    zero = np.zeros(2)
    return PathSignal(s=float(s), segment=segment, theta=1.0,
                      p_d=np.asarray(point, dtype=float).copy(),
                      p_d_s=zero, p_d_s2=zero.copy(), p_d_s3=zero.copy(),
                      psi_d=float(heading), psi_d_s=0.0, psi_d_s2=0.0,
                      speed_assign=0.0, speed_assign_s=0.0)


def update_law(p: np.ndarray, sig: PathSignal, gains: ControlGains) -> float:
    """Unit-tangent gradient correction to the path-parameter speed."""
    g = sig.p_d_s
    denom = float(np.linalg.norm(g)) + gains.eps_reg
    return float(gains.mu * (g @ (np.asarray(p, dtype=float) - sig.p_d)) / denom)


def control_law(state: VesselState, sig: PathSignal, gains: ControlGains,
                params: VesselParams) -> tuple:
    """Force/moment command and the error state behind it.

    The commanded tau cancels Coriolis and damping along the virtual
    control and feeds back the velocity error, giving closed-loop error
    dynamics M z_nu' = -(K_nu + D) z_nu.
    """
    # a diverging state is reported via the fault below, not as
    # a stream of overflow warnings on the way there
    with np.errstate(over="ignore", invalid="ignore"):
        R = rotation(state.heading)
        p = state.position
        nu = state.nu
        r = state.yaw_rate

        z_p = R.T @ (p - sig.p_d)
        z_psi = wrap_angle(state.heading - sig.psi_d)

        vartheta = sig.speed_assign
        omega = update_law(p, sig, gains)
        s_dot = vartheta + omega

        ff_p = R.T @ sig.p_d_s * vartheta
        alpha_p = -gains.K_p @ z_p + ff_p
        psi_d_dot = sig.psi_d_s * vartheta
        alpha_psi = -gains.k_psi * z_psi + psi_d_dot

        z_v = state.body_velocity - alpha_p
        z_r = r - alpha_psi
        z_nu = np.array([z_v[0], z_v[1], z_r])

        # closed-form error rates, then the virtual-control rates
        z_p_dot = -gains.K_p @ z_p - r * (_SKEW @ z_p) + z_v - R.T @ sig.p_d_s * omega
        z_psi_dot = -gains.k_psi * z_psi + z_r

        alpha_p_dot = (-gains.K_p @ z_p_dot
                       - r * (R.T @ (_SKEW @ sig.p_d_s)) * vartheta
                       + R.T @ sig.p_d_s2 * vartheta * s_dot
                       + R.T @ sig.p_d_s * sig.speed_assign_s * s_dot)
        psi_d_ddot = sig.psi_d_s2 * vartheta**2 + sig.psi_d_s * sig.speed_assign_s * vartheta
        alpha_psi_dot = -gains.k_psi * z_psi_dot + psi_d_ddot

        alpha = np.array([alpha_p[0], alpha_p[1], alpha_psi])
        alpha_dot = np.array([alpha_p_dot[0], alpha_p_dot[1], alpha_psi_dot])

        C = params.coriolis_fn(nu)
        tau = (-gains.K_nu @ z_nu + C @ nu
               + params.damping @ alpha + params.inertia @ alpha_dot)

        errors = ErrorState(z_p=z_p, z_psi=float(z_psi), z_nu=z_nu,
                            omega=float(omega), alpha=alpha, alpha_dot=alpha_dot)
        if not (np.all(np.isfinite(tau)) and np.all(np.isfinite(alpha_dot))):
            raise ControllerFaultError("non-finite control command", dump=errors)
    return tau, errors
