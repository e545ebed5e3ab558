"""3DOF surface-vessel plant: kinematics, rigid-body kinetics, RK4 stepping.

State is planar position, heading, and body-frame velocities (surge, sway,
yaw rate). The default inertia/damping matrices are desk-scale placeholders
(documented as non-authoritative) and can be overridden programmatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .geometry import rotation, wrap_angle

__all__ = [
    "VesselState", "VesselParams", "NumericalBlowupError",
    "rotation", "coriolis_from_inertia", "default_params", "derivative", "step",
]


class NumericalBlowupError(RuntimeError):
    """Integration produced non-finite state; carries a diagnostic dump."""

    def __init__(self, message: str, state_vector=None, tau=None):
        super().__init__(message)
        self.state_vector = state_vector
        self.tau = tau


@dataclass(frozen=True)
class VesselState:
    position: np.ndarray
    heading: float
    body_velocity: np.ndarray
    yaw_rate: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(2))
        object.__setattr__(self, "body_velocity",
                           np.asarray(self.body_velocity, dtype=float).reshape(2))

    @property
    def nu(self) -> np.ndarray:
        """Body velocity vector (surge, sway, yaw rate)."""
        return np.array([self.body_velocity[0], self.body_velocity[1], self.yaw_rate])

    def packed(self) -> np.ndarray:
        return np.array([self.position[0], self.position[1], self.heading,
                         self.body_velocity[0], self.body_velocity[1], self.yaw_rate])

    @classmethod
    def from_packed(cls, vec: np.ndarray) -> "VesselState":
        return cls(position=vec[0:2], heading=float(vec[2]),
                   body_velocity=vec[3:5], yaw_rate=float(vec[5]))


def coriolis_from_inertia(M: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    """Standard rigid-body Coriolis/centripetal matrix built from M."""
    M = np.asarray(M, dtype=float)

    def C(nu: np.ndarray) -> np.ndarray:
        u, v, r = nu
        a = M[1, 1] * v + M[1, 2] * r
        b = M[0, 0] * u
        return np.array([
            [0.0, 0.0, -a],
            [0.0, 0.0, b],
            [a, -b, 0.0],
        ])

    return C


@dataclass(frozen=True)
class VesselParams:
    inertia: np.ndarray
    damping: np.ndarray
    coriolis_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inertia_inv: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        M = np.asarray(self.inertia, dtype=float).reshape(3, 3)
        D = np.asarray(self.damping, dtype=float).reshape(3, 3)
        if not np.allclose(M, M.T, atol=1e-12):
            raise ValueError("inertia matrix must be symmetric")
        eigs = np.linalg.eigvalsh(M)
        if eigs.min() <= 0:
            raise ValueError("inertia matrix must be positive definite")
        object.__setattr__(self, "inertia", M)
        object.__setattr__(self, "damping", D)
        object.__setattr__(self, "inertia_inv", np.linalg.inv(M))
        if self.coriolis_fn is None:
            object.__setattr__(self, "coriolis_fn", coriolis_from_inertia(M))


def default_params() -> VesselParams:
    """Desk-scale placeholder model (model-ship magnitudes, not measured
    values); override via VesselParams for a specific hull."""
    return VesselParams(inertia=np.diag([30.0, 40.0, 6.0]),
                        damping=np.diag([50.0, 50.0, 10.0]))


def derivative(state: VesselState, tau: np.ndarray, params: VesselParams) -> np.ndarray:
    """Packed time-derivative of the state under constant actuation tau."""
    nu = state.nu
    p_dot = rotation(state.heading) @ state.body_velocity
    nu_dot = params.inertia_inv @ (np.asarray(tau, dtype=float)
                                   - params.coriolis_fn(nu) @ nu
                                   - params.damping @ nu)
    return np.array([p_dot[0], p_dot[1], state.yaw_rate,
                     nu_dot[0], nu_dot[1], nu_dot[2]])


def _packed_derivative(vec: np.ndarray, tau: np.ndarray, params: VesselParams) -> np.ndarray:
    return derivative(VesselState.from_packed(vec), tau, params)


def step(state: VesselState, tau: np.ndarray, params: VesselParams, dt: float) -> VesselState:
    """One RK4 step with zero-order-hold actuation; wraps the heading."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = state.packed()
    # divergence is detected below; keep the overflow on the way there quiet
    with np.errstate(over="ignore", invalid="ignore"):
        k1 = _packed_derivative(y, tau, params)
        k2 = _packed_derivative(y + 0.5 * dt * k1, tau, params)
        k3 = _packed_derivative(y + 0.5 * dt * k2, tau, params)
        k4 = _packed_derivative(y + dt * k3, tau, params)
        out = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NumericalBlowupError(
            f"non-finite state after step (dt={dt})", state_vector=out, tau=np.asarray(tau))
    out[2] = wrap_angle(out[2])
    return VesselState.from_packed(out)
