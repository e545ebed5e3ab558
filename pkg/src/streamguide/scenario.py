"""Scenario configuration: YAML schema, validation, and round-tripping.

A scenario file fixes the workspace, the vessel start pose, the obstacle
roster, and every planner/path/controller/sim constant for one run. For a
COLREGs-compliant obstacle the vx/vy pair is read as its destination
point; its course is set toward that destination at the guided-ship speed
(a fixed fraction of the own-ship design speed). Off-grid obstacle and
target coordinates are snapped to the nearest grid point and the
adjustment is logged.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
import yaml

from .control import ControlGains
from .simulator import (CONSTANT_VELOCITY, STREAM_GUIDED, TS_SPEED_FACTOR,
                        SimConfig)
from .vessel import VesselParams, VesselState, default_params
from .workspace import (ConfigurationError, GridSpec, Obstacle, Workspace,
                        snap_to_grid, validate)

_SECTIONS = ("grid", "target", "vessel", "obstacles", "planner", "path",
             "controller", "sim")


@dataclass(frozen=True)
class SnapEvent:
    label: str
    original: tuple
    snapped: tuple
    distance: float


@dataclass(frozen=True)
class Scenario:
    workspace: Workspace
    vessel0: VesselState
    gains: ControlGains
    gamma: float
    n_r: int
    zeta: float
    epsilon: float
    sim: SimConfig
    vessel_params: VesselParams = field(default_factory=default_params)
    name: Optional[str] = None
    snap_log: tuple = ()

    def with_vessel_params(self, params: VesselParams) -> "Scenario":
        return replace(self, vessel_params=params)


def _require_mapping(value, label: str) -> dict:
    if not isinstance(value, dict):
        raise ConfigurationError(f"{label} must be a mapping")
    return value


def _check_keys(data: dict, label: str, required: tuple, optional: tuple = ()) -> None:
    keys = set(data)
    missing = [k for k in required if k not in keys]
    if missing:
        raise ConfigurationError(f"{label}: missing keys {missing}")
    unknown = sorted(keys - set(required) - set(optional))
    if unknown:
        raise ConfigurationError(f"{label}: unknown keys {unknown}")


def _num(value, label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{label} must be a number, got {value!r}")
    v = float(value)
    if not np.isfinite(v):
        raise ConfigurationError(f"{label} must be finite")
    return v


def _int(value, label: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"{label} must be an integer, got {value!r}")
    return value


def _vec(data: dict, kx: str, ky: str, label: str) -> np.ndarray:
    return np.array([_num(data[kx], f"{label}.{kx}"), _num(data[ky], f"{label}.{ky}")])


def _diag(value, size: int, label: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != size:
        raise ConfigurationError(f"{label} must be a list of {size} numbers")
    return np.diag([_num(v, f"{label}[{i}]") for i, v in enumerate(value)])


def _snap_logged(grid: GridSpec, p: np.ndarray, label: str, log: list) -> np.ndarray:
    snapped = snap_to_grid(grid, p)
    dist = float(np.linalg.norm(snapped - p))
    if dist > 1e-12:
        log.append(SnapEvent(label=label, original=(float(p[0]), float(p[1])),
                             snapped=(float(snapped[0]), float(snapped[1])),
                             distance=dist))
    return snapped


def parse_scenario(data: dict, name: Optional[str] = None) -> Scenario:
    data = _require_mapping(data, "scenario")
    _check_keys(data, "scenario", _SECTIONS)

    g = _require_mapping(data["grid"], "grid")
    _check_keys(g, "grid", ("L_x", "L_y", "N_x", "N_y"))
    grid = GridSpec(length_x=_num(g["L_x"], "grid.L_x"),
                    length_y=_num(g["L_y"], "grid.L_y"),
                    count_x=_int(g["N_x"], "grid.N_x"),
                    count_y=_int(g["N_y"], "grid.N_y"))

    snap_log: list = []
    tgt = _require_mapping(data["target"], "target")
    _check_keys(tgt, "target", ("x", "y"))
    target = _snap_logged(grid, _vec(tgt, "x", "y", "target"), "target", snap_log)

    ves = _require_mapping(data["vessel"], "vessel")
    _check_keys(ves, "vessel", ("x0", "y0", "psi0"))
    vessel0 = VesselState(
        position=_vec(ves, "x0", "y0", "vessel"),
        heading=_num(ves["psi0"], "vessel.psi0"),
        body_velocity=np.zeros(2), yaw_rate=0.0)

    ctl = _require_mapping(data["controller"], "controller")
    _check_keys(ctl, "controller", ("Kp", "kpsi", "Knu", "ud", "eps_reg", "mu"))
    gains = ControlGains(
        K_p=_diag(ctl["Kp"], 2, "controller.Kp"),
        k_psi=_num(ctl["kpsi"], "controller.kpsi"),
        K_nu=_diag(ctl["Knu"], 3, "controller.Knu"),
        u_d=_num(ctl["ud"], "controller.ud"),
        eps_reg=_num(ctl["eps_reg"], "controller.eps_reg"),
        mu=_num(ctl["mu"], "controller.mu"))

    obs_list = data["obstacles"]
    if obs_list is None:
        obs_list = []
    if not isinstance(obs_list, list):
        raise ConfigurationError("obstacles must be a list")
    obstacles = []
    for i, entry in enumerate(obs_list):
        label = f"obstacles[{i}]"
        entry = _require_mapping(entry, label)
        _check_keys(entry, label, ("x", "y", "vx", "vy", "r", "l", "Cv"),
                    optional=("compliant",))
        pos = _snap_logged(grid, _vec(entry, "x", "y", label), f"{label}.position",
                           snap_log)
        compliant = entry.get("compliant", False)
        if not isinstance(compliant, bool):
            raise ConfigurationError(f"{label}.compliant must be a boolean")
        radius = _num(entry["r"], f"{label}.r")
        influence = _num(entry["l"], f"{label}.l")
        gain = _num(entry["Cv"], f"{label}.Cv")
        raw_v = _vec(entry, "vx", "vy", label)
        if compliant:
            dest = _snap_logged(grid, raw_v, f"{label}.destination", snap_log)
            offset = dest - pos
            span = float(np.linalg.norm(offset))
            speed = TS_SPEED_FACTOR * gains.u_d
            velocity = (offset / span) * speed if span > 1e-12 else np.zeros(2)
            obstacles.append(Obstacle(position=pos, velocity=velocity, radius=radius,
                                      influence_range=influence, vortex_gain=gain,
                                      colregs_compliant=True,
                                      guided_destination=dest))
        else:
            obstacles.append(Obstacle(position=pos, velocity=raw_v, radius=radius,
                                      influence_range=influence, vortex_gain=gain))

    pl = _require_mapping(data["planner"], "planner")
    _check_keys(pl, "planner", ("gamma", "n_r", "delta"))
    gamma = _num(pl["gamma"], "planner.gamma")
    n_r = _int(pl["n_r"], "planner.n_r")
    delta = _num(pl["delta"], "planner.delta")
    if n_r < 1:
        raise ConfigurationError("planner.n_r must be at least 1")
    if delta <= 0:
        raise ConfigurationError("planner.delta must be positive")

    pa = _require_mapping(data["path"], "path")
    _check_keys(pa, "path", ("zeta", "epsilon"))
    zeta = _num(pa["zeta"], "path.zeta")
    epsilon = _num(pa["epsilon"], "path.epsilon")
    if zeta <= 0 or epsilon <= 0:
        raise ConfigurationError("path.zeta and path.epsilon must be positive")

    sm = _require_mapping(data["sim"], "sim")
    _check_keys(sm, "sim", ("dt", "t_max"))
    mode = STREAM_GUIDED if any(o.colregs_compliant for o in obstacles) else CONSTANT_VELOCITY
    sim = SimConfig(dt=_num(sm["dt"], "sim.dt"), t_max=_num(sm["t_max"], "sim.t_max"),
                    delta=delta, obstacle_mode=mode)

    w = validate(Workspace(grid=grid, target=target, obstacles=tuple(obstacles)))
    snap_to_grid(grid, vessel0.position)  # reject starts outside the workspace

    return Scenario(workspace=w, vessel0=vessel0, gains=gains, gamma=gamma,
                    n_r=n_r, zeta=zeta, epsilon=epsilon, sim=sim, name=name,
                    snap_log=tuple(snap_log))


def serialize_scenario(sc: Scenario) -> dict:
    w = sc.workspace
    obstacles = []
    for ob in w.obstacles:
        if ob.colregs_compliant:
            vx, vy = float(ob.guided_destination[0]), float(ob.guided_destination[1])
        else:
            vx, vy = float(ob.velocity[0]), float(ob.velocity[1])
        entry = {"x": float(ob.position[0]), "y": float(ob.position[1]),
                 "vx": vx, "vy": vy, "r": ob.radius, "l": ob.influence_range,
                 "Cv": ob.vortex_gain}
        if ob.colregs_compliant:
            entry["compliant"] = True
        obstacles.append(entry)
    return {
        "grid": {"L_x": w.grid.length_x, "L_y": w.grid.length_y,
                 "N_x": w.grid.count_x, "N_y": w.grid.count_y},
        "target": {"x": float(w.target[0]), "y": float(w.target[1])},
        "vessel": {"x0": float(sc.vessel0.position[0]),
                   "y0": float(sc.vessel0.position[1]),
                   "psi0": float(sc.vessel0.heading)},
        "obstacles": obstacles,
        "planner": {"gamma": sc.gamma, "n_r": sc.n_r, "delta": sc.sim.delta},
        "path": {"zeta": sc.zeta, "epsilon": sc.epsilon},
        "controller": {"Kp": [float(sc.gains.K_p[0, 0]), float(sc.gains.K_p[1, 1])],
                       "kpsi": sc.gains.k_psi,
                       "Knu": [float(sc.gains.K_nu[i, i]) for i in range(3)],
                       "ud": sc.gains.u_d, "eps_reg": sc.gains.eps_reg,
                       "mu": sc.gains.mu},
        "sim": {"dt": sc.sim.dt, "t_max": sc.sim.t_max},
    }


def run_scenario(sc: Scenario):
    """Run the closed loop for a parsed scenario and return its trace."""
    from .simulator import run

    return run(sc.workspace, sc.vessel0, sc.gains, sc.vessel_params, sc.sim,
               gamma=sc.gamma, n_r=sc.n_r, zeta=sc.zeta, eps=sc.epsilon)


def load_scenario(source: Union[str, Path], name: Optional[str] = None) -> Scenario:
    path = Path(source)
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh)
    if data is None:
        raise ConfigurationError(f"{path}: empty scenario file")
    return parse_scenario(data, name=name or path.stem)


def save_scenario(sc: Scenario, destination: Union[str, Path]) -> None:
    with open(destination, "w", encoding="utf-8") as fh:
        yaml.safe_dump(serialize_scenario(sc), fh, sort_keys=False)
