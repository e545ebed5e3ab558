"""Closed-loop scenario engine.

One run interleaves waypoint planning, segment generation, path-following
control, plant integration, and obstacle propagation until the vessel
reaches the target or a limit trips. Obstacles either follow exact
constant-velocity motion or, in stream-guided mode, COLREGs-compliant
target ships plan their own waypoints on the shared grid (seeing the own
ship as an obstacle) and travel straight lines between them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bezier import (BezierSegment, DegenerateSegmentError, PathInfeasibleError,
                     first_segment, solve_corridor_qp)
from .control import (ControlGains, ControllerFaultError, ErrorState, PathExhausted,
                      PathSignal, control_law, hold_signal, path_signal)
from .geometry import rotation, unit, wrap_angle
from .planner import PlanningRecord, PlanningStuckError, WaypointQuery, plan_step
from .qp import QPConvergenceError
from .vessel import NumericalBlowupError, VesselParams, VesselState, step
from .workspace import Obstacle, Workspace, snap_to_grid

CONSTANT_VELOCITY = "constant_velocity"
STREAM_GUIDED = "stream_guided"

#: trace column names before the per-obstacle position pairs
BASE_COLUMNS = (
    "t", "s", "k", "theta", "x", "y", "psi", "u", "v", "r",
    "x_d", "y_d", "psi_d", "z_p_x", "z_p_y", "z_psi",
    "z_nu_u", "z_nu_v", "z_nu_r", "omega", "tau_u", "tau_v", "tau_r",
)


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.01
    t_max: float = 600.0
    delta: float = 0.01
    obstacle_mode: str = CONSTANT_VELOCITY

    def __post_init__(self) -> None:
        if self.dt <= 0 or self.t_max <= 0 or self.delta <= 0:
            raise ValueError("dt, t_max, and delta must be positive")
        if self.obstacle_mode not in (CONSTANT_VELOCITY, STREAM_GUIDED):
            raise ValueError(f"unknown obstacle mode {self.obstacle_mode!r}")


@dataclass(frozen=True)
class PlanningStep:
    t: float
    step_index: int
    record: PlanningRecord
    obstacles: tuple = ()


@dataclass
class RunTrace:
    columns: tuple
    data: np.ndarray
    waypoints: list
    segments: list
    planning: list
    outcome: str
    fault_reason: Optional[str] = None
    snap_distance: float = 0.0
    arrival_time: Optional[float] = None

    def column(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    def obstacle_track(self, i: int) -> np.ndarray:
        """(T, 2) positions of obstacle i (0-based) over the run."""
        base = len(BASE_COLUMNS) + 2 * i
        return self.data[:, base:base + 2]

    @property
    def n_obstacles(self) -> int:
        return (self.data.shape[1] - len(BASE_COLUMNS)) // 2

    def positions(self) -> np.ndarray:
        return self.data[:, [self.columns.index("x"), self.columns.index("y")]]

    def summary(self) -> dict:
        pos = self.positions()
        steps = np.linalg.norm(np.diff(pos, axis=0), axis=1)
        z_p = self.data[:, [self.columns.index("z_p_x"), self.columns.index("z_p_y")]]
        clearances = {}
        for i in range(self.n_obstacles):
            d = np.linalg.norm(pos - self.obstacle_track(i), axis=1)
            clearances[f"obstacle_{i + 1}"] = float(d.min())
        return {
            "outcome": self.outcome,
            "fault_reason": self.fault_reason,
            "arrival_time": self.arrival_time,
            "duration": float(self.column("t")[-1]) if len(self.data) else 0.0,
            "path_length": float(steps.sum()),
            "max_position_error": float(np.linalg.norm(z_p, axis=1).max()) if len(z_p) else 0.0,
            "min_clearance": clearances,
            "waypoint_count": len(self.waypoints),
            "segment_count": len(self.segments),
            "snap_distance": self.snap_distance,
        }


class _Ballistic:
    """Closed-form constant-velocity obstacle (never integrated)."""

    def __init__(self, obstacle: Obstacle):
        self.base = obstacle
        self.p0 = obstacle.position.copy()
        self.v = obstacle.velocity.copy()

    def at(self, t: float) -> Obstacle:
        return self.base.moved_to(self.p0 + self.v * t)

    def advance(self, dt: float, os_state, others) -> None:
        pass


class _TargetShip:
    """Stream-guided obstacle: plans waypoints toward its destination on a
    virtual workspace that includes the own ship, then travels straight
    lines at the own-ship design speed."""

    def __init__(self, obstacle: Obstacle, grid, gamma: float, n_r: int, speed: float):
        if obstacle.guided_destination is None:
            raise ValueError("stream-guided obstacle without a destination")
        self.base = obstacle
        self.grid = grid
        self.gamma = gamma
        self.n_r = n_r
        self.speed = speed
        self.pos = obstacle.position.copy()
        self.dest = obstacle.guided_destination.copy()
        self.current_wp = obstacle.position.copy()
        self.goal: Optional[np.ndarray] = None
        self.velocity = np.zeros(2)
        self.parked = bool(np.linalg.norm(self.pos - self.dest) < 1e-9)

    def at(self, t: float) -> Obstacle:
        return self.base.moved_to(self.pos, self.velocity)

    def _replan(self, os_state: VesselState, others: Sequence[Obstacle]) -> None:
        os_velocity = rotation(os_state.heading) @ os_state.body_velocity
        mirror = Obstacle(
            position=os_state.position, velocity=os_velocity,
            radius=self.base.radius, influence_range=self.base.influence_range,
            vortex_gain=self.base.vortex_gain, colregs_compliant=True)
        roster = tuple(
            Obstacle(position=ob.position, velocity=ob.velocity, radius=ob.radius,
                     influence_range=ob.influence_range, vortex_gain=ob.vortex_gain,
                     colregs_compliant=True)
            for ob in others) + (mirror,)
        virtual = Workspace(grid=self.grid, target=self.dest, obstacles=roster)
        q = WaypointQuery(current_wp=self.current_wp, ring_radius=self.n_r,
                          gamma=self.gamma, target=self.dest)
        nxt = plan_step(q, virtual).next_wp
        if np.allclose(nxt, self.current_wp, atol=1e-12):
            self.parked = True
            self.velocity = np.zeros(2)
            self.goal = None
            return
        self.goal = nxt
        self.velocity = unit(nxt - self.pos) * self.speed

    def advance(self, dt: float, os_state: VesselState, others: Sequence[Obstacle]) -> None:
        if self.parked:
            return
        if self.goal is None:
            self._replan(os_state, others)
            if self.parked:
                return
        remaining = float(np.linalg.norm(self.goal - self.pos))
        if remaining <= self.speed * dt + 1e-12:
            self.pos = self.goal.copy()
            self.current_wp = self.goal.copy()
            self.goal = None
            self._replan(os_state, others)
        else:
            self.pos = self.pos + self.velocity * dt


# Stream-guided target ships sail at a fraction of the own-ship design
# speed.  A give-way vessel is expected to act early and keep well clear;
# at equal speeds a symmetric crossing degenerates into the two vessels
# arriving at the conflict point in lockstep and shadowing each other.
TS_SPEED_FACTOR = 0.75


def _make_obstacle_agents(w: Workspace, sim: SimConfig, gamma: float,
                          n_r: int, speed: float):
    agents = []
    for ob in w.obstacles:
        if sim.obstacle_mode == STREAM_GUIDED and ob.colregs_compliant:
            agents.append(_TargetShip(ob, w.grid, gamma, n_r,
                                      TS_SPEED_FACTOR * speed))
        else:
            agents.append(_Ballistic(ob))
    return agents


def run(w: Workspace, vessel0: VesselState, gains: ControlGains,
        params: VesselParams, sim: SimConfig,
        gamma: float = 0.2, n_r: int = 5,
        zeta: float = 0.5, eps: float = 0.005) -> RunTrace:
    """Run the planning/guidance/control loop until arrival or a limit.

    Faults (planning stuck, infeasible corridor program, controller or
    integrator failure) end the run with outcome "fault" and the partial
    trace retained.
    """
    target = w.target
    wp0 = snap_to_grid(w.grid, vessel0.position)
    snap_dist = float(np.linalg.norm(wp0 - vessel0.position))

    agents = _make_obstacle_agents(w, sim, gamma, n_r, gains.u_d)

    waypoints = [wp0]
    segments: list = []
    planning: list = []
    rows: list = []
    state = vessel0
    s = 0.0
    t = 0.0
    k_built = 0
    path_complete = False
    hold_heading = vessel0.heading
    outcome = "timeout"
    fault: Optional[str] = None
    arrival: Optional[float] = None
    n_steps = int(round(sim.t_max / sim.dt))

    def snapshot(now: float):
        return tuple(agent.at(now) for agent in agents)

    try:
        for _ in range(n_steps + 1):
            obstacles_now = snapshot(t)
            if float(np.linalg.norm(target - state.position)) < sim.delta:
                outcome = "reached"
                arrival = t
                break

            k_s = int(math.floor(s)) + 1
            if not path_complete and k_s > k_built:
                w_now = Workspace(grid=w.grid, target=target, obstacles=obstacles_now)
                q = WaypointQuery(current_wp=waypoints[-1], ring_radius=n_r,
                                  gamma=gamma, target=target)
                record = plan_step(q, w_now)
                planning.append(PlanningStep(t=t, step_index=len(planning),
                                             record=record, obstacles=obstacles_now))
                nxt = record.next_wp
                if np.allclose(nxt, waypoints[-1], atol=1e-12):
                    path_complete = True
                    if segments:
                        tail = path_signal(segments, float(len(segments)),
                                           gains.u_d, gains.eps_reg)
                        hold_heading = tail.psi_d
                else:
                    if not segments:
                        seg = first_segment(waypoints[-1], nxt, zeta)
                    else:
                        seg = solve_corridor_qp(waypoints[-2], waypoints[-1], nxt,
                                                segments[-1], zeta, eps)
                    segments.append(seg)
                    waypoints.append(nxt)
                    k_built = k_s

            n_seg = len(segments)
            if path_complete and s >= n_seg - 1e-12:
                sig = hold_signal(target, hold_heading, s=float(n_seg), segment=max(n_seg, 1))
            else:
                sig = path_signal(segments, s, gains.u_d, gains.eps_reg)

            tau, errors = control_law(state, sig, gains, params)

            row = np.empty(len(BASE_COLUMNS) + 2 * len(agents))
            row[0:10] = (t, s, sig.segment, sig.theta,
                         state.position[0], state.position[1], state.heading,
                         state.body_velocity[0], state.body_velocity[1], state.yaw_rate)
            row[10:13] = (sig.p_d[0], sig.p_d[1], sig.psi_d)
            row[13:16] = (errors.z_p[0], errors.z_p[1], errors.z_psi)
            row[16:19] = errors.z_nu
            row[19] = errors.omega
            row[20:23] = tau
            for i, ob in enumerate(obstacles_now):
                row[len(BASE_COLUMNS) + 2 * i: len(BASE_COLUMNS) + 2 * i + 2] = ob.position
            rows.append(row)

            s_dot = sig.speed_assign + errors.omega
            s = min(max(s + s_dot * sim.dt, 0.0), float(n_seg) if segments else 0.0)
            state = step(state, tau, params, sim.dt)
            for i, agent in enumerate(agents):
                agent.advance(sim.dt, state,
                              [ob for j, ob in enumerate(obstacles_now) if j != i])
            t = round(t + sim.dt, 12)
    except (PlanningStuckError, PathInfeasibleError, DegenerateSegmentError,
            QPConvergenceError, ControllerFaultError, NumericalBlowupError,
            PathExhausted) as exc:
        outcome = "fault"
        fault = f"{type(exc).__name__}: {exc}"

    columns = BASE_COLUMNS + tuple(
        name for i in range(len(agents)) for name in (f"obs{i + 1}_x", f"obs{i + 1}_y"))
    data = np.array(rows) if rows else np.empty((0, len(columns)))
    return RunTrace(columns=columns, data=data, waypoints=waypoints,
                    segments=segments, planning=planning, outcome=outcome,
                    fault_reason=fault, snap_distance=snap_dist, arrival_time=arrival)


@dataclass(frozen=True)
class EncounterReport:
    obstacle_index: int
    classification: str
    min_clearance: float
    t_cpa: float
    side_at_cpa: str
    passed_ahead: Optional[bool]


def _classify(os_heading: float, obstacle: Obstacle) -> str:
    if obstacle.speed < 1e-12:
        return "stationary"
    course = float(np.arctan2(obstacle.velocity[1], obstacle.velocity[0]))
    diff = abs(wrap_angle(course - os_heading))
    if diff > 3 * np.pi / 4:
        return "head-on"
    if diff < np.pi / 4:
        return "overtaking"
    return "crossing"


def colregs_metrics(trace: RunTrace, w: Workspace) -> list:
    """Per-obstacle encounter report: clearance, passing side at closest
    approach, ahead/astern relation along the obstacle track."""
    pos = trace.positions()
    psi = trace.column("psi")
    t_col = trace.column("t")
    os_heading0 = float(psi[0]) if len(psi) else 0.0

    reports = []
    for i, ob in enumerate(w.obstacles):
        track = trace.obstacle_track(i)
        d = np.linalg.norm(pos - track, axis=1)
        j = int(np.argmin(d))
        head = np.array([np.cos(psi[j]), np.sin(psi[j])])
        offset = track[j] - pos[j]
        # North-East-down axes: positive heading x offset cross product
        # puts the offset on the vessel's right-hand side
        side = "starboard" if head[0] * offset[1] - head[1] * offset[0] > 0 else "port"
        if ob.guided_destination is not None:
            track_dir = unit(ob.guided_destination - ob.position)
        elif ob.speed > 1e-12:
            track_dir = unit(ob.velocity)
        else:
            track_dir = None
        ahead = None
        if track_dir is not None:
            ahead = bool((pos[j] - track[j]) @ track_dir > 0)
        reports.append(EncounterReport(
            obstacle_index=i + 1, classification=_classify(os_heading0, ob),
            min_clearance=float(d[j]), t_cpa=float(t_col[j]),
            side_at_cpa=side, passed_ahead=ahead))
    return reports
