"""Stream-function guidance: flow-field planning, smooth path generation,
and backstepping path following for surface vessels on a gridded workspace."""

from .bezier import (BezierSegment, PathInfeasibleError, continuation_points,
                     eval_bezier, first_segment, solve_corridor_qp)
from .control import ControlGains, PathExhausted, control_law, hold_signal, path_signal
from .flowfield import (FlowContext, SingularityError, composite_psi, field_on_grid,
                        sink_obstacle_psi, sink_psi, vortex_psi, vortex_spin)
from .planner import PlanningStuckError, WaypointQuery, plan_step, select_next_waypoint
from .scenario import (Scenario, load_scenario, parse_scenario, run_scenario,
                       save_scenario, serialize_scenario)
from .scenarios import BUNDLED, load_bundled
from .simulator import RunTrace, SimConfig, colregs_metrics, run
from .vessel import VesselParams, VesselState, default_params
from .workspace import (ConfigurationError, GridSpec, Obstacle, Workspace,
                        grid_point, snap_to_grid, validate)

__version__ = "0.1.0"

__all__ = [
    "BezierSegment", "PathInfeasibleError", "continuation_points", "eval_bezier",
    "first_segment", "solve_corridor_qp",
    "ControlGains", "PathExhausted", "control_law", "hold_signal", "path_signal",
    "FlowContext", "SingularityError", "composite_psi", "field_on_grid",
    "sink_obstacle_psi", "sink_psi", "vortex_psi", "vortex_spin",
    "PlanningStuckError", "WaypointQuery", "plan_step", "select_next_waypoint",
    "Scenario", "load_scenario", "parse_scenario", "run_scenario",
    "save_scenario", "serialize_scenario",
    "BUNDLED", "load_bundled",
    "RunTrace", "SimConfig", "colregs_metrics", "run",
    "VesselParams", "VesselState", "default_params",
    "ConfigurationError", "GridSpec", "Obstacle", "Workspace", "grid_point",
    "snap_to_grid", "validate",
    "__version__",
]
