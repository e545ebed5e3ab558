"""Command-line entry point.

Subcommands: ``run`` executes a scenario and writes its artifacts to an
output directory, ``list`` names the bundled scenarios, ``validate``
parses a configuration without running it. Exit status: 0 on success
(including a timeout run), 2 for configuration problems, 3 when the
simulation faulted (artifacts are still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np
import yaml

from .flowfield import field_on_grid
from .scenario import Scenario, load_scenario, run_scenario
from .scenarios import BUNDLED, DESCRIPTIONS, UnknownScenarioError, load_bundled
from .simulator import RunTrace, colregs_metrics
from .workspace import ConfigurationError, Workspace

_G = "%.17g"


def _fmt(v: float) -> str:
    return _G % v


def _resolve(token: str) -> Scenario:
    if token in BUNDLED:
        return load_bundled(token)
    path = Path(token)
    if path.exists():
        return load_scenario(path)
    raise ConfigurationError(
        f"{token!r} is neither a bundled scenario ({', '.join(BUNDLED)}) "
        f"nor an existing file")


def _write_trace(trace: RunTrace, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(trace.columns) + "\n")
        for row in trace.data:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_planning(trace: RunTrace, path: Path) -> None:
    header = ("step,t,from_x,from_y,to_x,to_y,target_in_box,"
              "stream_cost,distance_cost,total_cost,candidates,spins\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header)
        for ps in trace.planning:
            r = ps.record
            spins = ";".join(str(s.value) for s in r.spins)
            fh.write(",".join([
                str(ps.step_index), _fmt(ps.t),
                _fmt(r.current_wp[0]), _fmt(r.current_wp[1]),
                _fmt(r.next_wp[0]), _fmt(r.next_wp[1]),
                str(int(r.target_in_box)),
                _fmt(r.stream_cost), _fmt(r.distance_cost), _fmt(r.total_cost),
                str(r.candidate_count), spins]) + "\n")


def _write_segments(trace: RunTrace, path: Path) -> None:
    names = [f"p{i}_{ax}" for i in range(8) for ax in ("x", "y")]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("segment," + ",".join(names) + ",chord_angle\n")
        for seg in trace.segments:
            chord = seg.end - seg.start
            angle = float(np.arctan2(chord[1], chord[0]))
            flat = [x for p in seg.control_points for x in p]
            fh.write(",".join([str(seg.segment_index)]
                              + [_fmt(v) for v in flat] + [_fmt(angle)]) + "\n")


def _write_fields(trace: RunTrace, w: Workspace, out: Path) -> list:
    written = []
    for ps in trace.planning:
        if ps.record.target_in_box:
            continue
        snapshot = Workspace(grid=w.grid, target=w.target, obstacles=ps.obstacles)
        fg = field_on_grid(snapshot, ps.record.current_wp)
        dest = out / f"field_{ps.step_index:04d}.tsv"
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("m\tn\tx\ty\tpsi\n")
            for m, n, x, y, psi, masked in fg.rows():
                val = "nan" if masked else _fmt(psi)
                fh.write(f"{m}\t{n}\t{_fmt(x)}\t{_fmt(y)}\t{val}\n")
        written.append(dest.name)
    return written


def _summary_payload(sc: Scenario, trace: RunTrace) -> dict:
    payload = trace.summary()
    payload["scenario"] = sc.name
    payload["obstacle_mode"] = sc.sim.obstacle_mode
    payload["snap_log"] = [asdict(ev) for ev in sc.snap_log]
    payload["waypoints"] = [[float(p[0]), float(p[1])] for p in trace.waypoints]
    payload["encounters"] = [asdict(r) for r in colregs_metrics(trace, sc.workspace)]
    return payload


def _cmd_run(args) -> int:
    sc = _resolve(args.scenario)
    out = Path(args.out) if args.out else Path("runs") / (sc.name or "scenario")
    out.mkdir(parents=True, exist_ok=True)

    trace = run_scenario(sc)

    _write_trace(trace, out / "trace.csv")
    _write_planning(trace, out / "planning.csv")
    _write_segments(trace, out / "segments.csv")
    with open(out / "summary.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_summary_payload(sc, trace), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if args.field:
        _write_fields(trace, sc.workspace, out)
    if args.plots:
        from .plotting import plot_field, plot_run

        plot_run(trace, sc.workspace, str(out / "trajectory.svg"))
        if trace.planning:
            first = trace.planning[0]
            snapshot = Workspace(grid=sc.workspace.grid, target=sc.workspace.target,
                                 obstacles=first.obstacles)
            plot_field(snapshot, first.record.current_wp,
                       str(out / "streamlines.svg"))

    summary = trace.summary()
    print(f"{sc.name or 'scenario'}: {trace.outcome}"
          + (f" at t={summary['arrival_time']:.2f} s" if trace.arrival_time is not None else "")
          + f", path {summary['path_length']:.2f} m, artifacts in {out}")
    if trace.outcome == "fault":
        print(f"fault: {trace.fault_reason}", file=sys.stderr)
        return 3
    return 0


def _cmd_list(_args) -> int:
    width = max(len(n) for n in BUNDLED)
    for name in BUNDLED:
        print(f"{name:<{width}}  {DESCRIPTIONS[name]}")
    return 0


def _cmd_validate(args) -> int:
    sc = _resolve(args.scenario)
    w = sc.workspace
    print(f"{sc.name or 'scenario'}: ok")
    print(f"  grid {w.grid.count_x}x{w.grid.count_y} over "
          f"{w.grid.length_x}x{w.grid.length_y} m, spacing "
          f"({w.grid.spacing_x:g}, {w.grid.spacing_y:g})")
    print(f"  target ({w.target[0]:g}, {w.target[1]:g}), "
          f"{len(w.obstacles)} obstacle(s), mode {sc.sim.obstacle_mode}")
    for ev in sc.snap_log:
        print(f"  snapped {ev.label}: {ev.original} -> {ev.snapped} "
              f"(moved {ev.distance:.3g} m)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="streamguide",
        description="Stream-function guidance simulations")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a scenario and write artifacts")
    p_run.add_argument("scenario", help="bundled scenario name or YAML path")
    p_run.add_argument("--out", help="output directory (default runs/<name>)")
    p_run.add_argument("--plots", action="store_true", help="write SVG figures")
    p_run.add_argument("--field", action="store_true",
                       help="dump the flow field grid at each planning step")
    p_run.set_defaults(fn=_cmd_run)

    p_list = sub.add_parser("list", help="list bundled scenarios")
    p_list.set_defaults(fn=_cmd_list)

    p_val = sub.add_parser("validate", help="parse and validate a scenario")
    p_val.add_argument("scenario", help="bundled scenario name or YAML path")
    p_val.set_defaults(fn=_cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigurationError, UnknownScenarioError, yaml.YAMLError,
            FileNotFoundError, PermissionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
