"""``vspm`` command line: simulate, sweep, thermal, optimize, calibrate.

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure (divergence or an unreachable calibration target).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from vspm import __version__
from vspm.config import RunConfig, dump_config, load_config
from vspm.errors import CalibrationError, ConfigError, DomainError, NumericalDivergenceError
from vspm.experiments import (
    ANCHOR_AMPLITUDE_DEG,
    ANCHOR_FREQUENCY_HZ,
    ANCHOR_SPEED_MS,
    DimensionBounds,
    SweepRecord,
    TraceRow,
    calibrate_drag,
    optimize_dimensions,
    run_sweep,
    summarize_sweep,
)
from vspm.io import atomic_write_text, write_columns, write_csv, write_json
from vspm.thermal import Phase, joint_stiffness, simulate_thermal
from vspm.vehicle import Trajectory, simulate_run, steady_body_drag, steady_speed, steady_thrust

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

THERMAL_COLUMNS = ("time_s", "temp_C", "phase", "cumulative_J")


def _summary_path(out: Path) -> Path:
    return out.with_name(out.stem + ".summary.json")


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    changes = {}
    for flag, name in (("amplitude", "amplitude_deg"), ("frequency", "frequency_hz"), ("offset", "offset_deg"), ("accel", "accel_limit_dps2")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[name] = value
    if not changes:
        return config
    return replace(config, profile=replace(config.profile, **changes))


def cmd_simulate(args, config: RunConfig):
    config = _apply_overrides(config, args)
    sim = config.simulation()
    duration = 10.0 if args.duration is None else args.duration
    dt = 1e-3 if args.dt is None else args.dt
    traj = simulate_run(sim, duration, dt)
    out = Path(args.out)
    summary = {
        "command": "simulate",
        "config_digest": traj.config_digest,
        "run_config_digest": config.digest(),
        "duration_s": duration,
        "dt_s": dt,
        "steps": len(traj) - 1,
        "profile": {
            "amplitude_deg": sim.profile.amplitude_deg,
            "frequency_hz": sim.profile.frequency_hz,
            "offset_deg": sim.profile.offset_deg,
            "accel_limit_dps2": sim.profile.accel_limit_dps2,
        },
        "steady_speed_ms": steady_speed(traj, sim.profile),
        "mean_thrust_N": steady_thrust(traj, sim.profile),
        "mean_body_drag_N": steady_body_drag(traj, sim.profile, sim),
        "final_position_m": float(traj.position_m[-1]),
    }
    write_columns(out, Trajectory.COLUMNS, traj.columns())
    write_json(_summary_path(out), summary)
    return summary


def cmd_sweep(args, config: RunConfig):
    sweep = config.sweep
    duration = sweep.duration_s if args.duration is None else args.duration
    dt = sweep.dt_s if args.dt is None else args.dt
    records = run_sweep(sweep.grid(), config.simulation(), duration, dt, threads=args.threads)
    summary = summarize_sweep(records)
    summary.update(
        command="sweep",
        config_digest=config.digest(),
        simulation_digest=config.simulation().digest(),
        duration_s=duration,
        dt_s=dt,
    )
    out_dir = Path(args.out_dir)
    rows = ([getattr(r, f) for f in SweepRecord.FIELDS] for r in records)
    write_csv(out_dir / "sweep.csv", SweepRecord.FIELDS, rows)
    write_json(out_dir / "sweep.summary.json", summary)
    return summary


def cmd_thermal(args, config: RunConfig):
    th = config.thermal
    duration = th.duration_s if args.duration is None else args.duration
    dt = th.dt_s if args.dt is None else args.dt
    state = th.initial_state()
    trace = simulate_thermal(state, th.heater(), duration, dt)
    stiffness = th.stiffness()
    out = Path(args.out)
    summary = {
        "command": "thermal",
        "config_digest": config.digest(),
        "heat_capacity_JpK": state.heat_capacity_JpK,
        "loss_coeff_WpK": state.loss_coeff_WpK,
        "time_constant_s": state.time_constant_s,
        "power_W": th.heater().power_W,
        "final_temp_C": float(trace.temp_C[-1]),
        "melt_crossing_s": trace.crossing_time(th.melt_C),
        "first_liquid_s": trace.first_liquid_time(),
        "target_crossing_s": trace.crossing_time(th.target_C),
        "stiffness_NmmPdeg": {p.value: joint_stiffness(p, stiffness) for p in Phase},
    }
    write_columns(out, THERMAL_COLUMNS, (trace.time_s, trace.temp_C, trace.phase, trace.cumulative_J))
    write_json(_summary_path(out), summary)
    return summary


def cmd_optimize(args, config: RunConfig):
    dt = 1e-3 if args.dt is None else args.dt
    result = optimize_dimensions(DimensionBounds(), config.simulation(), budget=args.budget, dt_s=dt)
    out = Path(args.out)
    summary = {
        "command": "optimize",
        "config_digest": config.digest(),
        "budget": args.budget,
        "iterations": result.iterations,
        "evaluations": len(result.trace),
        "accepted": len(result.accepted),
        "mean_Fy_N": result.mean_Fy,
        "joint_pitch_mm": result.geometry.joint_pitch_mm,
        "gap_mm": result.geometry.gap_mm,
        "paddle_length_mm": result.paddle.length_mm,
        "paddle_width_mm": result.paddle.width_mm,
    }
    rows = ([getattr(r, f) for f in TraceRow.FIELDS] for r in result.trace)
    write_csv(out, TraceRow.FIELDS, rows)
    write_json(_summary_path(out), summary)
    return summary


def cmd_calibrate(args, config: RunConfig):
    out = Path(args.out)
    if args.config is not None and out.resolve() == Path(args.config).resolve():
        raise ConfigError("--out must differ from --config; the input config is never overwritten")
    tunables = ("body_drag_coeff", "drag_coeff") if args.tune_fluid else ("body_drag_coeff",)
    duration = 10.0 if args.duration is None else args.duration
    dt = 1e-3 if args.dt is None else args.dt
    result = calibrate_drag(
        config.simulation(),
        anchor_speed_ms=args.anchor_speed,
        amplitude_deg=ANCHOR_AMPLITUDE_DEG if args.amplitude is None else args.amplitude,
        frequency_hz=ANCHOR_FREQUENCY_HZ if args.frequency is None else args.frequency,
        offset_deg=0.0 if args.offset is None else args.offset,
        tunables=tunables,
        duration_s=duration,
        dt_s=dt,
    )
    calibrated = config.with_simulation(result.config)
    summary = {
        "command": "calibrate",
        "source_config_digest": config.digest(),
        "config_digest": calibrated.digest(),
        "anchor_speed_ms": args.anchor_speed,
        "speed_ms": result.speed_ms,
        "residual": result.residual,
        "iterations": result.iterations,
        "body_drag_coeff": calibrated.body.body_drag_coeff,
        "drag_coeff": calibrated.environment.drag_coeff,
    }
    atomic_write_text(out, dump_config(calibrated))
    write_json(_summary_path(out), summary)
    return summary


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run config (defaults apply when omitted)")
    common.add_argument("--seed", type=int, default=None, help="reserved; the simulator is deterministic")
    common.add_argument("--threads", type=_positive_int, default=1, help="max parallel grid evaluations")
    common.add_argument("--duration", type=float, default=None, help="simulated seconds")
    common.add_argument("--dt", type=float, default=None, help="integration step (s)")

    profile = argparse.ArgumentParser(add_help=False)
    profile.add_argument("--amplitude", type=float, help="override stroke amplitude (deg)")
    profile.add_argument("--frequency", type=float, help="override stroke frequency (Hz)")
    profile.add_argument("--offset", type=float, help="override stroke offset (deg)")

    parser = argparse.ArgumentParser(prog="vspm", description="Rowing-arm propulsion simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common, profile], help="one surge run, trajectory CSV + summary")
    p.add_argument("--accel", type=float, help="override acceleration limit (deg/s^2)")
    p.add_argument("--out", required=True, help="trajectory CSV path")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common], help="amplitude/frequency/offset/accel grid")
    p.add_argument("--out-dir", required=True, help="directory for sweep.csv and sweep.summary.json")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("thermal", parents=[common], help="joint heating trace")
    p.add_argument("--out", required=True, help="thermal trace CSV path")
    p.set_defaults(handler=cmd_thermal)

    p = sub.add_parser("optimize", parents=[common], help="coordinate search over arm dimensions")
    p.add_argument("--budget", type=_positive_int, default=30, help="max iterations")
    p.add_argument("--out", required=True, help="search trace CSV path")
    p.set_defaults(handler=cmd_optimize)

    p = sub.add_parser("calibrate", parents=[common, profile], help="fit drag to an anchor speed")
    p.add_argument("--anchor-speed", type=float, default=ANCHOR_SPEED_MS, help="target steady speed (m/s)")
    p.add_argument("--tune-fluid", action="store_true", help="allow tuning the fluid drag coefficient too")
    p.add_argument("--out", required=True, help="path of the calibrated config JSON")
    p.set_defaults(handler=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_CONFIG
    try:
        config = load_config(args.config)
        args.handler(args, config)
    except (ConfigError, DomainError) as exc:
        print(f"vspm: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalDivergenceError, CalibrationError) as exc:
        print(f"vspm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"vspm: error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
