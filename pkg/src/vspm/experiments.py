"""Parameter sweeps, drag calibration and the dimensional design search."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from vspm.actuation import StrokeProfile
from vspm.errors import CalibrationError, ConfigError, InfeasibleProfileError
from vspm.hydrodynamics import cycle_mean_thrust
from vspm.kinematics import ChainGeometry
from vspm.vehicle import SimulationConfig, min_duration, simulate_run, steady_speed, steady_thrust

OK = "ok"
INFEASIBLE = "infeasible_profile"

# Stroke used to score arm dimensions (0.2 Hz, 120 deg, no offset).
DESIGN_CONTROL_POINT = StrokeProfile(amplitude_deg=120.0, frequency_hz=0.2, offset_deg=0.0)

# Drag calibration target: symmetric constant-rate stroke, 120 deg at 1.0 Hz, 0.042 m/s.
ANCHOR_AMPLITUDE_DEG = 120.0
ANCHOR_FREQUENCY_HZ = 1.0
ANCHOR_SPEED_MS = 0.042


def _frange(start, stop, step):
    n = int(round((stop - start) / step))
    return tuple(round(start + k * step, 10) for k in range(n + 1))


@dataclass(frozen=True)
class SweepGrid:
    amplitudes_deg: tuple[float, ...] = _frange(60.0, 120.0, 10.0)
    frequencies_hz: tuple[float, ...] = _frange(0.3, 1.0, 0.1)
    offsets_deg: tuple[float, ...] = (0.0, 10.0, 20.0)
    accel_modes: tuple[Optional[float], ...] = (None, 100.0)
    repeats: int = 1

    def __post_init__(self):
        for name in ("amplitudes_deg", "frequencies_hz", "offsets_deg", "accel_modes"):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigError(f"sweep.{name} must not be empty")
            object.__setattr__(self, name, values)
        if any(not (a > 0) for a in self.amplitudes_deg):
            raise ConfigError("sweep amplitudes must be > 0")
        if any(not (f > 0) for f in self.frequencies_hz):
            raise ConfigError("sweep frequencies must be > 0")
        if any(a is not None and not (a > 0) for a in self.accel_modes):
            raise ConfigError("sweep accel modes must be null or > 0")
        if isinstance(self.repeats, bool) or not isinstance(self.repeats, int) or self.repeats < 1:
            raise ConfigError("sweep.repeats must be an integer >= 1")

    @classmethod
    def amplitude_frequency(cls, **kwargs):
        """The 7 x 8 symmetric constant-rate grid."""
        return cls(offsets_deg=(0.0,), accel_modes=(None,), **kwargs)

    def points(self):
        """Grid points in output order: offset, accel, amplitude, frequency."""
        for off in self.offsets_deg:
            for accel in self.accel_modes:
                for amp in self.amplitudes_deg:
                    for freq in self.frequencies_hz:
                        yield amp, freq, off, accel

    def __len__(self):
        return len(self.offsets_deg) * len(self.accel_modes) * len(self.amplitudes_deg) * len(self.frequencies_hz)


@dataclass(frozen=True)
class SweepRecord:
    amplitude_deg: float
    frequency_hz: float
    offset_deg: float
    accel_dps2: Optional[float]
    mean_speed_ms: float
    mean_thrust_N: float
    status: str = OK

    FIELDS = (
        "amplitude_deg",
        "frequency_hz",
        "offset_deg",
        "accel_dps2",
        "mean_speed_ms",
        "mean_thrust_N",
        "status",
    )

    @property
    def ok(self):
        return self.status == OK


def evaluate_point(base: SimulationConfig, amplitude, frequency, offset, accel, duration_s=10.0, dt_s=1e-3):
    try:
        config = base.with_profile(
            amplitude_deg=amplitude,
            frequency_hz=frequency,
            offset_deg=offset,
            accel_limit_dps2=accel,
        )
    except InfeasibleProfileError:
        return SweepRecord(amplitude, frequency, offset, accel, math.nan, math.nan, INFEASIBLE)
    traj = simulate_run(config, min_duration(config.profile, duration_s), dt_s)
    return SweepRecord(
        amplitude,
        frequency,
        offset,
        accel,
        steady_speed(traj, config.profile),
        steady_thrust(traj, config.profile),
    )


def _evaluate_job(job):
    return evaluate_point(*job)


def run_sweep(
    grid: SweepGrid,
    base_config: SimulationConfig,
    duration_s: float = 10.0,
    dt_s: float = 1e-3,
    threads: int = 1,
) -> list[SweepRecord]:
    """One simulation per grid point, returned in grid order.

    Runs shorter than five stroke periods are extended to five periods.
    """
    if not (0 < dt_s <= 0.01):
        raise ConfigError(f"dt_s must be in (0, 0.01], got {dt_s}")
    if not duration_s > 0:
        raise ConfigError(f"duration_s must be > 0, got {duration_s}")
    if threads < 1:
        raise ConfigError("threads must be >= 1")
    jobs = [(base_config, a, f, o, acc, duration_s, dt_s) for a, f, o, acc in grid.points()]
    if threads == 1 or len(jobs) <= 1:
        return [_evaluate_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_evaluate_job, jobs, chunksize=max(1, len(jobs) // (4 * threads))))


# -- sweep analysis --------------------------------------------------------------


def _table(records, offset=0.0, accel=None):
    """``{(amp, freq): speed}`` for ok records of one offset / accel slice."""
    return {
        (r.amplitude_deg, r.frequency_hz): r.mean_speed_ms
        for r in records
        if r.ok and r.offset_deg == offset and r.accel_dps2 == accel
    }


def monotonicity(records, offset=0.0, accel=None):
    """Check speed is non-decreasing in amplitude (fixed f) and in frequency (fixed amplitude)."""
    table = _table(records, offset, accel)
    amps = sorted({a for a, _ in table})
    freqs = sorted({f for _, f in table})
    amp_viol, freq_viol = [], []
    for f in freqs:
        series = [(a, table[a, f]) for a in amps if (a, f) in table]
        amp_viol += [(a1, f) for (a0, s0), (a1, s1) in zip(series, series[1:]) if s1 < s0]
    for a in amps:
        series = [(f, table[a, f]) for f in freqs if (a, f) in table]
        freq_viol += [(a, f1) for (f0, s0), (f1, s1) in zip(series, series[1:]) if s1 < s0]
    return {
        "amplitude_non_decreasing": not amp_viol,
        "frequency_non_decreasing": not freq_viol,
        "amplitude_violations": amp_viol,
        "frequency_violations": freq_viol,
    }


def offset_benefit(records, offset, accel=None):
    base = _table(records, 0.0, accel)
    shifted = _table(records, offset, accel)
    common = sorted(set(base) & set(shifted))
    gains = {k: shifted[k] / base[k] - 1.0 for k in common if base[k] != 0}
    return {
        "offset_deg": offset,
        "points": len(common),
        "all_non_negative": all(shifted[k] >= base[k] for k in common),
        "min_gain": min(gains.values()) if gains else None,
        "max_gain": max(gains.values()) if gains else None,
    }


def best_point(records, offset=None, accel="any"):
    pool = [
        r
        for r in records
        if r.ok and (offset is None or r.offset_deg == offset) and (accel == "any" or r.accel_dps2 == accel)
    ]
    return max(pool, key=lambda r: r.mean_speed_ms) if pool else None


def acceleration_comparison(records):
    """Relative speed change of each accelerated run against its constant-rate twin."""
    plain = {(r.amplitude_deg, r.frequency_hz, r.offset_deg): r for r in records if r.ok and r.accel_dps2 is None}
    rows = []
    for r in records:
        if r.accel_dps2 is None or not r.ok:
            continue
        twin = plain.get((r.amplitude_deg, r.frequency_hz, r.offset_deg))
        if twin is None or twin.mean_speed_ms == 0:
            continue
        rows.append(
            {
                "amplitude_deg": r.amplitude_deg,
                "frequency_hz": r.frequency_hz,
                "offset_deg": r.offset_deg,
                "accel_dps2": r.accel_dps2,
                "speed_change": r.mean_speed_ms / twin.mean_speed_ms - 1.0,
            }
        )
    return rows


def summarize_sweep(records):
    summary = {
        "records": len(records),
        "infeasible": sum(not r.ok for r in records),
        "trend_checks": {},
        "best": {},
    }
    offsets = sorted({r.offset_deg for r in records})
    accels = sorted({r.accel_dps2 for r in records}, key=lambda a: -1 if a is None else a)
    for accel in accels:
        key = "constant_rate" if accel is None else f"accel_{accel:g}"
        for off in offsets:
            checks = monotonicity(records, off, accel)
            if any(r.ok for r in records if r.offset_deg == off and r.accel_dps2 == accel):
                summary["trend_checks"][f"{key}/offset_{off:g}"] = checks
            if off != 0.0 and 0.0 in offsets:
                summary["trend_checks"][f"{key}/offset_{off:g}_vs_0"] = offset_benefit(records, off, accel)
    for off in offsets:
        best = best_point(records, offset=off)
        if best is not None:
            summary["best"][f"offset_{off:g}"] = _record_dict(best)
    overall = best_point(records)
    if overall is not None:
        summary["best"]["overall"] = _record_dict(overall)
    baseline = [
        r
        for r in records
        if r.ok and r.offset_deg == 0.0 and r.accel_dps2 is None
        and r.amplitude_deg == min(x.amplitude_deg for x in records)
        and r.frequency_hz == min(x.frequency_hz for x in records)
    ]
    if baseline and overall is not None and baseline[0].mean_speed_ms > 0:
        summary["baseline"] = {
            **_record_dict(baseline[0]),
            "best_over_baseline": overall.mean_speed_ms / baseline[0].mean_speed_ms - 1.0,
        }
    comparison = acceleration_comparison(records)
    if comparison:
        summary["acceleration_comparison"] = comparison
    return summary


def _record_dict(r):
    return {name: getattr(r, name) for name in SweepRecord.FIELDS}


# -- drag calibration ----------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationResult:
    config: SimulationConfig
    speed_ms: float
    residual: float
    iterations: int


def anchor_speed(config, amplitude=ANCHOR_AMPLITUDE_DEG, frequency=ANCHOR_FREQUENCY_HZ, offset=0.0, duration_s=10.0, dt_s=1e-3):
    point = config.with_profile(amplitude_deg=amplitude, frequency_hz=frequency, offset_deg=offset, accel_limit_dps2=None)
    traj = simulate_run(point, min_duration(point.profile, duration_s), dt_s)
    return steady_speed(traj, point.profile)


def _with_coeffs(config, body_drag=None, fluid_drag=None):
    if body_drag is not None:
        config = replace(config, body=replace(config.body, body_drag_coeff=body_drag))
    if fluid_drag is not None:
        config = replace(config, environment=replace(config.environment, drag_coeff=fluid_drag))
    return config


def _log_bisect(speed_of, lo, hi, target, increasing, rel_tol, max_iter):
    """Bisect ``log(x)`` until ``speed_of(x)`` is within ``rel_tol`` of ``target``."""
    x, s, it = lo, speed_of(lo), 0
    a, b = math.log(lo), math.log(hi)
    for it in range(1, max_iter + 1):
        mid = 0.5 * (a + b)
        x = math.exp(mid)
        s = speed_of(x)
        if abs(s / target - 1.0) <= rel_tol:
            break
        if (s < target) == increasing:
            a = mid
        else:
            b = mid
    return x, s, it


def calibrate_drag(
    config: SimulationConfig,
    anchor_speed_ms: float = ANCHOR_SPEED_MS,
    amplitude_deg: float = ANCHOR_AMPLITUDE_DEG,
    frequency_hz: float = ANCHOR_FREQUENCY_HZ,
    offset_deg: float = 0.0,
    tunables: Sequence[str] = ("body_drag_coeff",),
    body_bounds=(1e-3, 1e4),
    fluid_bounds=(1e-4, 10.0),
    rel_tol: float = 1e-4,
    accept_tol: float = 0.02,
    max_iter: int = 100,
    duration_s: float = 10.0,
    dt_s: float = 1e-3,
) -> CalibrationResult:
    """Tune the body drag coefficient so the anchor run reaches ``anchor_speed_ms``.

    Steady speed falls monotonically with body drag, so a log-space bisection
    brackets it. With ``tunables`` including ``"drag_coeff"``, an anchor that
    stays out of reach at a body-drag bound is pursued by bisecting the fluid
    drag coefficient with the body drag held at that bound.
    """
    tunables = tuple(tunables)
    unknown = set(tunables) - {"body_drag_coeff", "drag_coeff"}
    if unknown or "body_drag_coeff" not in tunables:
        raise ConfigError(f"tunables must be ('body_drag_coeff',) or ('body_drag_coeff', 'drag_coeff'), got {tunables}")
    if not (math.isfinite(anchor_speed_ms) and anchor_speed_ms > 0):
        raise ConfigError(f"anchor speed must be > 0, got {anchor_speed_ms}")
    point_profile = replace(
        config.profile, amplitude_deg=amplitude_deg, frequency_hz=frequency_hz, offset_deg=offset_deg, accel_limit_dps2=None
    )
    thrust = cycle_mean_thrust(point_profile, config.geometry, config.paddle, config.environment, dt_s)
    if not thrust > 0:
        raise CalibrationError(f"anchor point produces no net thrust ({thrust:.3g} N); speed unreachable")

    def speed(cfg):
        return anchor_speed(cfg, amplitude_deg, frequency_hz, offset_deg, duration_s, dt_s)

    current = speed(config)
    if abs(current / anchor_speed_ms - 1.0) <= rel_tol:
        return CalibrationResult(config, current, current / anchor_speed_ms - 1.0, 0)

    lo, hi = body_bounds
    fast = speed(_with_coeffs(config, body_drag=lo))
    slow = speed(_with_coeffs(config, body_drag=hi))
    if fast >= anchor_speed_ms >= slow:
        cd, s, it = _log_bisect(
            lambda x: speed(_with_coeffs(config, body_drag=x)), lo, hi, anchor_speed_ms, False, rel_tol, max_iter
        )
        result = _with_coeffs(config, body_drag=cd)
    elif "drag_coeff" in tunables:
        bound = lo if anchor_speed_ms > fast else hi
        held = _with_coeffs(config, body_drag=bound)
        flo, fhi = fluid_bounds
        s_lo = speed(_with_coeffs(held, fluid_drag=flo))
        s_hi = speed(_with_coeffs(held, fluid_drag=fhi))
        if not s_lo <= anchor_speed_ms <= s_hi:
            raise CalibrationError(
                f"anchor {anchor_speed_ms} m/s outside reachable range [{s_lo:.4g}, {s_hi:.4g}] m/s "
                f"with body_drag_coeff={bound} and drag_coeff in {fluid_bounds}"
            )
        cn, s, it = _log_bisect(
            lambda x: speed(_with_coeffs(held, fluid_drag=x)), flo, fhi, anchor_speed_ms, True, rel_tol, max_iter
        )
        result = _with_coeffs(held, fluid_drag=cn)
    else:
        raise CalibrationError(
            f"anchor {anchor_speed_ms} m/s outside reachable range [{slow:.4g}, {fast:.4g}] m/s "
            f"for body_drag_coeff in {body_bounds}"
        )
    residual = s / anchor_speed_ms - 1.0
    if abs(residual) > accept_tol:
        raise CalibrationError(f"bisection stalled with residual {residual:.3%}")
    return CalibrationResult(result, s, residual, it)


# -- dimensional search ----------------------------------------------------------------


@dataclass(frozen=True)
class DimensionBounds:
    """Search ranges (mm). Each range is ``(low, high)`` sampled every ``step_mm``."""

    joint_pitch_mm: tuple[float, float] = (90.0, 130.0)
    paddle_length_mm: tuple[float, float] = (60.0, 120.0)
    paddle_width_mm: tuple[float, float] = (40.0, 80.0)
    gap_mm: Optional[tuple[float, float]] = None
    step_mm: float = 10.0

    def __post_init__(self):
        if not self.step_mm > 0:
            raise ConfigError("step_mm must be > 0")
        for name in ("joint_pitch_mm", "paddle_length_mm", "paddle_width_mm", "gap_mm"):
            rng = getattr(self, name)
            if rng is None:
                continue
            if len(rng) != 2 or rng[0] > rng[1]:
                raise ConfigError(f"{name} must be a (low, high) pair, got {rng}")
            object.__setattr__(self, name, (float(rng[0]), float(rng[1])))

    def axis(self, name, link_thickness_mm=None):
        lo, hi = getattr(self, name)
        values = [round(v, 9) for v in np.arange(lo, hi + 0.5 * self.step_mm, self.step_mm) if v <= hi + 1e-9]
        if name == "joint_pitch_mm":
            gap_lo, gap_hi = self.gap_mm if self.gap_mm is not None else (0.0, math.inf)
            values = [v for v in values if v - link_thickness_mm > 0 and gap_lo <= v - link_thickness_mm <= gap_hi]
        return values


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    joint_pitch_mm: float
    gap_mm: float
    paddle_length_mm: float
    paddle_width_mm: float
    mean_Fy: float
    accepted: bool

    FIELDS = ("iteration", "joint_pitch_mm", "gap_mm", "paddle_length_mm", "paddle_width_mm", "mean_Fy", "accepted")


@dataclass(frozen=True)
class OptimizationResult:
    geometry: ChainGeometry
    paddle: object
    mean_Fy: float
    trace: list[TraceRow] = field(default_factory=list)
    iterations: int = 0

    @property
    def accepted(self):
        return [row for row in self.trace if row.accepted]


AXES = ("joint_pitch_mm", "paddle_length_mm", "paddle_width_mm")


def optimize_dimensions(
    bounds: DimensionBounds,
    config: SimulationConfig,
    budget: int = 30,
    control: StrokeProfile = DESIGN_CONTROL_POINT,
    dt_s: float = 1e-3,
) -> OptimizationResult:
    """Greedy coordinate descent on the cycle-mean thrust of one arm.

    Each iteration scans one axis (pitch, paddle length, paddle width in turn)
    with the other two held, and moves to the best candidate if it beats the
    incumbent. The gap follows the pitch so that pitch = thickness + gap.
    Stops after ``budget`` iterations or a full round without improvement.
    """
    if isinstance(budget, bool) or not isinstance(budget, int) or budget < 1:
        raise ConfigError(f"budget must be an integer >= 1, got {budget!r}")
    thickness = config.geometry.link_thickness_mm
    grids = {name: bounds.axis(name, thickness) for name in AXES}
    for name, values in grids.items():
        if not values:
            raise ConfigError(f"search space along {name} is empty")

    def build(dims):
        geom = ChainGeometry.from_pitch(
            dims["joint_pitch_mm"],
            link_thickness_mm=thickness,
            n_links=config.geometry.n_links,
            link_width_mm=config.geometry.link_width_mm,
            mount_angle_deg=config.geometry.mount_angle_deg,
        )
        paddle = replace(config.paddle, length_mm=dims["paddle_length_mm"], width_mm=dims["paddle_width_mm"])
        return geom, paddle

    cache = {}
    trace = []

    def evaluate(dims, iteration):
        key = tuple(dims[a] for a in AXES)
        if key not in cache:
            geom, paddle = build(dims)
            value = cycle_mean_thrust(control, geom, paddle, config.environment, dt_s, config.formula)
            cache[key] = value
            trace.append(
                TraceRow(iteration, key[0], key[0] - thickness, key[1], key[2], value, False)
            )
        return cache[key]

    current = {
        "joint_pitch_mm": config.geometry.joint_pitch_mm,
        "paddle_length_mm": config.paddle.length_mm,
        "paddle_width_mm": config.paddle.width_mm,
    }
    incumbent = None
    stale_rounds = 0
    iteration = 0
    while iteration < budget and stale_rounds < len(AXES):
        axis = AXES[iteration % len(AXES)]
        iteration += 1
        best_dims, best_val = None, -math.inf
        for value in grids[axis]:
            cand = dict(current, **{axis: value})
            val = evaluate(cand, iteration)
            if val > best_val:
                best_dims, best_val = cand, val
        if incumbent is None or best_val > incumbent:
            current, incumbent = best_dims, best_val
            stale_rounds = 0
            key = tuple(best_dims[a] for a in AXES)
            for k in range(len(trace) - 1, -1, -1):
                row = trace[k]
                if (row.joint_pitch_mm, row.paddle_length_mm, row.paddle_width_mm) == key:
                    trace[k] = replace(row, accepted=True)
                    break
        else:
            stale_rounds += 1

    geom, paddle = build(current)
    return OptimizationResult(geom, paddle, incumbent, trace, iteration)
