"""Rail-constrained surge dynamics of the robot body.

The arms are fitted in mirrored pairs, one swept forward by the mount angle
and one swept aft by the same angle. Each arm applies the offset toward its own
lateral axis. A module's thrust is the mean of the two arms of its pair::

    m dv/dt = module_count * F_pair(t) - 0.5 rho Cd A v|v| - sign(v) F_rail

Thrust is evaluated quasi-statically from the commanded stroke. With
``relative_flow`` the body speed is fed back into the paddle's relative flow,
at the cost of a per-step quadrature.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from vspm import actuation
from vspm.actuation import StrokeProfile
from vspm.errors import ConfigError, DomainError, NumericalDivergenceError
from vspm.hydrodynamics import FlowStrips, FluidEnvironment, PaddleGeometry, flow_strips, forward_thrust
from vspm.kinematics import ChainGeometry, Formula

MIN_PERIODS = 5
STEADY_PERIODS = 3
MAX_DT_S = 0.01


@dataclass(frozen=True)
class BodyModel:
    mass_kg: float = 1.5
    body_drag_coeff: float = 9.309  # calibrated to the 0.042 m/s anchor with the other defaults
    frontal_area_m2: float = 0.01
    module_count: int = 2
    rail_friction_N: float = 0.0
    relative_flow: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.mass_kg) and self.mass_kg > 0):
            raise ConfigError(f"mass_kg must be > 0, got {self.mass_kg}")
        if not (math.isfinite(self.body_drag_coeff) and self.body_drag_coeff >= 0):
            raise ConfigError(f"body_drag_coeff must be >= 0, got {self.body_drag_coeff}")
        if not (math.isfinite(self.frontal_area_m2) and self.frontal_area_m2 > 0):
            raise ConfigError(f"frontal_area_m2 must be > 0, got {self.frontal_area_m2}")
        if isinstance(self.module_count, bool) or not isinstance(self.module_count, int) or self.module_count < 1:
            raise ConfigError(f"module_count must be an integer >= 1, got {self.module_count!r}")
        if not (math.isfinite(self.rail_friction_N) and self.rail_friction_N >= 0):
            raise ConfigError(f"rail_friction_N must be >= 0, got {self.rail_friction_N}")


@dataclass(frozen=True)
class SimulationConfig:
    geometry: ChainGeometry = field(default_factory=ChainGeometry)
    paddle: PaddleGeometry = field(default_factory=PaddleGeometry)
    environment: FluidEnvironment = field(default_factory=FluidEnvironment)
    body: BodyModel = field(default_factory=BodyModel)
    profile: StrokeProfile = field(default_factory=StrokeProfile)
    formula: Formula = "exact"

    def with_profile(self, **changes):
        return replace(self, profile=replace(self.profile, **changes))

    def digest(self):
        return config_digest(asdict(self))


def config_digest(payload) -> str:
    """Short content hash of a JSON-serialisable mapping."""
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]


@dataclass(frozen=True)
class Trajectory:
    time_s: np.ndarray
    bend_deg: np.ndarray
    thrust_N: np.ndarray
    position_m: np.ndarray
    velocity_ms: np.ndarray
    config_digest: str
    dt_s: float

    COLUMNS = ("time_s", "bend_deg", "thrust_N", "position_m", "velocity_ms")

    def __len__(self):
        return len(self.time_s)

    def columns(self):
        return [getattr(self, name) for name in self.COLUMNS]


def _arm_pair(config: SimulationConfig):
    geom = config.geometry
    rear_geom = replace(geom, mount_angle_deg=-geom.mount_angle_deg)
    return ((geom, config.profile), (rear_geom, actuation.mirrored(config.profile)))


def pair_thrust(times, config: SimulationConfig, body_speed=None):
    """Mean propulsion (N) of the two mirrored arms of one module."""
    total = 0.0
    for geom, profile in _arm_pair(config):
        total = total + forward_thrust(
            times, profile, geom, config.paddle, config.environment, config.formula, body_speed
        )
    return 0.5 * total


def _check_run(config, duration_s, dt_s):
    if not (math.isfinite(dt_s) and 0 < dt_s <= MAX_DT_S):
        raise ConfigError(f"dt_s must be in (0, {MAX_DT_S}], got {dt_s}")
    min_duration = MIN_PERIODS * config.profile.period_s
    if not (math.isfinite(duration_s) and duration_s >= min_duration * (1 - 1e-12)):
        raise ConfigError(
            f"duration {duration_s} s is shorter than {MIN_PERIODS} stroke periods ({min_duration:.6g} s)"
        )


def min_duration(profile: StrokeProfile, duration_s: float) -> float:
    """``duration_s`` raised, if needed, to cover the minimum number of periods."""
    return max(duration_s, MIN_PERIODS * profile.period_s)


def simulate_run(config: SimulationConfig, duration_s: float = 10.0, dt_s: float = 1e-3) -> Trajectory:
    """Integrate the surge dynamics from rest with fixed-step explicit Euler."""
    _check_run(config, duration_s, dt_s)
    n = int(math.ceil(duration_s / dt_s - 1e-9))
    times = np.arange(n + 1) * dt_s
    body = config.body
    k_drag = 0.5 * config.environment.density_kgm3 * body.body_drag_coeff * body.frontal_area_m2
    count = body.module_count
    inv_m = 1.0 / body.mass_kg
    friction = body.rail_friction_N

    vel = np.empty(n + 1)
    pos = np.empty(n + 1)
    if body.relative_flow:
        thrust = np.empty(n + 1)
        arms = [flow_strips(times, prof, g, config.paddle, config.environment, config.formula) for g, prof in _arm_pair(config)]
        strips = FlowStrips.stack(arms, (0.5 * count, 0.5 * count))
    else:
        thrust = count * pair_thrust(times, config)

    v = 0.0
    x = 0.0
    for k in range(n + 1):
        vel[k] = v
        pos[k] = x
        if body.relative_flow:
            thrust[k] = strips.thrust(k, v)
        if k == n:
            break
        f = thrust[k] - k_drag * v * abs(v)
        if friction > 0:
            if v != 0.0:
                f -= math.copysign(friction, v)
            elif abs(f) > friction:
                f -= math.copysign(friction, f)
            else:
                f = 0.0
        v_new = v + dt_s * f * inv_m
        # sliding friction stops the body at zero instead of reversing it
        if friction > 0 and v * v_new < 0:
            v_new = 0.0
        x += dt_s * v
        v = v_new
        if not (math.isfinite(v) and math.isfinite(x)):
            raise NumericalDivergenceError(f"non-finite state at step {k + 1} (t={times[k + 1]:.6g} s)", step=k + 1)

    bend, _ = actuation.stroke_states(times, config.profile)
    return Trajectory(times, bend, thrust, pos, vel, config.digest(), dt_s)


def steady_window(traj: Trajectory, profile: StrokeProfile) -> slice:
    """Index range covering the final three whole stroke periods."""
    m = int(round(STEADY_PERIODS * profile.period_s / traj.dt_s))
    needed = MIN_PERIODS * profile.period_s
    span = traj.time_s[-1] - traj.time_s[0] + traj.dt_s
    if span < needed * (1 - 1e-9) or m < 1 or m > len(traj):
        raise DomainError(
            f"trajectory spans {span:.6g} s; steady speed needs {MIN_PERIODS} periods ({needed:.6g} s)"
        )
    return slice(len(traj) - m, len(traj))


def steady_speed(traj: Trajectory, profile: StrokeProfile) -> float:
    """Mean velocity (m/s) over the final three stroke periods."""
    return float(np.mean(traj.velocity_ms[steady_window(traj, profile)]))


def steady_thrust(traj: Trajectory, profile: StrokeProfile) -> float:
    """Mean total body thrust (N) over the final three stroke periods."""
    return float(np.mean(traj.thrust_N[steady_window(traj, profile)]))


def steady_body_drag(traj: Trajectory, profile: StrokeProfile, config: SimulationConfig) -> float:
    body = config.body
    k = 0.5 * config.environment.density_kgm3 * body.body_drag_coeff * body.frontal_area_m2
    v = traj.velocity_ms[steady_window(traj, profile)]
    return float(np.mean(k * v * np.abs(v) + body.rail_friction_N * np.sign(v)))
