"""Joule heating, lumped temperature and phase of the gallium stiffness joints.

The joints are lumped into one thermal mass::

    C dT/dt = I^2 R duty - h (T - T_amb)

stepped with explicit Euler. The gallium is liquid when ``T >= melt_C``. An
optional latent heat pins the temperature at the melting point until that much
energy has been absorbed (or released, when cooling).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from vspm.errors import CalibrationError, ConfigError, DomainError


class Phase(str, Enum):
    SOLID = "solid"
    LIQUID = "liquid"


@dataclass(frozen=True)
class HeaterSpec:
    current_A: float = 1.0
    resistance_ohm: float = 10.0
    duty: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.current_A) and self.current_A >= 0):
            raise ConfigError(f"current_A must be >= 0, got {self.current_A}")
        if not (math.isfinite(self.resistance_ohm) and self.resistance_ohm > 0):
            raise ConfigError(f"resistance_ohm must be > 0, got {self.resistance_ohm}")
        if not (0.0 <= self.duty <= 1.0):
            raise ConfigError(f"duty must be in [0, 1], got {self.duty}")

    @property
    def power_W(self):
        return self.current_A**2 * self.resistance_ohm * self.duty


@dataclass(frozen=True)
class ThermalJointState:
    temp_C: float
    heat_capacity_JpK: float
    loss_coeff_WpK: float
    ambient_C: float = 10.0
    melt_C: float = 30.0
    latent_heat_J: float = 0.0
    latent_absorbed_J: float = 0.0
    phase: Phase | None = None

    def __post_init__(self):
        if not math.isfinite(self.temp_C):
            raise DomainError("temperature must be finite")
        if not (math.isfinite(self.heat_capacity_JpK) and self.heat_capacity_JpK > 0):
            raise ConfigError(f"heat_capacity_JpK must be > 0, got {self.heat_capacity_JpK}")
        if not (math.isfinite(self.loss_coeff_WpK) and self.loss_coeff_WpK >= 0):
            raise ConfigError(f"loss_coeff_WpK must be >= 0, got {self.loss_coeff_WpK}")
        if self.latent_heat_J < 0 or not 0 <= self.latent_absorbed_J <= self.latent_heat_J:
            raise ConfigError("latent heat bookkeeping out of range")
        expected = joint_phase(self.temp_C, self.melt_C)
        if self.phase is None:
            object.__setattr__(self, "phase", expected)
        elif Phase(self.phase) is not expected:
            raise ConfigError(f"phase {self.phase} inconsistent with {self.temp_C} degC")
        else:
            object.__setattr__(self, "phase", expected)

    @property
    def time_constant_s(self):
        if self.loss_coeff_WpK == 0:
            return math.inf
        return self.heat_capacity_JpK / self.loss_coeff_WpK


@dataclass(frozen=True)
class JointStiffness:
    """Torsional joint stiffness (N*mm/deg) per phase.

    The defaults are placeholders that only respect the measured ordering
    (solid far stiffer than liquid).
    """

    k_rigid_NmmPdeg: float = 500.0
    k_soft_NmmPdeg: float = 50.0

    def __post_init__(self):
        if not (self.k_rigid_NmmPdeg > self.k_soft_NmmPdeg > 0):
            raise ConfigError("joint stiffness requires k_rigid > k_soft > 0")

    @property
    def ratio(self):
        return self.k_rigid_NmmPdeg / self.k_soft_NmmPdeg


def joule_heat(spec: HeaterSpec, duration_s: float) -> float:
    """Heat released in ``duration_s`` seconds, ``Q = I^2 R t * duty`` (J)."""
    if not duration_s >= 0:
        raise DomainError(f"duration must be >= 0, got {duration_s}")
    return spec.current_A**2 * spec.resistance_ohm * duration_s * spec.duty


def joint_phase(temp_C: float, melt_C: float = 30.0) -> Phase:
    if not math.isfinite(temp_C):
        raise DomainError("temperature must be finite")
    return Phase.LIQUID if temp_C >= melt_C else Phase.SOLID


def joint_stiffness(phase: Phase | str, table: JointStiffness) -> float:
    phase = Phase(phase)
    return table.k_rigid_NmmPdeg if phase is Phase.SOLID else table.k_soft_NmmPdeg


def check_step(state: ThermalJointState, dt_s: float):
    if not (math.isfinite(dt_s) and dt_s > 0):
        raise ConfigError(f"dt must be > 0, got {dt_s}")
    if dt_s > state.time_constant_s:
        raise ConfigError(
            f"dt={dt_s} s exceeds the explicit-Euler stability bound "
            f"C/h = {state.time_constant_s:.6g} s"
        )


def step_temperature(state: ThermalJointState, spec: HeaterSpec, dt_s: float) -> ThermalJointState:
    """Advance the lumped joint by one explicit-Euler step of ``dt_s`` seconds."""
    check_step(state, dt_s)
    net_J = (spec.power_W - state.loss_coeff_WpK * (state.temp_C - state.ambient_C)) * dt_s
    temp = state.temp_C
    absorbed = state.latent_absorbed_J
    L, melt, cap = state.latent_heat_J, state.melt_C, state.heat_capacity_JpK

    if L > 0:
        if net_J > 0 and absorbed < L:
            if temp < melt:
                sensible = min(net_J, (melt - temp) * cap)
                temp += sensible / cap
                net_J -= sensible
            if net_J > 0 and temp >= melt:
                take = min(net_J, L - absorbed)
                absorbed += take
                net_J -= take
        elif net_J < 0 and absorbed > 0:
            if temp > melt:
                sensible = max(net_J, (melt - temp) * cap)
                temp += sensible / cap
                net_J -= sensible
            if net_J < 0 and temp <= melt:
                give = min(-net_J, absorbed)
                absorbed -= give
                net_J += give
                # still partly molten: hold at the melting point
                if absorbed > 0:
                    temp = melt
    temp += net_J / cap
    return replace(state, temp_C=temp, latent_absorbed_J=absorbed, phase=None)


@dataclass(frozen=True)
class ThermalTrace:
    time_s: np.ndarray
    temp_C: np.ndarray
    phase: list[Phase]
    cumulative_J: np.ndarray

    def crossing_time(self, level_C):
        """First time the trace reaches ``level_C`` (linear interpolation), or None."""
        idx = np.nonzero(self.temp_C >= level_C)[0]
        if idx.size == 0:
            return None
        k = int(idx[0])
        if k == 0:
            return float(self.time_s[0])
        t0, t1 = self.time_s[k - 1], self.time_s[k]
        T0, T1 = self.temp_C[k - 1], self.temp_C[k]
        return float(t0 + (level_C - T0) * (t1 - t0) / (T1 - T0))

    def first_liquid_time(self):
        for t, p in zip(self.time_s, self.phase):
            if p is Phase.LIQUID:
                return float(t)
        return None


def simulate_thermal(
    state: ThermalJointState, spec: HeaterSpec, duration_s: float, dt_s: float = 0.1
) -> ThermalTrace:
    check_step(state, dt_s)
    if not duration_s > 0:
        raise ConfigError(f"duration must be > 0, got {duration_s}")
    n = int(round(duration_s / dt_s))
    times = np.arange(n + 1) * dt_s
    temps = np.empty(n + 1)
    phases = []
    s = state
    for k in range(n + 1):
        temps[k] = s.temp_C
        phases.append(s.phase)
        if k < n:
            s = step_temperature(s, spec, dt_s)
    return ThermalTrace(times, temps, phases, spec.power_W * times)


@dataclass(frozen=True)
class ThermalCalibration:
    heat_capacity_JpK: float
    loss_coeff_WpK: float
    time_constant_s: float
    ambient_C: float


def calibrate_thermal(
    spec: HeaterSpec,
    start_C: float = 10.0,
    target_C: float = 40.0,
    target_time_s: float = 200.0,
    steady_C: float = 50.0,
    ambient_C: float | None = None,
) -> ThermalCalibration:
    """Fit ``(C, h)`` so heating from ``start_C`` reaches ``target_C`` at ``target_time_s``.

    The steady state under the heater power is pinned at ``steady_C``, which
    fixes ``h = P / (steady_C - ambient)``. The time constant is then found by
    bisection on the closed-form exponential approach.
    """
    ambient = start_C if ambient_C is None else ambient_C
    power = spec.power_W
    if power <= 0:
        raise CalibrationError("heater delivers no power; nothing to calibrate")
    if steady_C <= target_C:
        raise CalibrationError(f"steady state {steady_C} degC never reaches target {target_C} degC")
    if steady_C <= ambient or not start_C < target_C:
        raise CalibrationError("calibration needs ambient < steady state and start < target")

    def temp_at(tau):
        return steady_C - (steady_C - start_C) * math.exp(-target_time_s / tau)

    # temp_at is increasing as tau shrinks
    lo, hi = 1e-6 * target_time_s, 1e6 * target_time_s
    if not temp_at(lo) >= target_C >= temp_at(hi):
        raise CalibrationError("target not bracketed by the time-constant search range")
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if temp_at(mid) >= target_C:
            lo = mid
        else:
            hi = mid
        if hi / lo - 1.0 < 1e-14:
            break
    tau = math.sqrt(lo * hi)
    h = power / (steady_C - ambient)
    return ThermalCalibration(heat_capacity_JpK=tau * h, loss_coeff_WpK=h, time_constant_s=tau, ambient_C=ambient)
