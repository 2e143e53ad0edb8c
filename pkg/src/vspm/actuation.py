"""Commanded bend angle y(t) from amplitude, frequency, offset and acceleration.

Each period is two half-strokes. The rising half (y increasing) is the power
stroke, the falling half the recovery stroke. Without an acceleration limit
each half is a constant-rate ramp (triangle wave). With one, each half is a
symmetric accelerate-cruise-decelerate trapezoid that stays within the limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Literal

import numpy as np

from vspm.errors import ConfigError, DomainError, InfeasibleProfileError

POWER = "power"
RECOVERY = "recovery"

PHASES = ("start_at_min", "start_at_center")
FALLBACKS = ("error", "truncate")

# phase tolerance for "exactly at a reversal"
_TURN_EPS = 1e-9


def max_accel_limited_sweep(accel_dps2, frequency_hz):
    """Largest sweep (deg) a bang-bang half-stroke covers in ``1/(2f)`` seconds."""
    return accel_dps2 / (16.0 * frequency_hz**2)


@dataclass(frozen=True)
class StrokeProfile:
    """Actuation waveform parameters.

    ``accel_fallback="truncate"`` clips an infeasible sweep to the largest one
    the acceleration limit allows at the commanded frequency instead of
    raising :class:`InfeasibleProfileError`.
    """

    amplitude_deg: float = 120.0
    frequency_hz: float = 1.0
    offset_deg: float = 0.0
    accel_limit_dps2: float | None = None
    phase: Literal["start_at_min", "start_at_center"] = "start_at_min"
    accel_fallback: Literal["error", "truncate"] = "error"

    def __post_init__(self):
        if not (math.isfinite(self.amplitude_deg) and self.amplitude_deg > 0):
            raise ConfigError(f"amplitude_deg must be > 0, got {self.amplitude_deg}")
        if not (math.isfinite(self.frequency_hz) and self.frequency_hz > 0):
            raise ConfigError(f"frequency_hz must be > 0, got {self.frequency_hz}")
        if not math.isfinite(self.offset_deg):
            raise ConfigError("offset_deg must be finite")
        if self.phase not in PHASES:
            raise ConfigError(f"phase must be one of {PHASES}, got {self.phase!r}")
        if self.accel_fallback not in FALLBACKS:
            raise ConfigError(f"accel_fallback must be one of {FALLBACKS}, got {self.accel_fallback!r}")
        if self.accel_limit_dps2 is not None:
            if not (math.isfinite(self.accel_limit_dps2) and self.accel_limit_dps2 > 0):
                raise ConfigError(f"accel_limit_dps2 must be > 0, got {self.accel_limit_dps2}")
            limit = max_accel_limited_sweep(self.accel_limit_dps2, self.frequency_hz)
            if self.amplitude_deg > limit and self.accel_fallback == "error":
                raise InfeasibleProfileError(
                    f"alpha={self.accel_limit_dps2} deg/s^2 covers at most {limit:.6g} deg "
                    f"per half-stroke at f={self.frequency_hz} Hz; "
                    f"amplitude {self.amplitude_deg} deg is infeasible"
                )

    @property
    def period_s(self):
        return 1.0 / self.frequency_hz

    @property
    def sweep_deg(self):
        """Sweep actually executed (differs from amplitude only when truncated)."""
        if self.accel_limit_dps2 is None:
            return self.amplitude_deg
        return min(self.amplitude_deg, max_accel_limited_sweep(self.accel_limit_dps2, self.frequency_hz))

    @property
    def bend_min_deg(self):
        return self.offset_deg - 0.5 * self.sweep_deg

    @property
    def bend_max_deg(self):
        return self.offset_deg + 0.5 * self.sweep_deg

    @property
    def accel_time_s(self):
        """Duration of the acceleration ramp in each half-stroke (0 for triangle)."""
        if self.accel_limit_dps2 is None:
            return 0.0
        half = 0.5 * self.period_s
        disc = half * half - 4.0 * self.sweep_deg / self.accel_limit_dps2
        return 0.5 * (half - math.sqrt(max(disc, 0.0)))

    @property
    def peak_rate_dps(self):
        if self.accel_limit_dps2 is None:
            return 2.0 * self.sweep_deg * self.frequency_hz
        return self.accel_limit_dps2 * self.accel_time_s


def stroke_phase(t_s, profile: StrokeProfile):
    """Fraction of the period in ``[0, 1)``; 0 is the start of a power stroke."""
    t = np.asarray(t_s, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    shift = 0.25 if profile.phase == "start_at_center" else 0.0
    s = np.mod(t * profile.frequency_hz + shift, 1.0)
    # snap values within rounding of a reversal onto it
    s = np.where(np.abs(s - 1.0) < _TURN_EPS, 0.0, s)
    s = np.where(np.abs(s - 0.5) < _TURN_EPS, 0.5, s)
    return np.where(np.abs(s) < _TURN_EPS, 0.0, s)


def _half_stroke(tau, profile: StrokeProfile):
    """Progress (deg) and speed (deg/s) at time ``tau`` into a half-stroke."""
    sweep = profile.sweep_deg
    half = 0.5 * profile.period_s
    if profile.accel_limit_dps2 is None:
        rate = sweep / half
        return rate * tau, np.full_like(tau, rate)
    a = profile.accel_limit_dps2
    ta = profile.accel_time_s
    vc = a * ta
    rem = half - tau
    pos = np.where(
        tau < ta,
        0.5 * a * tau**2,
        np.where(rem > ta, 0.5 * a * ta**2 + vc * (tau - ta), sweep - 0.5 * a * rem**2),
    )
    speed = np.where(tau < ta, a * tau, np.where(rem > ta, vc, a * rem))
    return pos, speed


def stroke_states(t_s, profile: StrokeProfile):
    """Vectorised :func:`stroke_state`; returns ``(bend_deg, rate_dps)`` arrays."""
    s = stroke_phase(t_s, profile)
    rising = s < 0.5
    tau = np.where(rising, s, s - 0.5) * profile.period_s
    pos, speed = _half_stroke(tau, profile)
    bend = np.where(rising, profile.bend_min_deg + pos, profile.bend_max_deg - pos)
    rate = np.where(rising, speed, -speed)
    # a triangle wave has no defined rate at a reversal; use the mean of both sides
    rate = np.where((s == 0.0) | (s == 0.5), 0.0, rate)
    return bend, rate


def stroke_state(t_s: float, profile: StrokeProfile) -> tuple[float, float]:
    """Commanded ``(bend_deg, bend_rate_dps)`` at time ``t_s``."""
    bend, rate = stroke_states(np.array([t_s], dtype=float), profile)
    return float(bend[0]), float(rate[0])


def stroke_directions(t_s, profile: StrokeProfile):
    """Boolean array, True during the power stroke (reversals report the upcoming half)."""
    return stroke_phase(t_s, profile) < 0.5


def stroke_direction(t_s: float, profile: StrokeProfile) -> str:
    return POWER if bool(stroke_directions(np.array([t_s]), profile)[0]) else RECOVERY


def time_since_reversal(t_s, profile: StrokeProfile):
    s = stroke_phase(t_s, profile)
    return np.mod(s, 0.5) * profile.period_s


def mirrored(profile: StrokeProfile) -> StrokeProfile:
    """Profile for the mirror-image arm: same timing, offset reflected."""
    return replace(profile, offset_deg=-profile.offset_deg)
