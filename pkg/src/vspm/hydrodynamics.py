"""Blade-element drag on the chain links and the passive paddle.

Every surface element feels normal quadratic drag ``-C * b * rho * |w| w v``,
where ``w`` is its velocity component along the link normal ``v`` and ``b``
the surface width. Integrals along the arc use composite Simpson.

Forces come out of the element model in the chain frame (the frame of
:mod:`vspm.kinematics`). The body frame is the chain frame rotated by
``180 deg + mount_angle``; its +y axis is the direction of travel. With this
convention a rising bend (``y_dot > 0``) drives the paddle aft, so the rising
half-stroke is the power stroke.

The paddle is a rigid ``L x W`` plate continuing the tip link from
``beta = l1`` to ``l1 + L``. Its hinge is reduced to two projected-area
states. After each stroke reversal it keeps the previous state for
``flip_delay_s`` seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from vspm import actuation
from vspm.actuation import StrokeProfile
from vspm.errors import ConfigError
from vspm.kinematics import ChainGeometry, ChainState, Formula, link_normals, normal_speed
from vspm.quadrature import check_node_count, simpson_nodes


@dataclass(frozen=True)
class FluidEnvironment:
    density_kgm3: float = 1000.0
    # effective coefficient of the element drag law; no ½ factor
    drag_coeff: float = 0.05
    link_drag_enabled: bool = False
    quadrature_nodes: int = 33

    def __post_init__(self):
        if not (math.isfinite(self.density_kgm3) and self.density_kgm3 > 0):
            raise ConfigError(f"density_kgm3 must be > 0, got {self.density_kgm3}")
        if not (math.isfinite(self.drag_coeff) and self.drag_coeff > 0):
            raise ConfigError(f"drag_coeff must be > 0, got {self.drag_coeff}")
        check_node_count(self.quadrature_nodes)


@dataclass(frozen=True)
class PaddleGeometry:
    length_mm: float = 90.0
    width_mm: float = 60.0
    recovery_area_factor: float = 0.2
    flip_delay_s: float = 0.1

    def __post_init__(self):
        if not (math.isfinite(self.length_mm) and self.length_mm > 0):
            raise ConfigError(f"length_mm must be > 0, got {self.length_mm}")
        if not (math.isfinite(self.width_mm) and self.width_mm > 0):
            raise ConfigError(f"width_mm must be > 0, got {self.width_mm}")
        if not (0.0 < self.recovery_area_factor <= 1.0):
            raise ConfigError(
                f"recovery_area_factor must be in (0, 1], got {self.recovery_area_factor}"
            )
        if not (math.isfinite(self.flip_delay_s) and self.flip_delay_s >= 0):
            raise ConfigError(f"flip_delay_s must be >= 0, got {self.flip_delay_s}")


class PaddleMode(str, Enum):
    CLOSED_FULL_AREA = "closed_full_area"
    OPEN_REDUCED_AREA = "open_reduced_area"
    TRANSITIONING = "transitioning"


@dataclass(frozen=True)
class PaddleState:
    mode: PaddleMode
    transition_elapsed_s: float
    area_factor: float


@dataclass(frozen=True)
class ForceSample:
    """Reaction of one arm on the body, body frame (N)."""

    force_N: np.ndarray
    time_s: float
    per_link_N: list[np.ndarray] = field(default_factory=list)
    paddle_N: np.ndarray = field(default_factory=lambda: np.zeros(2))

    @property
    def propulsion_N(self):
        return float(self.force_N[1])


# -- paddle ------------------------------------------------------------------


def area_factors(t_s, profile: StrokeProfile, paddle: PaddleGeometry):
    """Active projected-area factor at each time in ``t_s``."""
    power = actuation.stroke_directions(t_s, profile)
    stale = actuation.time_since_reversal(t_s, profile) < paddle.flip_delay_s
    full = power != stale  # power and settled, or recovery and still closed
    return np.where(full, 1.0, paddle.recovery_area_factor)


def paddle_state(t_s: float, profile: StrokeProfile, paddle: PaddleGeometry) -> PaddleState:
    t = np.array([t_s], dtype=float)
    elapsed = float(actuation.time_since_reversal(t, profile)[0])
    factor = float(area_factors(t, profile, paddle)[0])
    if elapsed < paddle.flip_delay_s:
        mode = PaddleMode.TRANSITIONING
    elif actuation.stroke_direction(t_s, profile) == actuation.POWER:
        mode = PaddleMode.CLOSED_FULL_AREA
    else:
        mode = PaddleMode.OPEN_REDUCED_AREA
    return PaddleState(mode=mode, transition_elapsed_s=elapsed, area_factor=factor)


# -- element drag --------------------------------------------------------------


def _relative_normal_speed(i, beta_m, bend_rad, rate_rad, geom, formula, body_speed):
    w = normal_speed(i, beta_m, bend_rad, rate_rad, geom, formula)
    if body_speed is not None:
        # water streams aft past a body moving forward at body_speed
        phi = i * bend_rad / geom.n_links
        mount = math.radians(geom.mount_angle_deg)
        w = w - (np.asarray(body_speed, dtype=float) * np.cos(phi - mount))[..., None]
    return w


def _strip_force(i, lo_m, hi_m, width_m, bend_rad, rate_rad, geom, env, formula, body_speed):
    """Chain-frame drag (T, 2) on a strip of link ``i`` spanning ``[lo_m, hi_m]``."""
    beta, weights = simpson_nodes(lo_m, hi_m, env.quadrature_nodes)
    w = _relative_normal_speed(i, beta, bend_rad, rate_rad, geom, formula, body_speed)
    integral = (np.abs(w) * w) @ weights
    magnitude = -env.drag_coeff * width_m * env.density_kgm3 * integral
    return magnitude[..., None] * link_normals(i, bend_rad, geom)


def _link_width_m(geom):
    if geom.link_width_mm is None:
        raise ConfigError("link drag needs an explicit link_width_mm")
    return geom.link_width_mm * 1e-3


def _as_arrays(state):
    return (
        np.array([math.radians(state.bend_deg)]),
        np.array([math.radians(state.bend_rate_dps)]),
    )


def link_drag(
    i: int,
    state: ChainState,
    geom: ChainGeometry,
    env: FluidEnvironment,
    formula: Formula = "exact",
) -> np.ndarray:
    """Chain-frame drag (N) on link ``i`` over its full pitch."""
    if not env.link_drag_enabled:
        raise ConfigError("link drag requested but link_drag_enabled is false")
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= geom.n_links:
        raise ConfigError(f"link index must be in 1..{geom.n_links}, got {i!r}")
    y, rate = _as_arrays(state)
    l1 = geom.joint_pitch_mm * 1e-3
    return _strip_force(i, 0.0, l1, _link_width_m(geom), y, rate, geom, env, formula, None)[0]


def paddle_drag(
    t_s: float,
    state: ChainState,
    geom: ChainGeometry,
    paddle: PaddleGeometry,
    env: FluidEnvironment,
    pstate: PaddleState,
    formula: Formula = "exact",
) -> np.ndarray:
    """Chain-frame drag (N) on the paddle plate, scaled by the active area factor."""
    y, rate = _as_arrays(state)
    return pstate.area_factor * _paddle_force(y, rate, geom, paddle, env, formula, None)[0]


def _paddle_force(bend_rad, rate_rad, geom, paddle, env, formula, body_speed):
    l1 = geom.joint_pitch_mm * 1e-3
    return _strip_force(
        geom.n_links,
        l1,
        l1 + paddle.length_mm * 1e-3,
        paddle.width_mm * 1e-3,
        bend_rad,
        rate_rad,
        geom,
        env,
        formula,
        body_speed,
    )


# -- body frame -------------------------------------------------------------------


def to_body_frame(force_chain, mount_angle_deg):
    """Reaction on the body in body axes: ``-R(-mount) @ F``."""
    m = math.radians(mount_angle_deg)
    c, s = math.cos(m), math.sin(m)
    fx = force_chain[..., 0]
    fy = force_chain[..., 1]
    return -np.stack([c * fx + s * fy, -s * fx + c * fy], axis=-1)


def module_thrust(
    t_s: float,
    profile: StrokeProfile,
    geom: ChainGeometry,
    paddle: PaddleGeometry,
    env: FluidEnvironment,
    formula: Formula = "exact",
) -> ForceSample:
    """Instantaneous reaction of one arm on the body at the commanded stroke state."""
    bend, rate = actuation.stroke_state(t_s, profile)
    state = ChainState(bend, rate, t_s)
    pstate = paddle_state(t_s, profile, paddle)
    per_link = []
    if env.link_drag_enabled:
        for i in range(1, geom.n_links + 1):
            per_link.append(to_body_frame(link_drag(i, state, geom, env, formula), geom.mount_angle_deg))
    pad = to_body_frame(
        paddle_drag(t_s, state, geom, paddle, env, pstate, formula), geom.mount_angle_deg
    )
    total = pad + sum(per_link, np.zeros(2))
    return ForceSample(force_N=total, time_s=float(t_s), per_link_N=per_link, paddle_N=pad)


def forward_thrust(
    t_s,
    profile: StrokeProfile,
    geom: ChainGeometry,
    paddle: PaddleGeometry,
    env: FluidEnvironment,
    formula: Formula = "exact",
    body_speed=None,
):
    """Body-frame propulsion force (N) of one arm at every time in ``t_s``.

    ``body_speed`` (m/s, scalar or per-sample) switches on the relative-flow
    correction; ``None`` evaluates the commanded kinematics in still water.
    """
    t = np.atleast_1d(np.asarray(t_s, dtype=float))
    bend_deg, rate_dps = actuation.stroke_states(t, profile)
    y = np.radians(bend_deg)
    rate = np.radians(rate_dps)
    area = area_factors(t, profile, paddle)
    force = area[:, None] * _paddle_force(y, rate, geom, paddle, env, formula, body_speed)
    if env.link_drag_enabled:
        width = _link_width_m(geom)
        l1 = geom.joint_pitch_mm * 1e-3
        for i in range(1, geom.n_links + 1):
            force = force + _strip_force(i, 0.0, l1, width, y, rate, geom, env, formula, body_speed)
    return to_body_frame(force, geom.mount_angle_deg)[:, 1]


@dataclass(frozen=True)
class FlowStrips:
    """Precomputed terms for forward thrust under a body speed that is not yet known.

    At body speed ``V`` the forward force at sample ``k`` is
    ``scale[k] @ sum(weights * |w| * w, axis=-1)`` where
    ``w = still[k] - V * drift[k][:, None]``.
    """

    still: np.ndarray  # (T, S, B) still-water normal speed (m/s)
    drift: np.ndarray  # (T, S) normal component of a unit body speed
    scale: np.ndarray  # (T, S) signed force factor, body +y
    weights: np.ndarray  # (S, B) quadrature weights

    def thrust(self, k, body_speed):
        w = self.still[k] - body_speed * self.drift[k][:, None]
        return float(self.scale[k] @ np.sum(self.weights * np.abs(w) * w, axis=-1))

    @staticmethod
    def stack(parts, factors):
        return FlowStrips(
            np.concatenate([p.still for p in parts], axis=1),
            np.concatenate([p.drift for p in parts], axis=1),
            np.concatenate([f * p.scale for p, f in zip(parts, factors)], axis=1),
            np.concatenate([p.weights for p in parts], axis=0),
        )


def flow_strips(
    t_s,
    profile: StrokeProfile,
    geom: ChainGeometry,
    paddle: PaddleGeometry,
    env: FluidEnvironment,
    formula: Formula = "exact",
) -> FlowStrips:
    """Split :func:`forward_thrust` with relative flow into per-strip arrays."""
    t = np.atleast_1d(np.asarray(t_s, dtype=float))
    bend_deg, rate_dps = actuation.stroke_states(t, profile)
    y = np.radians(bend_deg)
    rate = np.radians(rate_dps)
    l1 = geom.joint_pitch_mm * 1e-3
    mount = math.radians(geom.mount_angle_deg)
    c, s = math.cos(mount), math.sin(mount)
    strips = [(geom.n_links, l1, l1 + paddle.length_mm * 1e-3, paddle.width_mm * 1e-3, area_factors(t, profile, paddle))]
    if env.link_drag_enabled:
        width = _link_width_m(geom)
        strips += [(i, 0.0, l1, width, np.ones_like(t)) for i in range(1, geom.n_links + 1)]
    still, drift, scale, weights = [], [], [], []
    for i, lo, hi, width, area in strips:
        beta, w8 = simpson_nodes(lo, hi, env.quadrature_nodes)
        still.append(normal_speed(i, beta, y, rate, geom, formula))
        phi = i * y / geom.n_links
        drift.append(np.cos(phi - mount))
        normal = link_normals(i, y, geom)
        # body +y component of the reaction to a chain-frame force along the normal
        body_y = s * normal[:, 0] - c * normal[:, 1]
        scale.append(-env.drag_coeff * width * env.density_kgm3 * area * body_y)
        weights.append(w8)
    return FlowStrips(
        np.stack(still, axis=1), np.stack(drift, axis=1), np.stack(scale, axis=1), np.stack(weights)
    )


def cycle_times(profile: StrokeProfile, dt_s=1e-3):
    """Uniform samples covering exactly one period, spacing as close to ``dt_s`` as fits."""
    n = max(int(round(profile.period_s / dt_s)), 2)
    return np.arange(n) * (profile.period_s / n)


def cycle_mean_thrust(profile, geom, paddle, env, dt_s=1e-3, formula: Formula = "exact"):
    """Period-averaged propulsion force (N) of one arm."""
    return float(np.mean(forward_thrust(cycle_times(profile, dt_s), profile, geom, paddle, env, formula)))
