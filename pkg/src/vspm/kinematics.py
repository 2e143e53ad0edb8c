"""Planar kinematics of the N-link cable-driven chain.

The cable drive spreads the total bend ``y`` evenly, so link ``i`` sits at the
absolute angle ``i*y/N``. Link 1 starts at the chain base (the frame origin),
link ``i`` starts at the end of link ``i-1``, and ``beta`` measures the
distance from the start of a link along its axis.

Public functions take millimetres and degrees. The vectorised helpers at the
bottom work in radians and metres and are what the hydrodynamics module uses
in its inner loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from vspm.errors import ConfigError, DomainError

Formula = Literal["exact", "uniform_rate"]
FORMULAS = ("exact", "uniform_rate")

_PITCH_RTOL = 1e-9


@dataclass(frozen=True)
class ChainGeometry:
    """Link count and dimensions of the continuum chain.

    ``mount_angle_deg`` is the sweep of the chain's neutral axis away from the
    body's lateral axis (positive = swept toward the bow). It only matters when
    forces are resolved in the body frame.
    """

    n_links: int = 3
    joint_pitch_mm: float = 110.0
    gap_mm: float = 80.0
    link_thickness_mm: float = 30.0
    link_width_mm: float | None = None
    mount_angle_deg: float = 45.0

    def __post_init__(self):
        if isinstance(self.n_links, bool) or not isinstance(self.n_links, (int, np.integer)):
            raise ConfigError(f"n_links must be an integer, got {self.n_links!r}")
        if self.n_links < 1:
            raise ConfigError(f"n_links must be >= 1, got {self.n_links}")
        for name in ("joint_pitch_mm", "gap_mm", "link_thickness_mm"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive length, got {value}")
        if self.link_width_mm is not None and not (
            math.isfinite(self.link_width_mm) and self.link_width_mm > 0
        ):
            raise ConfigError(f"link_width_mm must be positive, got {self.link_width_mm}")
        if not math.isfinite(self.mount_angle_deg):
            raise ConfigError("mount_angle_deg must be finite")
        expected = self.link_thickness_mm + self.gap_mm
        if abs(self.joint_pitch_mm - expected) > _PITCH_RTOL * expected:
            raise ConfigError(
                f"joint_pitch_mm ({self.joint_pitch_mm}) must equal "
                f"link_thickness_mm + gap_mm ({expected})"
            )

    @classmethod
    def from_pitch(cls, joint_pitch_mm, link_thickness_mm=30.0, **kwargs):
        """Build a geometry from the pitch, deriving the gap from ``l1 = T + h0``."""
        return cls(
            joint_pitch_mm=joint_pitch_mm,
            gap_mm=joint_pitch_mm - link_thickness_mm,
            link_thickness_mm=link_thickness_mm,
            **kwargs,
        )


@dataclass(frozen=True)
class ChainState:
    bend_deg: float
    bend_rate_dps: float = 0.0
    time_s: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.bend_deg) and math.isfinite(self.bend_rate_dps)):
            raise DomainError("chain state must be finite")


@dataclass(frozen=True)
class LinkFrame:
    u: np.ndarray  # along the link
    v: np.ndarray  # normal, u rotated by +90 deg


@dataclass(frozen=True)
class PointKinematics:
    position_mm: np.ndarray
    velocity_mms: np.ndarray
    perp_velocity_mms: np.ndarray
    link_index: int
    arc_mm: float


def _check_link(i, geom):
    if isinstance(i, bool) or not isinstance(i, (int, np.integer)) or not 1 <= i <= geom.n_links:
        raise DomainError(f"link index must be in 1..{geom.n_links}, got {i!r}")


def _check_arc(beta_mm, geom):
    if not (0.0 <= beta_mm <= geom.joint_pitch_mm):
        raise DomainError(f"arc length must be in [0, {geom.joint_pitch_mm}] mm, got {beta_mm}")


def _check_formula(formula):
    if formula not in FORMULAS:
        raise ConfigError(f"unknown velocity formula {formula!r}; expected one of {FORMULAS}")


def _unit(angle_rad):
    return np.array([math.cos(angle_rad), math.sin(angle_rad)])


def _normal(angle_rad):
    return np.array([-math.sin(angle_rad), math.cos(angle_rad)])


def link_frame(i: int, state: ChainState, geom: ChainGeometry) -> LinkFrame:
    _check_link(i, geom)
    phi = i * math.radians(state.bend_deg) / geom.n_links
    return LinkFrame(u=_unit(phi), v=_normal(phi))


def _position(i, beta_mm, y_rad, geom):
    n, l1 = geom.n_links, geom.joint_pitch_mm
    r = np.zeros(2)
    # j = 0 term deliberately kept: it cancels the trailing -l1
    for j in range(i):
        r += l1 * _unit(j * y_rad / n)
    r += beta_mm * _unit(i * y_rad / n)
    r[0] -= l1
    return r


def point_position(i: int, beta_mm: float, state: ChainState, geom: ChainGeometry) -> np.ndarray:
    """Position (mm) of the point ``beta_mm`` along link ``i``."""
    _check_link(i, geom)
    _check_arc(beta_mm, geom)
    return _position(i, beta_mm, math.radians(state.bend_deg), geom)


def _velocity(i, beta_mm, y_rad, rate_rad, geom, formula):
    n, l1 = geom.n_links, geom.joint_pitch_mm
    r = np.zeros(2)
    for j in range(i):
        factor = j if formula == "exact" else 1
        r += l1 * factor * _normal(j * y_rad / n)
    r += beta_mm * i * _normal(i * y_rad / n)
    return r * (rate_rad / n)


def point_velocity(
    i: int,
    beta_mm: float,
    state: ChainState,
    geom: ChainGeometry,
    formula: Formula = "exact",
) -> np.ndarray:
    """Velocity (mm/s) of a chain point.

    ``formula="exact"`` is the time derivative of :func:`point_position`.
    ``formula="uniform_rate"`` multiplies every preceding-joint term by the
    single factor ``y_dot/N`` instead of ``j*y_dot/N``; it is kept for
    comparison with models that use that form and is *not* the
    derivative of the position.
    """
    _check_link(i, geom)
    _check_arc(beta_mm, geom)
    _check_formula(formula)
    return _velocity(
        i, beta_mm, math.radians(state.bend_deg), math.radians(state.bend_rate_dps), geom, formula
    )


def perp_velocity(
    i: int,
    beta_mm: float,
    state: ChainState,
    geom: ChainGeometry,
    formula: Formula = "exact",
) -> np.ndarray:
    """Component of the point velocity along the link normal, as a vector."""
    vel = point_velocity(i, beta_mm, state, geom, formula)
    v = link_frame(i, state, geom).v
    return (vel @ v) * v


def point_kinematics(i, beta_mm, state, geom, formula: Formula = "exact") -> PointKinematics:
    return PointKinematics(
        position_mm=point_position(i, beta_mm, state, geom),
        velocity_mms=point_velocity(i, beta_mm, state, geom, formula),
        perp_velocity_mms=perp_velocity(i, beta_mm, state, geom, formula),
        link_index=i,
        arc_mm=float(beta_mm),
    )


def chain_pose(state: ChainState, geom: ChainGeometry) -> list[np.ndarray]:
    """Joint positions from base to tip (``n_links + 1`` points, mm)."""
    y = math.radians(state.bend_deg)
    pts = [np.zeros(2)]
    pts.extend(_position(k, geom.joint_pitch_mm, y, geom) for k in range(1, geom.n_links + 1))
    return pts


# -- vectorised helpers (SI units) -------------------------------------------


def normal_speed_coefficients(i, bend_rad, geom, formula: Formula = "exact"):
    """Split the normal speed of link ``i`` as ``rate/N * (a + i*beta)``.

    Returns ``a`` in metres, broadcast over ``bend_rad``. The normal component
    of joint ``j``'s contribution is ``l1 * c_j * cos((i - j) y / N)`` with
    ``c_j = j`` for the exact derivative.
    """
    _check_formula(formula)
    n = geom.n_links
    l1 = geom.joint_pitch_mm * 1e-3
    bend_rad = np.asarray(bend_rad, dtype=float)
    a = np.zeros_like(bend_rad)
    for j in range(1 if formula == "exact" else 0, i):
        factor = j if formula == "exact" else 1
        a = a + l1 * factor * np.cos((i - j) * bend_rad / n)
    return a


def normal_speed(i, beta_m, bend_rad, rate_rad, geom, formula: Formula = "exact"):
    """Scalar normal speed ``r_dot . v_i`` (m/s) on a ``(time, node)`` grid.

    ``bend_rad`` and ``rate_rad`` have shape ``(T,)``, ``beta_m`` shape ``(B,)``.
    ``beta_m`` may exceed the joint pitch (used for the paddle extension).
    """
    a = normal_speed_coefficients(i, bend_rad, geom, formula)
    rate = np.asarray(rate_rad, dtype=float) / geom.n_links
    return rate[..., None] * (a[..., None] + i * np.asarray(beta_m, dtype=float))


def link_normals(i, bend_rad, geom):
    """Unit normals of link ``i``, shape ``(T, 2)``."""
    phi = i * np.asarray(bend_rad, dtype=float) / geom.n_links
    return np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
