import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vspm.actuation import StrokeProfile
from vspm.errors import ConfigError
from vspm.hydrodynamics import (
    FluidEnvironment,
    PaddleGeometry,
    PaddleMode,
    area_factors,
    cycle_mean_thrust,
    cycle_times,
    forward_thrust,
    link_drag,
    module_thrust,
    paddle_drag,
    paddle_state,
    to_body_frame,
)
from vspm.kinematics import ChainGeometry, ChainState, link_frame, point_velocity

WIDE = ChainGeometry(link_width_mm=40.0)
ENV = FluidEnvironment(link_drag_enabled=True)


def unit(a):
    return np.array([math.cos(a), math.sin(a)])


def tip_extension_position(beta_m, y, geom):
    """Position (m) of a point ``beta_m`` along the tip link, allowed past the pitch."""
    n, l1 = geom.n_links, geom.joint_pitch_mm * 1e-3
    r = sum(l1 * unit(j * y / n) for j in range(n)) + beta_m * unit(y) - np.array([l1, 0.0])
    return r


def dense_paddle_force(y_deg, rate_dps, geom, paddle, env, n=4001, h=1e-7):
    """Element drag on the paddle from finite-difference velocities and the trapezoid rule."""
    y, rate = math.radians(y_deg), math.radians(rate_dps)
    l1 = geom.joint_pitch_mm * 1e-3
    betas = np.linspace(l1, l1 + paddle.length_mm * 1e-3, n)
    normal = np.array([-math.sin(y), math.cos(y)])
    w = np.array(
        [
            (tip_extension_position(b, y + rate * h, geom) - tip_extension_position(b, y - rate * h, geom)) @ normal
            / (2 * h)
            for b in betas
        ]
    )
    integral = np.trapezoid(np.abs(w) * w, betas)
    return -env.drag_coeff * paddle.width_mm * 1e-3 * env.density_kgm3 * integral * normal


def dense_link_force(i, y_deg, rate_dps, geom, env, n=4001):
    state = ChainState(y_deg, rate_dps)
    betas = np.linspace(0.0, geom.joint_pitch_mm, n)
    v = link_frame(i, state, geom).v
    w = np.array([point_velocity(i, b, state, geom) @ v for b in betas]) * 1e-3
    integral = np.trapezoid(np.abs(w) * w, betas * 1e-3)
    return -env.drag_coeff * geom.link_width_mm * 1e-3 * env.density_kgm3 * integral * v


def full_area(profile, t):
    return paddle_state(t, profile, PaddleGeometry(flip_delay_s=0.0))


def test_first_link_drag_closed_form():
    # y = 0: w = beta * ydot / N along +y, so the integral is (ydot/N)^2 l1^3 / 3
    rate = 90.0
    omega = math.radians(rate) / 3
    l1, b = 0.110, 0.040
    expected = -ENV.drag_coeff * b * ENV.density_kgm3 * omega**2 * l1**3 / 3
    f = link_drag(1, ChainState(0.0, rate), WIDE, ENV)
    assert f == pytest.approx([0.0, expected], rel=1e-12, abs=1e-15)


def test_paddle_drag_closed_form_straight_chain():
    geom, paddle, env = ChainGeometry(), PaddleGeometry(), FluidEnvironment()
    rate = 120.0
    omega = math.radians(rate) / 3
    l1, L, W, n = 0.110, 0.090, 0.060, 3
    a = l1 * n * (n - 1) / 2  # preceding joints contribute l1*j each at y = 0
    lo, hi = a + n * l1, a + n * (l1 + L)
    integral = omega**2 * (hi**3 - lo**3) / (3 * n)
    expected = -env.drag_coeff * W * env.density_kgm3 * integral
    s = paddle_state(0.0, StrokeProfile(), PaddleGeometry(flip_delay_s=0.0))
    f = paddle_drag(0.0, ChainState(0.0, rate), geom, paddle, env, s)
    assert s.area_factor == 1.0
    assert f == pytest.approx([0.0, expected], rel=1e-12, abs=1e-15)


@settings(max_examples=25, deadline=None)
@given(st.floats(-150, 150), st.floats(-600, 600))
def test_paddle_drag_matches_dense_finite_difference_oracle(y, rate):
    geom, paddle, env = ChainGeometry(), PaddleGeometry(), FluidEnvironment()
    s = full_area(StrokeProfile(), 0.1)
    got = paddle_drag(0.0, ChainState(y, rate), geom, paddle, env, s)
    ref = dense_paddle_force(y, rate, geom, paddle, env)
    scale = 1e-4 * (np.linalg.norm(ref) + 1e-9)
    assert np.allclose(got, ref, atol=scale)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.floats(-150, 150), st.floats(-600, 600))
def test_link_drag_matches_dense_oracle(i, y, rate):
    got = link_drag(i, ChainState(y, rate), WIDE, ENV)
    ref = dense_link_force(i, y, rate, WIDE, ENV)
    assert np.allclose(got, ref, atol=1e-4 * (np.linalg.norm(ref) + 1e-9))


@given(st.floats(-150, 150), st.floats(1.0, 600), st.floats(0.1, 5.0))
def test_drag_is_odd_and_quadratic_in_rate(y, rate, k):
    geom, paddle, env = ChainGeometry(), PaddleGeometry(), FluidEnvironment()
    s = full_area(StrokeProfile(), 0.1)
    f = paddle_drag(0.0, ChainState(y, rate), geom, paddle, env, s)
    fk = paddle_drag(0.0, ChainState(y, k * rate), geom, paddle, env, s)
    fneg = paddle_drag(0.0, ChainState(y, -rate), geom, paddle, env, s)
    assert np.allclose(fk, k**2 * f, rtol=1e-10, atol=1e-15)
    assert np.allclose(fneg, -f, rtol=1e-12, atol=1e-15)


def test_area_factor_scales_paddle_drag():
    geom, env = ChainGeometry(), FluidEnvironment()
    p = PaddleGeometry(recovery_area_factor=0.3, flip_delay_s=0.0)
    prof = StrokeProfile(120.0, 1.0)
    state = ChainState(10.0, -240.0)
    rec = paddle_state(0.7, prof, p)
    assert rec.mode is PaddleMode.OPEN_REDUCED_AREA and rec.area_factor == 0.3
    full = paddle_drag(0.7, state, geom, p, env, full_area(prof, 0.2))
    assert np.allclose(paddle_drag(0.7, state, geom, p, env, rec), 0.3 * full)


def test_paddle_state_sequence():
    prof, p = StrokeProfile(120.0, 1.0), PaddleGeometry()
    assert paddle_state(0.05, prof, p).mode is PaddleMode.TRANSITIONING
    assert paddle_state(0.05, prof, p).area_factor == 0.2  # still open from the recovery
    assert paddle_state(0.3, prof, p).mode is PaddleMode.CLOSED_FULL_AREA
    assert paddle_state(0.55, prof, p).area_factor == 1.0  # still closed from the power stroke
    assert paddle_state(0.8, prof, p).mode is PaddleMode.OPEN_REDUCED_AREA
    assert paddle_state(0.55, prof, p).transition_elapsed_s == pytest.approx(0.05)


@pytest.mark.parametrize("freq,delay", [(1.0, 0.1), (0.5, 0.1), (0.3, 0.25), (1.0, 0.0)])
def test_stale_area_time_matches_event_enumeration(freq, delay):
    prof, p = StrokeProfile(120.0, freq), PaddleGeometry(flip_delay_s=delay)
    period = prof.period_s
    t = (np.arange(200000) + 0.5) * (2 * period / 200000)  # two periods, midpoint samples
    ideal = np.where(np.mod(t, period) < period / 2, 1.0, p.recovery_area_factor)
    # reversal events every half period; the plate lags each by `delay`
    stale = np.zeros_like(t, dtype=bool)
    for k in range(5):
        stale |= (t >= k * period / 2) & (t < k * period / 2 + delay)
    oracle = np.where(stale, np.where(ideal == 1.0, p.recovery_area_factor, 1.0), ideal)
    got = area_factors(t, prof, p)
    assert np.array_equal(got, oracle)
    mismatch_time = np.mean(got != ideal) * 2 * period
    assert mismatch_time == pytest.approx(2 * 2 * delay, abs=1e-4)


@given(st.floats(-1e3, 1e3), st.floats(-1e3, 1e3), st.floats(-180, 180))
def test_body_frame_is_a_reflected_rotation(fx, fy, mount):
    f = np.array([fx, fy])
    b = to_body_frame(f, mount)
    assert np.linalg.norm(b) == pytest.approx(np.linalg.norm(f), rel=1e-12, abs=1e-12)
    assert np.allclose(to_body_frame(f, 0.0), -f)


def test_module_thrust_matches_vectorised_forward_thrust():
    prof = StrokeProfile(110.0, 0.8, 15.0)
    geom, paddle = WIDE, PaddleGeometry()
    times = np.array([0.0, 0.13, 0.4, 0.71, 1.2])
    vec = forward_thrust(times, prof, geom, paddle, ENV)
    for t, v in zip(times, vec):
        sample = module_thrust(t, prof, geom, paddle, ENV)
        assert sample.propulsion_N == pytest.approx(v, rel=1e-12, abs=1e-15)
        assert len(sample.per_link_N) == 3
        total = sample.paddle_N + sum(sample.per_link_N)
        assert np.allclose(sample.force_N, total)


def test_power_stroke_pushes_forward():
    prof, paddle, env = StrokeProfile(120.0, 1.0), PaddleGeometry(), FluidEnvironment()
    geom = ChainGeometry(mount_angle_deg=0.0)
    s = module_thrust(0.25, prof, geom, paddle, env)
    assert s.propulsion_N > 0
    assert module_thrust(0.75, prof, geom, paddle, env).propulsion_N < 0


def test_symmetric_stroke_without_mount_has_zero_mean():
    paddle = PaddleGeometry(recovery_area_factor=1.0, flip_delay_s=0.0)
    geom = ChainGeometry(mount_angle_deg=0.0)
    mean = cycle_mean_thrust(StrokeProfile(120.0, 0.5), geom, paddle, FluidEnvironment())
    assert abs(mean) < 1e-12


def test_reduced_recovery_area_gives_positive_mean():
    geom = ChainGeometry(mount_angle_deg=0.0)
    assert cycle_mean_thrust(StrokeProfile(120.0, 0.5), geom, PaddleGeometry(), FluidEnvironment()) > 0


def test_quadrature_converges_with_nodes():
    geom, paddle = ChainGeometry(), PaddleGeometry()
    prof = StrokeProfile(120.0, 1.0, 20.0)
    coarse = cycle_mean_thrust(prof, geom, paddle, FluidEnvironment(quadrature_nodes=33))
    fine = cycle_mean_thrust(prof, geom, paddle, FluidEnvironment(quadrature_nodes=401))
    assert coarse == pytest.approx(fine, rel=1e-4)


def test_cycle_times_cover_one_period():
    prof = StrokeProfile(frequency_hz=0.3)
    t = cycle_times(prof, 1e-3)
    assert len(t) == 3333 and t[0] == 0.0 and t[-1] < prof.period_s


def test_link_drag_requires_enabling_and_width():
    with pytest.raises(ConfigError):
        link_drag(1, ChainState(0.0, 1.0), WIDE, FluidEnvironment())
    with pytest.raises(ConfigError):
        link_drag(1, ChainState(0.0, 1.0), ChainGeometry(), ENV)
    with pytest.raises(ConfigError):
        link_drag(4, ChainState(0.0, 1.0), WIDE, ENV)


@pytest.mark.parametrize(
    "cls,kwargs",
    [
        (FluidEnvironment, {"density_kgm3": 0.0}),
        (FluidEnvironment, {"drag_coeff": -1.0}),
        (FluidEnvironment, {"quadrature_nodes": 32}),
        (PaddleGeometry, {"recovery_area_factor": 0.0}),
        (PaddleGeometry, {"recovery_area_factor": 1.5}),
        (PaddleGeometry, {"flip_delay_s": -0.1}),
        (PaddleGeometry, {"width_mm": 0.0}),
    ],
)
def test_parameter_validation(cls, kwargs):
    with pytest.raises(ConfigError):
        cls(**kwargs)
