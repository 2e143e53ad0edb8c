import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vspm.errors import CalibrationError, ConfigError, DomainError
from vspm.thermal import (
    HeaterSpec,
    JointStiffness,
    Phase,
    ThermalJointState,
    calibrate_thermal,
    check_step,
    joint_phase,
    joint_stiffness,
    joule_heat,
    simulate_thermal,
    step_temperature,
)


def lumped(temp=10.0, cap=36.0, loss=0.25, **kw):
    return ThermalJointState(temp, cap, loss, **kw)


def test_joule_heat_example():
    assert joule_heat(HeaterSpec(2.0, 5.0), 30.0) == 600.0
    assert joule_heat(HeaterSpec(2.0, 5.0, duty=0.25), 30.0) == 150.0
    assert joule_heat(HeaterSpec(0.0, 5.0), 30.0) == 0.0


def test_joule_heat_rejects_negative_time():
    with pytest.raises(DomainError):
        joule_heat(HeaterSpec(), -1.0)


@pytest.mark.parametrize("kwargs", [{"current_A": -1.0}, {"resistance_ohm": 0.0}, {"duty": 1.5}])
def test_heater_validation(kwargs):
    with pytest.raises(ConfigError):
        HeaterSpec(**kwargs)


def test_phase_threshold():
    assert joint_phase(29.999) is Phase.SOLID
    assert joint_phase(30.0) is Phase.LIQUID
    with pytest.raises(DomainError):
        joint_phase(math.nan)


def test_state_phase_is_derived_and_checked():
    assert lumped(35.0).phase is Phase.LIQUID
    with pytest.raises(ConfigError):
        lumped(35.0, phase=Phase.SOLID)


def test_stiffness_lookup_and_ordering():
    table = JointStiffness()
    assert joint_stiffness(Phase.SOLID, table) > joint_stiffness("liquid", table)
    assert table.ratio == 10.0
    with pytest.raises(ConfigError):
        JointStiffness(50.0, 500.0)


def test_matches_exponential_closed_form():
    spec = HeaterSpec(1.0, 10.0)
    s = lumped(10.0, 36.0, 0.25)
    trace = simulate_thermal(s, spec, 300.0, dt_s=0.01)
    tau, t_inf = 36.0 / 0.25, 10.0 + 10.0 / 0.25
    exact = t_inf - (t_inf - 10.0) * np.exp(-trace.time_s / tau)
    assert np.max(np.abs(trace.temp_C - exact)) < 5e-3


def test_zero_duty_stays_at_ambient():
    trace = simulate_thermal(lumped(10.0), HeaterSpec(duty=0.0), 100.0, 0.1)
    assert np.all(trace.temp_C == 10.0)
    assert all(p is Phase.SOLID for p in trace.phase)
    assert np.all(trace.cumulative_J == 0.0)


def test_unstable_step_rejected():
    s = lumped(cap=10.0, loss=1.0)
    check_step(s, 10.0)
    with pytest.raises(ConfigError):
        check_step(s, 10.01)
    with pytest.raises(ConfigError):
        simulate_thermal(s, HeaterSpec(), 100.0, 20.0)


@settings(deadline=None)
@given(st.floats(0.01, 2.0), st.floats(1.0, 100.0), st.floats(0.05, 1.0))
def test_heating_is_monotone_and_bounded_by_steady_state(current, cap, loss):
    spec = HeaterSpec(current, 10.0)
    s = lumped(10.0, cap, loss)
    dt = min(0.5, 0.5 * cap / loss)
    trace = simulate_thermal(s, spec, 50 * dt, dt)
    assert np.all(np.diff(trace.temp_C) >= -1e-12)
    assert np.all(trace.temp_C <= 10.0 + spec.power_W / loss + 1e-9)


def test_phase_flips_at_melt_crossing():
    trace = simulate_thermal(lumped(10.0, 36.0, 0.25), HeaterSpec(), 300.0, 0.1)
    first_hot = int(np.argmax(trace.temp_C >= 30.0))
    assert trace.phase[first_hot] is Phase.LIQUID
    assert trace.phase[first_hot - 1] is Phase.SOLID
    assert trace.first_liquid_time() == pytest.approx(trace.time_s[first_hot])
    assert trace.time_s[first_hot - 1] <= trace.crossing_time(30.0) <= trace.time_s[first_hot]


def test_crossing_time_none_when_never_reached():
    trace = simulate_thermal(lumped(10.0), HeaterSpec(duty=0.0), 10.0, 0.1)
    assert trace.crossing_time(30.0) is None and trace.first_liquid_time() is None


def test_latent_heat_plateau_and_energy_balance():
    # no losses: every joule goes into sensible or latent storage
    s = lumped(20.0, 40.0, 0.0, latent_heat_J=200.0)
    spec = HeaterSpec(1.0, 10.0)
    trace = simulate_thermal(s, spec, 80.0, 0.1)
    # 400 J raises 10 K, then 200 J melts, then the rest heats again
    t_at = lambda t: trace.temp_C[int(round(t / 0.1))]
    assert t_at(45.0) == pytest.approx(30.0)
    assert t_at(55.0) == pytest.approx(30.0)
    assert t_at(80.0) == pytest.approx(30.0 + (800.0 - 400.0 - 200.0) / 40.0)


def test_latent_heat_released_on_cooling():
    s = lumped(30.0, 40.0, 1.0, latent_heat_J=50.0, latent_absorbed_J=50.0, ambient_C=10.0)
    out = step_temperature(s, HeaterSpec(duty=0.0), 1.0)
    # 20 W of loss drains latent storage first; temperature holds
    assert out.temp_C == pytest.approx(30.0) and out.latent_absorbed_J == pytest.approx(30.0)


def test_calibration_defaults():
    fit = calibrate_thermal(HeaterSpec(1.0, 10.0))
    assert fit.time_constant_s == pytest.approx(200.0 / math.log(4.0), rel=1e-10)
    assert fit.loss_coeff_WpK == pytest.approx(10.0 / 40.0)
    s = ThermalJointState(10.0, fit.heat_capacity_JpK, fit.loss_coeff_WpK)
    trace = simulate_thermal(s, HeaterSpec(1.0, 10.0), 300.0, 0.01)
    assert trace.crossing_time(40.0) == pytest.approx(200.0, abs=0.5)


@given(st.floats(0.5, 5.0), st.floats(50.0, 1000.0), st.floats(41.0, 200.0))
def test_calibration_closed_form_hits_target(current, target_time, steady):
    fit = calibrate_thermal(HeaterSpec(current, 10.0), target_time_s=target_time, steady_C=steady)
    reached = steady - (steady - 10.0) * math.exp(-target_time / fit.time_constant_s)
    assert reached == pytest.approx(40.0, rel=1e-9)


@pytest.mark.parametrize(
    "kwargs",
    [{"steady_C": 40.0}, {"steady_C": 35.0}, {"start_C": 45.0}],
)
def test_calibration_unreachable(kwargs):
    with pytest.raises(CalibrationError):
        calibrate_thermal(HeaterSpec(), **kwargs)


def test_calibration_needs_power():
    with pytest.raises(CalibrationError):
        calibrate_thermal(HeaterSpec(duty=0.0))
