import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrigger.errors import BlowupError, InsufficientTravel, MultiKink, NeverArrives, NoKink, StabilityError, UnresolvedKink
from qtrigger.soliton import (
    DEFAULT_SCALE,
    KinkState,
    UnitScale,
    arrival_time,
    arrival_times,
    field_energy,
    init_kink,
    kink_center,
    measure_velocity,
    run_trace,
    step,
    to_physical,
    vacuum,
)


def analytic_energy(v):
    return 8.0 / math.sqrt(1.0 - v * v)


def test_static_profile():
    s = init_kink(0.0, (2048, 0.1), x0=100.0)
    i = 1000  # x = 100.0 exactly
    assert s.phi[i] == pytest.approx(math.pi, abs=1e-15)
    assert abs(s.phi[0]) < 1e-3 and abs(s.phi[-1] - 2 * math.pi) < 1e-3
    assert s.charge == 1.0


@pytest.mark.parametrize("v", [0.0, 0.5, 0.8])
def test_kink_energy(v):
    assert field_energy(init_kink(v)) == pytest.approx(analytic_energy(v), rel=1e-3)


def test_vacuum_energy_and_fixed_point():
    s = vacuum()
    assert field_energy(s) == 0.0
    out = step(s, 0.05, 500)
    assert np.all(out.phi == 0.0) and np.all(out.phi_t == 0.0)


@pytest.mark.parametrize("v", [1.0, -1.0, 1.5])
def test_superluminal_rejected(v):
    with pytest.raises(ValueError):
        init_kink(v)


def test_unresolved_kink():
    with pytest.raises(UnresolvedKink):
        init_kink(0.99, (2048, 0.1))


def test_small_lattice_rejected():
    with pytest.raises(ValueError):
        init_kink(0.0, (128, 0.1))


def test_cfl_limit():
    s = init_kink(0.5)
    with pytest.raises(StabilityError):
        step(s, 0.095)


def test_blowup_detected():
    s = init_kink(0.0)
    hot = KinkState(s.phi, s.phi_t + 2e3, s.dx, 0.0, 0.0)
    with pytest.raises(BlowupError):
        step(hot, 0.01)


def test_static_kink_stays():
    s = init_kink(0.0)
    c0 = kink_center(s)
    out = step(s, 0.5 * s.dx, 1000)
    assert abs(kink_center(out) - c0) < 1e-3 * s.dx
    assert out.t == pytest.approx(1000 * 0.5 * s.dx)


def test_center_at_construction():
    s = init_kink(0.3, x0=60.0)
    assert abs(kink_center(s) - 60.0) < s.dx / 10
    t = init_kink(0.3, x0=72.5)
    assert kink_center(t) - kink_center(s) == pytest.approx(12.5, abs=s.dx / 10)


def test_no_kink_and_multi_kink():
    with pytest.raises(NoKink):
        kink_center(vacuum())
    x = np.arange(2048) * 0.1
    phi = np.where((x > 50) & (x < 150), 2 * math.pi, 0.0)
    with pytest.raises(MultiKink):
        kink_center(KinkState(phi, np.zeros_like(phi), 0.1, 0.0, 0.0))


@pytest.fixture(scope="module")
def long_run():
    s = init_kink(0.5, (8192, 0.1), x0=100.0)
    return run_trace(s, 0.05, 10_000, 100)


def test_velocity_and_conservation(long_run):
    final, trace = long_run
    fit = measure_velocity([(p.t, p.center) for p in trace])
    assert fit.velocity == pytest.approx(0.5, rel=1e-2)
    e0 = trace[0].energy
    assert max(abs(p.energy - e0) for p in trace) / e0 < 1e-3
    assert final.charge == 1.0


def test_velocity_matches_analytic_solution(long_run):
    final, _ = long_run
    expected = 100.0 + 0.5 * final.t
    assert kink_center(final) == pytest.approx(expected, rel=1e-2)


def test_fit_exact_line():
    t = np.linspace(0.0, 100.0, 20)
    fit = measure_velocity(list(zip(t, 5.0 + 0.3 * t)))
    assert fit.velocity == pytest.approx(0.3, rel=1e-12)
    assert fit.residual_rms < 1e-12


def test_fit_static_trace():
    s = init_kink(0.0)
    _, trace = run_trace(s, 0.05, 2000, 100)
    assert abs(measure_velocity([(p.t, p.center) for p in trace]).velocity) < 1e-4


def test_insufficient_travel():
    t = np.linspace(0.0, 10.0, 20)
    with pytest.raises(InsufficientTravel):
        measure_velocity(list(zip(t, 0.1 * t)), dx=0.1)
    with pytest.raises(InsufficientTravel):
        measure_velocity([(0.0, 0.0), (1.0, 5.0)])


def test_default_scale():
    assert to_physical(0.5) == 140.0
    assert to_physical(0.0) == 0.0
    assert to_physical(0.25) == 70.0
    assert DEFAULT_SCALE.length_unit == 8e-9
    assert DEFAULT_SCALE.c_star == pytest.approx(280.0, rel=1e-15)


@given(v=st.floats(-1.0, 1.0), w=st.floats(-1.0, 1.0), c=st.floats(-5.0, 5.0))
def test_to_physical_linear(v, w, c):
    scale = UnitScale(2e-9, 1e-11)
    assert to_physical(v, scale) == v * 2e-9 / 1e-11
    assert to_physical(c * v, scale) == pytest.approx(c * to_physical(v, scale), rel=1e-15, abs=1e-300)
    assert to_physical(v + w, scale) == pytest.approx(to_physical(v, scale) + to_physical(w, scale), rel=1e-14, abs=1e-12)


def test_unit_scale_validation():
    with pytest.raises(ValueError):
        UnitScale(0.0, 1.0)


def test_arrival_time():
    s = init_kink(0.5)
    unit = UnitScale(1.0, 1.0)
    t = arrival_time(s, kink_center(s) + 10.0, unit)
    assert t == pytest.approx(20.0, rel=2e-2)
    assert arrival_time(s, kink_center(s) - 1.0, unit) == 0.0


def test_arrival_static_never():
    s = init_kink(0.0)
    with pytest.raises(NeverArrives):
        arrival_time(s, kink_center(s) + 10.0)


def test_arrival_times_offsets():
    times = arrival_times([0.0, 1e-9], 10.0, 0.5)
    assert times[1] - times[0] == pytest.approx(1e-9, rel=1e-12)
    assert times[0] == pytest.approx(20.0 * DEFAULT_SCALE.time_unit, rel=2e-2)


@given(v=st.floats(-0.9, 0.9), x0=st.floats(60.0, 140.0))
def test_charge_preserved(v, x0):
    s = init_kink(v, x0=x0)
    out = step(s, 0.05, 200)
    assert out.phi[0] == 0.0 and out.phi[-1] == 2 * math.pi
    assert out.charge == 1.0
