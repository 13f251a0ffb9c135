import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qtrigger.constants import ANGSTROM, CONST, EV, HBAR, M_H
from qtrigger.errors import AmbiguousBarrier, DomainError, NoBarrier
from qtrigger.potentials import (
    CoupledModel2D,
    CouplingKind,
    DoubleWell,
    Harmonic,
    RectangularBarrier,
    Tabulated,
    eval_1d,
    eval_2d,
    find_turning_points,
    natural_model,
)


def test_constants_positive_and_codata():
    assert CONST.hbar == pytest.approx(1.054571817e-34, rel=1e-12)
    assert CONST.k_b == pytest.approx(1.380649e-23, rel=1e-12)
    assert CONST.m_H == pytest.approx(1.6735575e-27, rel=1e-6)
    with pytest.raises(AttributeError):
        CONST.hbar = 1.0


def test_double_well_minima_and_top():
    p = DoubleWell(B=3.0, a=2.0)
    assert eval_1d(p, 2.0) == 0.0
    assert eval_1d(p, -2.0) == 0.0
    assert eval_1d(p, 0.0) == 3.0 * 2.0**4


def test_rectangular_piecewise():
    p = RectangularBarrier(V0=0.4 * EV, L=1e-10)
    assert eval_1d(p, 0.5e-10) == 0.4 * EV
    assert eval_1d(p, 2e-10) == 0.0


def test_tabulated_linear_interpolation():
    p = Tabulated.from_pairs([(0.0, 0.0), (1.0, 2.0), (3.0, 0.0)])
    assert eval_1d(p, 0.5) == 1.0
    assert eval_1d(p, 2.0) == 1.0


@pytest.mark.parametrize(
    "bad",
    [
        lambda: DoubleWell(B=0.0, a=1.0),
        lambda: DoubleWell(B=1.0, a=-1.0),
        lambda: RectangularBarrier(V0=-1.0, L=1.0),
        lambda: Tabulated(q=(0.0, 0.0), v=(1.0, 2.0)),
        lambda: Tabulated(q=(0.0, 1.0), v=(1.0, math.inf)),
        lambda: Harmonic(M=M_H, omega=0.0),
    ],
)
def test_construction_invariants(bad):
    with pytest.raises(ValueError):
        bad()


def test_out_of_domain():
    p = DoubleWell(B=1.0, a=1.0)
    with pytest.raises(DomainError):
        eval_1d(p, 3.5)
    m = natural_model("smc", 0.1)
    with pytest.raises(DomainError):
        eval_2d(m, 10 * m.a, 0.0)


def test_turning_points_rectangular():
    p = RectangularBarrier(V0=0.4 * EV, L=1e-10)
    assert find_turning_points(p, 0.1 * EV) == (0.0, 1e-10)


def test_turning_points_quartic_oracle():
    a, b = find_turning_points(DoubleWell(B=1.0, a=1.0), 0.5)
    root = math.sqrt(1.0 - 1.0 / math.sqrt(2.0))
    assert a == pytest.approx(-root, rel=1e-11)
    assert b == pytest.approx(root, rel=1e-11)
    assert b == pytest.approx(0.5412, abs=1e-4)


def test_turning_points_above_top():
    with pytest.raises(NoBarrier):
        find_turning_points(DoubleWell(B=1.0, a=1.0), 1.1)


def test_two_bumps_are_ambiguous():
    p = Tabulated.from_pairs([(0, 0), (1, 1), (2, 0), (3, 1), (4, 0)])
    with pytest.raises(AmbiguousBarrier):
        find_turning_points(p, 0.5)


@given(frac=st.floats(0.02, 0.98), B=st.floats(0.1, 10.0), a=st.floats(0.2, 5.0))
def test_turning_point_contract(frac, B, a):
    p = DoubleWell(B=B, a=a)
    E0 = frac * p.height
    lo, hi = find_turning_points(p, E0)
    assert lo < hi
    assert abs(p(lo) - E0) <= 1e-9 * p.height
    assert abs(p(hi) - E0) <= 1e-9 * p.height
    probe = np.linspace(lo, hi, 1002)[1:-1]
    assert np.all(p(probe) > E0)


@given(q=st.floats(-2.9, 2.9))
def test_eval_is_pure(q):
    p = DoubleWell(B=1.7, a=1.0)
    assert eval_1d(p, q) == eval_1d(p, q)


@pytest.mark.parametrize("kind", list(CouplingKind))
def test_uncoupled_reduces_on_axis(kind):
    m = natural_model(kind)
    xi = np.linspace(-2 * m.a, 2 * m.a, 17)
    assert np.array_equal(m.values(xi, 0.0), m.B * (xi * xi - m.a**2) ** 2)


def _ulps(x, y):
    return np.abs(x - y) / np.spacing(np.maximum(np.abs(x), np.abs(y)))


@given(g=st.floats(-0.3, 0.3), seed=st.integers(0, 2**32 - 1))
def test_smc_even_in_xi(g, seed):
    m = natural_model("smc", g)
    rng = np.random.default_rng(seed)
    (x0, x1), (e0, e1) = m.box
    xi = rng.uniform(x0, x1, 10_000)
    eta = rng.uniform(e0, e1, 10_000)
    assert np.max(_ulps(m.values(xi, eta), m.values(-xi, eta))) <= 4


@given(g=st.floats(-0.3, 0.3), seed=st.integers(0, 2**32 - 1))
def test_asmc_combined_parity(g, seed):
    m = natural_model("asmc", g)
    rng = np.random.default_rng(seed)
    (x0, x1), (e0, e1) = m.box
    w = min(-e0, e1)
    xi = rng.uniform(x0, x1, 10_000)
    eta = rng.uniform(-w, w, 10_000)
    assert np.max(_ulps(m.values(xi, eta), m.values(-xi, -eta))) <= 4


@given(xi=st.floats(-0.6, 0.6), eta=st.floats(-0.2, 0.2), kind=st.sampled_from(list(CouplingKind)))
def test_uncoupled_term_by_term_identity(xi, eta, kind):
    a = 0.3 * ANGSTROM
    m = CoupledModel2D(kind, B=2e-20 / a**4, a=a, omega_t=3e14)
    xi, eta = xi * ANGSTROM, eta * ANGSTROM
    dw = DoubleWell(m.B, a, domain=m.box[0])
    harmonic = 0.5 * m.masses[1] * m.omega_t**2 * eta**2
    assert eval_2d(m, xi, eta) == eval_1d(dw, xi) + harmonic


def test_squeezing_only_for_squeezed():
    with pytest.raises(ValueError):
        CoupledModel2D(CouplingKind.SMC, 1.0, 1.0, 1.0, s=0.5)
    with pytest.raises(ValueError):
        CoupledModel2D(CouplingKind.SQUEEZED, 1.0, 1.0, 1.0, s=-0.5)


def test_squeezed_transverse_frequency_at_wells_and_saddle():
    m = natural_model("squeezed", s=2.0)
    k0 = 0.5 * m.masses[1] * m.omega_t**2
    eta = 1e-12
    assert m.transverse_potential(m.a, eta) == pytest.approx(k0 * eta**2, rel=1e-14)
    assert m.transverse_potential(0.0, eta) == pytest.approx(3.0 * k0 * eta**2, rel=1e-14)


def test_natural_units():
    m = natural_model("smc", 0.1, barrier=12.0, omega_t=4.0)
    eps = HBAR**2 / (M_H * m.a**2)
    assert m.height == pytest.approx(12.0 * eps, rel=1e-14)
    assert HBAR * m.omega_t == pytest.approx(4.0 * eps, rel=1e-14)
    assert m.g * m.a == pytest.approx(0.1, rel=1e-14)
