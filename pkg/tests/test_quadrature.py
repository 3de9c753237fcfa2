import math

import pytest

from melkit.exact_coeff import HalfPowerSeries
from melkit.melnikov_core import Basis, basis_series
from melkit.perturbation import PiecewisePerturbation, SmoothPerturbation
from melkit.quadrature import quad_I, quad_J, quad_melnikov, x_plus


def series_value(kind, i, p, h, terms=25):
    return basis_series(Basis(kind, i, p), terms)(h)


@pytest.mark.parametrize("h", [0.001, 0.01])
def test_I01_small_h_area(h):
    assert abs(quad_I(0, 1, h).value / (2 * math.pi * h) - 1) <= 2 * h


def test_I03_leading_term():
    assert quad_I(0, 3, 0.01).value == pytest.approx(3 * math.pi * 1e-4, rel=0.01)


def test_I01_near_separatrix():
    r = quad_I(0, 1, 1.999)
    assert r.value == pytest.approx(16, rel=0.005)
    assert "near-separatrix" in r.flags


def test_J02_small_h():
    assert quad_J(0, 2, 0.01).value == pytest.approx(8 * math.sqrt(2) / 3 * 1e-3, rel=0.01)


def test_J32_exponent():
    a, b = quad_J(3, 2, 0.01).value, quad_J(3, 2, 0.02).value
    assert abs(math.log(b / a) / math.log(2) - 4.5) < 0.05


def test_even_power_closed_orbit_vanishes():
    r = quad_I(2, 2, 0.5)
    assert abs(r.value) <= max(r.abs_error_estimate, 1e-15)


def test_odd_J_is_half_I():
    for h in (0.1, 0.7):
        assert quad_J(1, 3, h).value == pytest.approx(0.5 * quad_I(1, 3, h).value, rel=1e-12)


@pytest.mark.parametrize("h", [0.0, 2.0, -0.1, 3.0])
def test_out_of_region_rejected(h):
    with pytest.raises(ValueError):
        quad_I(0, 1, h)


def test_turning_point():
    assert x_plus(1.0) == pytest.approx(math.pi / 2)


@pytest.mark.parametrize("i", range(6))
@pytest.mark.parametrize("j", [1, 3, 5, 7, 9])
def test_I_matches_series(i, j):
    for h in (0.005, 0.01, 0.05, 0.1):
        q = quad_I(i, j, h, tol=1e-13).value
        assert abs(q - series_value("I", i, j, h)) <= 1e-8 * abs(q)


@pytest.mark.parametrize("i", range(6))
@pytest.mark.parametrize("j", [2, 4, 6, 8])
def test_J_matches_series(i, j):
    for h in (0.005, 0.01, 0.05, 0.1):
        q = quad_J(i, j, h, tol=1e-13).value
        assert abs(q - series_value("J", i, j, h)) <= 1e-8 * abs(q)


@pytest.mark.parametrize("i,j", [(0, 1), (2, 3), (4, 5)])
def test_I_positive_and_increasing(i, j):
    vals = [quad_I(i, j, h).value for h in (0.05, 0.2, 0.5, 1.0, 1.5, 1.9)]
    assert all(v > 0 for v in vals)
    assert all(b > a for a, b in zip(vals, vals[1:]))


@pytest.mark.parametrize("i,j,h", [(0, 1, 0.5), (3, 5, 1.2), (1, 2, 1.8)])
def test_tighter_tolerance_within_error_estimate(i, j, h):
    coarse = quad_J(i, j, h, tol=1e-8)
    fine = quad_J(i, j, h, tol=1e-14)
    assert abs(coarse.value - fine.value) <= max(coarse.abs_error_estimate, 1e-16 * abs(fine.value))


def test_melnikov_constant_is_I01():
    p = SmoothPerturbation(0, 1, 1, [[1]])
    r = quad_melnikov(p, 0.5)
    assert abs(r.value - quad_I(0, 1, 0.5).value) <= 2e-12 * abs(r.value)


@pytest.mark.parametrize("h", [0.1, 1.0])
def test_melnikov_even_power_vanishes(h):
    p = SmoothPerturbation(2, 2, 2, [[1], [3], [-2]])
    r = quad_melnikov(p, h)
    assert abs(r.value) <= r.abs_error_estimate + 1e-15


@pytest.mark.parametrize("h", [0.1, 1.0])
def test_melnikov_odd_trig_vanishes(h):
    p = SmoothPerturbation(1, 1, 1, [[0], [0]], [[1]])
    r = quad_melnikov(p, h)
    assert abs(r.value) <= r.abs_error_estimate + 1e-15


def test_melnikov_piecewise_sides():
    one = SmoothPerturbation(0, 1, 1, [[1]])
    up = PiecewisePerturbation(0, 1, 1, 1, one, None)
    both = PiecewisePerturbation(0, 1, 1, 1, one, one)
    h = 0.3
    assert quad_melnikov(up, h).value == pytest.approx(quad_J(0, 1, h).value, rel=1e-12)
    assert quad_melnikov(both, h).value == pytest.approx(quad_I(0, 1, h).value, rel=1e-12)


def test_melnikov_polynomial_against_basis():
    # Q = (1 - 2cos x) y^3 = (-1 + 2(1-cos x)) y^3
    p = SmoothPerturbation(1, 3, 3, [[1], [-2]])
    h = 0.4
    want = -quad_I(0, 3, h).value + 2 * quad_I(1, 3, h).value
    assert quad_melnikov(p, h).value == pytest.approx(want, rel=1e-11)
