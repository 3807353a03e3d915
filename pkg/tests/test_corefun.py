import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlab.corefun import (CIRCLE, SYM, UNIT, Domain, PiecewisePoly, f_eps_r, interval_family,
                               periodic_integral, phi_eps, random_piecewise)
from smoothlab.errors import BadEpsilon, NonZeroMean, OutOfDomain

GRID = np.linspace(0.0, 2 * np.pi, 1000, endpoint=False)


def square():
    return PiecewisePoly(UNIT, [0.0, 1.0], [[0.0, 0.0, 1.0]])


def test_eval_polynomial():
    assert square()(0.5) == pytest.approx(0.25, abs=1e-15)


@pytest.mark.parametrize("x, want", [(0.05, 0.5), (math.pi + 1, 0.0)])
def test_eval_phi(x, want):
    assert phi_eps(0.1)(x) == pytest.approx(want, abs=1e-14)


def test_phi_breakpoint_values():
    eps = 0.1
    f = phi_eps(eps)
    assert f(eps) == pytest.approx(1.0, abs=1e-14)
    assert f(math.pi - eps) == pytest.approx(1.0, abs=1e-14)
    assert f(math.pi) == pytest.approx(0.0, abs=1e-14)


def test_phi_mean():
    eps = 0.2
    assert phi_eps(eps).mean() == pytest.approx((math.pi - eps) / (2 * math.pi), rel=1e-14)
    assert abs(phi_eps(eps, centered=True).mean()) < 1e-12


def test_circle_evaluation_wraps():
    f = phi_eps(0.3)
    x = np.array([0.1, 1.0, 4.0])
    np.testing.assert_allclose(f(x + 2 * np.pi), f(x), atol=1e-13)
    np.testing.assert_allclose(f(x - 6 * np.pi), f(x), atol=1e-13)


def test_interval_evaluation_outside_raises():
    with pytest.raises(OutOfDomain):
        square()(1.5)


def test_differentiate_square():
    d = square().derivative()
    x = np.linspace(0, 1, 11)
    np.testing.assert_allclose(d(x), 2 * x, atol=1e-14)


def test_differentiate_phi_values():
    eps = 0.1
    d = phi_eps(eps).derivative()
    vals = np.unique(np.round(d.coeffs[:, 0], 10))
    np.testing.assert_allclose(sorted(vals), [-1 / eps, 0.0, 1 / eps])
    # the pulse is continuous, so nothing is dropped
    assert d.meta["dropped_jumps"] == ()


def test_differentiate_records_jumps():
    f = PiecewisePoly(UNIT, [0.0, 0.5, 1.0], [[0.0], [1.0]])
    d = f.derivative()
    assert d.meta["dropped_jumps"] == ((0.5, 1.0),)
    np.testing.assert_array_equal(d.coeffs, 0.0)


def test_antiderivative_raises_degree():
    assert square().antiderivative().degree == 3


def test_periodic_integral_zero():
    z = PiecewisePoly(CIRCLE, [0.0, 2 * np.pi], [[0.0]])
    np.testing.assert_array_equal(periodic_integral(z)(GRID), 0.0)


def test_periodic_integral_square_wave():
    f = PiecewisePoly(CIRCLE, [0.0, np.pi, 2 * np.pi], [[1.0], [-1.0]])
    G = periodic_integral(f)
    want = np.where(GRID < np.pi, GRID - np.pi / 2, 3 * np.pi / 2 - GRID)
    np.testing.assert_allclose(G(GRID), want, atol=1e-12)
    # independent check of the mean-zero shift by trapezoid quadrature
    x = np.linspace(0, 2 * np.pi, 200001)
    assert abs(np.trapezoid(G(x), x)) < 1e-8


def test_periodic_integral_nonzero_mean_raises():
    with pytest.raises(NonZeroMean):
        periodic_integral(phi_eps(0.1))


def test_f_eps_1_is_centred_phi():
    a, b = f_eps_r(0.2, 1), phi_eps(0.2, centered=True)
    np.testing.assert_allclose(a(GRID), b(GRID), atol=1e-15)


@pytest.mark.parametrize("r", [2, 3, 4])
def test_f_eps_r_derivative_chain(r):
    eps = 0.1
    f = f_eps_r(eps, r)
    np.testing.assert_allclose(f.derivative()(GRID), f_eps_r(eps, r - 1)(GRID), atol=1e-10)
    np.testing.assert_allclose(f.derivative(r - 1)(GRID), f_eps_r(eps, 1)(GRID), atol=1e-10)
    top = np.unique(np.round(f.derivative(r).coeffs[:, 0], 8))
    assert set(top) <= {-1 / eps, 0.0, 1 / eps}


@pytest.mark.parametrize("r", [2, 3, 5])
def test_f_eps_r_continuous_and_mean_zero(r):
    f = f_eps_r(0.05, r)
    assert abs(f.mean()) < 1e-12
    left, right = f.left_values(), f.right_values()
    np.testing.assert_allclose(right[1:], left[:-1], atol=1e-12)
    assert abs(right[0] - left[-1]) < 1e-12


def test_bad_eps():
    with pytest.raises(BadEpsilon):
        phi_eps(2.0)
    with pytest.raises(BadEpsilon):
        f_eps_r(0.0, 2)


def test_interval_family_is_pullback():
    f = interval_family(0.1, 2, SYM, offset=-1.0)
    g = f_eps_r(0.1, 2)
    x = np.linspace(-1, 1, 301)
    np.testing.assert_allclose(f(x), g(np.pi * (x + 1) - 1.0), atol=1e-12)


def test_random_piecewise_constant():
    f = random_piecewise(1, 1, 0)
    assert f.npieces == 1 and f.degree == 0


def test_random_piecewise_deterministic():
    a = random_piecewise(7, 5, 3, SYM)
    b = random_piecewise(7, 5, 3, SYM)
    np.testing.assert_array_equal(a.coeffs, b.coeffs)
    np.testing.assert_array_equal(a.breaks, b.breaks)


def test_random_piecewise_zero_mean():
    f = random_piecewise(3, 6, 4, CIRCLE, zero_mean=True)
    assert abs(f.mean()) < 1e-12


def test_random_piecewise_continuous_periodic():
    f = random_piecewise(4, 5, 2, CIRCLE, continuous=True)
    assert f.jumps() == []


def test_json_round_trip():
    f = f_eps_r(0.1, 3)
    g = PiecewisePoly.from_json(f.to_json())
    np.testing.assert_array_equal(g.coeffs, f.coeffs)
    assert g.domain == f.domain
    assert Domain.from_json(Domain(0.0, 3.0).to_json()) == Domain(0.0, 3.0)


def test_invalid_breaks():
    with pytest.raises(ValueError):
        PiecewisePoly(UNIT, [0.0, 0.5, 0.4, 1.0], [[0.0]] * 3)
    with pytest.raises(ValueError):
        PiecewisePoly(UNIT, [0.0, 0.9], [[0.0]])


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), pieces=st.integers(1, 6), degree=st.integers(0, 5))
def test_derivative_of_periodic_integral(seed, pieces, degree):
    f = random_piecewise(seed, pieces, degree, CIRCLE, zero_mean=True)
    x = np.random.default_rng(seed).uniform(0, 2 * np.pi, 1000)
    # stay off the breakpoints, where the left-limit convention picks a side
    x = x[np.min(np.abs(x[:, None] - f.breaks[None, :]), axis=1) > 1e-9]
    np.testing.assert_allclose(periodic_integral(f).derivative()(x), f(x), atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.floats(-5, 5), shift=st.floats(-3, 3))
def test_algebra_pointwise(seed, c, shift):
    f = random_piecewise(seed, 3, 2, UNIT)
    g = random_piecewise(seed + 1, 4, 3, UNIT)
    x = np.linspace(0, 1, 97)[1:-1]
    x = x[np.min(np.abs(x[:, None] - np.union1d(f.breaks, g.breaks)[None, :]), axis=1) > 1e-9]
    np.testing.assert_allclose((c * f + g - shift)(x), c * f(x) + g(x) - shift, atol=1e-9)
