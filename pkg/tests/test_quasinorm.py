import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from smoothlab.corefun import CIRCLE, SYM, UNIT, PiecewisePoly, PiecewiseSmooth, PointFunction, phi_eps, random_piecewise
from smoothlab.errors import OutOfDomain
from smoothlab.quasinorm import PNorm, QuadratureSpec, lp_power, lp_quasinorm, weighted_lp_quasinorm


def const(c, dom=UNIT):
    return PiecewisePoly(dom, [dom.a, dom.b], [[c]])


def ident():
    return PiecewisePoly(UNIT, [0.0, 1.0], [[0.0, 1.0]])


def scipy_power(f, p, sigma=0.0):
    """Independent oracle: adaptive QUADPACK between breakpoints and roots."""
    dom = f.domain
    x = np.linspace(dom.a, dom.b, 20001)
    y = f(x)
    cuts = set(f.breaks.tolist())
    cuts |= set(x[:-1][np.sign(y[:-1]) * np.sign(y[1:]) < 0].tolist())
    pts = sorted(cuts)

    def g(t):
        w = (1 - t * t) ** (sigma / 2) if sigma else 1.0
        return abs(w * f(t)) ** p

    return sum(integrate.quad(g, a, b, limit=400, epsabs=1e-13, epsrel=1e-11)[0]
               for a, b in zip(pts[:-1], pts[1:]))


def test_constant_one():
    assert lp_quasinorm(const(1.0), 0.5) == pytest.approx(1.0, rel=1e-12)


def test_identity_half():
    assert lp_quasinorm(ident(), 0.5) == pytest.approx(4 / 9, rel=1e-9)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.8, 1.0, 2.0])
def test_phi_closed_form(p):
    eps = 0.1
    want = math.pi - 2 * eps + 2 * eps / (p + 1)
    assert lp_power(phi_eps(eps), p) == pytest.approx(want, rel=1e-9)


def test_weighted_sigma_zero_matches_plain():
    f = random_piecewise(5, 4, 3, SYM)
    assert weighted_lp_quasinorm(f, 0.6, 0.0) == lp_quasinorm(f, 0.6)


def test_weighted_constant():
    assert weighted_lp_quasinorm(const(1.0, SYM), 2.0, 1.0) == pytest.approx(math.sqrt(4 / 3), rel=1e-9)


def test_weighted_zero():
    assert weighted_lp_quasinorm(const(0.0, SYM), 0.5, 1.0) == 0.0


def test_weighted_needs_sym_domain():
    with pytest.raises(OutOfDomain):
        weighted_lp_quasinorm(phi_eps(0.1), 0.5, 1.0)


def test_pnorm_validation():
    assert PNorm(0.4).p1 == 0.4 and PNorm(3.0).p1 == 1.0
    with pytest.raises(ValueError):
        PNorm(0.0)
    with pytest.raises(ValueError):
        QuadratureSpec(base_panels=32)


@pytest.mark.parametrize("seed", range(4))
@pytest.mark.parametrize("p", [0.3, 0.7])
def test_against_quadpack(seed, p):
    f = random_piecewise(seed, 5, 4, UNIT)
    assert lp_power(f, p) == pytest.approx(scipy_power(f, p), rel=1e-7)


@pytest.mark.parametrize("seed", range(3))
def test_weighted_against_quadpack(seed):
    f = random_piecewise(seed, 3, 3, SYM)
    assert lp_power(f, 0.5, sigma=1.5) == pytest.approx(scipy_power(f, 0.5, sigma=1.5), rel=1e-7)


def test_smooth_and_blackbox_routes_agree():
    f = random_piecewise(11, 4, 3, UNIT)
    exact = lp_power(f, 0.6)
    smooth = PiecewiseSmooth(f, UNIT, tuple(f.interior_breaks))
    box = PointFunction(f, UNIT, smoothness=-1, breaks=tuple(f.interior_breaks))
    assert lp_power(smooth, 0.6) == pytest.approx(exact, rel=1e-8)
    assert lp_power(box, 0.6) == pytest.approx(exact, rel=1e-4)


def test_circle_subinterval_wraps():
    f = phi_eps(0.2)
    whole = lp_power(f, 0.5)
    # a full period starting anywhere gives the same value
    assert lp_power(f, 0.5, (1.0, 1.0 + 2 * math.pi)) == pytest.approx(whole, rel=1e-10)


def test_refinement_convergence():
    quad = QuadratureSpec()
    for seed in range(3):
        f = random_piecewise(seed, 6, 5, UNIT)
        a = lp_power(f, 0.5, quad=quad)
        b = lp_power(f, 0.5, quad=QuadratureSpec(base_panels=2 * quad.base_panels))
        assert abs(a - b) <= quad.rel_tol * abs(a)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), p=st.floats(0.2, 1.0))
def test_quasi_triangle(seed, p):
    f = random_piecewise(seed, 4, 3, UNIT)
    g = random_piecewise(seed + 7, 3, 2, UNIT)
    lhs = lp_power(f + g, p)
    assert lhs <= (lp_power(f, p) + lp_power(g, p)) * (1 + 1e-6)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10_000), c=st.sampled_from([-2.0, 0.5, 10.0]), p=st.floats(0.2, 2.0))
def test_homogeneity(seed, c, p):
    f = random_piecewise(seed, 4, 3, CIRCLE)
    assert lp_quasinorm(c * f, p) == pytest.approx(abs(c) * lp_quasinorm(f, p), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), a=st.floats(0, 1), b=st.floats(0, 1), s=st.floats(0, 1))
def test_interval_monotone(seed, a, b, s):
    f = random_piecewise(seed, 4, 3, UNIT)
    lo, hi = sorted((a, b))
    inner = lp_quasinorm(f, 0.5, (lo + s * (hi - lo) / 2, hi - s * (hi - lo) / 2))
    assert inner <= lp_quasinorm(f, 0.5, (lo, hi)) + 1e-12
