import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothlab.approx import (ApproxSpace, BestApproxConfig, BestApproxResult, Expansion,
                              approx_error, best_approx, bspline_basis, eval_expansion,
                              expansion_derivative, lift_expansion, oracle_best_approx,
                              random_expansion, truncated_power_coeffs, truncated_power_eval)
from smoothlab.corefun import CIRCLE, PiecewisePoly, PiecewiseSmooth, phi_eps
from smoothlab.errors import DegreeExhausted, GridTooLarge
from smoothlab.quasinorm import lp_quasinorm

FAST = BestApproxConfig(starts=3, max_iters=200)


def test_dimensions():
    assert ApproxSpace.Trig(3).dim == 7
    assert ApproxSpace.Spline(3, 4).dim == 6
    assert ApproxSpace.AlgPoly(5).dim == 6
    with pytest.raises(ValueError):
        ApproxSpace("trig", 2, weight_sigma=1.0)


def test_space_json_round_trip():
    for sp in (ApproxSpace.Trig(2), ApproxSpace.Spline(3, 5), ApproxSpace.AlgPoly(4, 1.5)):
        assert ApproxSpace.from_json(sp.to_json()) == sp


def test_eval_constant_trig():
    e = Expansion(ApproxSpace.Trig(1), [1.0, 0.0, 0.0])
    np.testing.assert_allclose(eval_expansion(e, np.linspace(0, 7, 15)), 1.0, atol=1e-15)


def test_eval_chebyshev():
    e = Expansion(ApproxSpace.AlgPoly(2), [0.0, 0.0, 1.0])
    assert eval_expansion(e, 0.0) == pytest.approx(-1.0)
    assert eval_expansion(e, 0.5) == pytest.approx(2 * 0.25 - 1)


def test_spline_partition_of_unity():
    e = Expansion(ApproxSpace.Spline(2, 2), np.ones(3))
    np.testing.assert_allclose(eval_expansion(e, np.linspace(0, 1, 41)), 1.0, atol=1e-14)
    B = bspline_basis(np.linspace(0, 1, 101), 4, 7)
    np.testing.assert_allclose(B.sum(axis=1), 1.0, atol=1e-13)


def test_spline_basis_matches_piecewise_form():
    e = random_expansion(ApproxSpace.Spline(4, 6), 2)
    x = np.linspace(0, 1, 333)
    direct = bspline_basis(x, 4, 6) @ e.coeffs
    np.testing.assert_allclose(e.as_piecewise()(x), direct, atol=1e-12)


def test_derivative_of_constant():
    for sp in (ApproxSpace.Trig(2), ApproxSpace.AlgPoly(3)):
        c = np.zeros(sp.dim)
        c[0] = 2.0
        d = expansion_derivative(Expansion(sp, c))
        np.testing.assert_array_equal(d.coeffs, 0.0)


def test_derivative_sin_to_cos():
    d = expansion_derivative(Expansion(ApproxSpace.Trig(1), [0.0, 0.0, 1.0]))
    np.testing.assert_array_equal(d.coeffs, [0.0, 1.0, 0.0])


def test_spline_derivative_finite_differences():
    e = random_expansion(ApproxSpace.Spline(3, 4), 5)
    d = expansion_derivative(e)
    x = np.linspace(0.01, 0.99, 100)
    h = 1e-6
    fd = (e(x + h) - e(x - h)) / (2 * h)
    np.testing.assert_allclose(d(x), fd, atol=1e-6)


def test_spline_derivative_exhausted():
    with pytest.raises(DegreeExhausted):
        expansion_derivative(random_expansion(ApproxSpace.Spline(2, 4), 0), 2)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_alg_derivatives(k):
    x = np.linspace(-0.95, 0.95, 50)
    e = random_expansion(ApproxSpace.AlgPoly(6), 1)
    h = 1e-3
    fd = e
    for _ in range(k):
        fd = (lambda g: (lambda t: (g(t + h) - g(t - h)) / (2 * h)))(fd)
    np.testing.assert_allclose(expansion_derivative(e, k)(x), fd(x), rtol=1e-3, atol=1e-3)


def test_lift_keeps_values():
    e = random_expansion(ApproxSpace.Trig(2), 4)
    x = np.linspace(0, 6, 30)
    np.testing.assert_allclose(lift_expansion(e, 5)(x), e(x), atol=1e-14)


def test_truncated_power_of_global_polynomial():
    sp = ApproxSpace.Spline(3, 5)
    # interpolate a quadratic: the spline space contains it, so all jumps vanish
    x = np.linspace(0.05, 0.95, sp.dim)
    c = np.linalg.solve(bspline_basis(x, 3, 5), 1 - 2 * x + 3 * x * x)
    np.testing.assert_allclose(truncated_power_coeffs(Expansion(sp, c)), 0.0, atol=1e-9)


def test_truncated_power_hat():
    e = Expansion(ApproxSpace.Spline(2, 2), [0.0, 1.0, 0.0])
    # slope 2 then -2 at the middle knot
    np.testing.assert_allclose(truncated_power_coeffs(e), [-4.0], atol=1e-12)


def test_truncated_power_round_trip():
    e = random_expansion(ApproxSpace.Spline(4, 8), 9)
    x = np.linspace(0, 1, 200)
    np.testing.assert_allclose(truncated_power_eval(e, x), e(x), atol=1e-9)


def test_best_approx_recovers_element():
    e = random_expansion(ApproxSpace.Trig(2), 3)
    f = e.as_evaluable()
    res = best_approx(f, ApproxSpace.Trig(2), 0.7, FAST)
    assert res.error <= 1e-8 * lp_quasinorm(f, 0.7)
    np.testing.assert_allclose(res.coeffs, e.coeffs, atol=1e-6)


def test_best_constant_for_sine():
    f = PiecewiseSmooth(np.sin, CIRCLE)
    res = best_approx(f, ApproxSpace.Trig(0), 2.0, FAST)
    # the polish stops at a relative simplex size of 1e-10
    assert abs(res.coeffs[0]) < 1e-7
    assert res.error == pytest.approx(math.sqrt(math.pi), rel=1e-6)


def test_best_approx_matches_oracle():
    f = phi_eps(0.3, centered=True)
    sp = ApproxSpace.Trig(1)
    a = best_approx(f, sp, 0.7)
    b = oracle_best_approx(f, sp, 0.7)
    assert abs(a.error - b.error) <= 0.01 * b.error


def test_oracle_constant_lattice():
    f = PiecewisePoly(CIRCLE, [0.0, 2 * np.pi], [[0.5]])
    res = oracle_best_approx(f, ApproxSpace.Trig(0), 0.5, grid=[(-1.0, 1.0, 0.25)], polish=False)
    assert res.error == 0.0 and res.coeffs[0] == 0.5


def test_oracle_refinement_monotone():
    f = phi_eps(0.3, centered=True)
    sp = ApproxSpace.Trig(1)
    coarse = oracle_best_approx(f, sp, 0.7, grid=[(-1, 1, 0.1)] * 3, polish=False)
    fine = oracle_best_approx(f, sp, 0.7, grid=[(-1, 1, 0.05)] * 3, polish=False)
    assert fine.error <= coarse.error


def test_oracle_dimension_limit():
    with pytest.raises(GridTooLarge):
        oracle_best_approx(phi_eps(0.3), ApproxSpace.Trig(2), 0.7)


def test_result_error_is_recomputed():
    f = phi_eps(0.2, centered=True)
    res = best_approx(f, ApproxSpace.Trig(2), 0.6, FAST)
    assert approx_error(f, res.expansion, 0.6) == pytest.approx(res.error, rel=1e-9)


def test_result_json_round_trip():
    res = best_approx(phi_eps(0.2, centered=True), ApproxSpace.Trig(1), 0.6, FAST)
    back = BestApproxResult.from_dict(res.to_dict())
    np.testing.assert_array_equal(back.coeffs, res.coeffs)
    assert back.error == res.error and back.nonconvergent == res.nonconvergent


def test_error_nonincreasing_in_n():
    f = phi_eps(0.1, centered=True)
    errs = [best_approx(f, ApproxSpace.Trig(n), 0.6, FAST).error for n in (1, 2, 4, 8)]
    assert all(b <= a + 1e-6 for a, b in zip(errs, errs[1:]))


def test_weighted_alg_error():
    f = random_expansion(ApproxSpace.AlgPoly(6), 3).as_evaluable()
    res = best_approx(f, ApproxSpace.AlgPoly(3, 1.0), 0.7, FAST)
    low = best_approx(f, ApproxSpace.AlgPoly(3), 0.7, FAST)
    assert 0 < res.error < low.error


@settings(max_examples=6, deadline=None)
@given(c=st.sampled_from([0.5, 3.0, 10.0]), seed=st.integers(0, 100))
def test_scaling_equivariance(c, seed):
    cfg = BestApproxConfig(starts=2, max_iters=100, seed=seed, polish_max_dim=0)
    sp = ApproxSpace.Trig(1)
    e = random_expansion(ApproxSpace.Trig(3), seed)
    a = best_approx(e.as_evaluable(), sp, 0.7, cfg)
    b = best_approx(e.scaled(c).as_evaluable(), sp, 0.7, cfg)
    assert b.error == pytest.approx(c * a.error, rel=1e-6)
    np.testing.assert_allclose(b.coeffs, c * a.coeffs, rtol=1e-6, atol=1e-9 * c)


@pytest.mark.parametrize("seed", [0, 1, 3])
def test_negation_same_infimum(seed):
    # seeded perturbations are not mirrored, so -f may settle in another local minimum
    cfg = BestApproxConfig(starts=2, max_iters=100, seed=seed, polish_max_dim=0)
    sp = ApproxSpace.Trig(1)
    e = random_expansion(ApproxSpace.Trig(3), seed)
    a = best_approx(e.as_evaluable(), sp, 0.7, cfg)
    b = best_approx(e.scaled(-2.0).as_evaluable(), sp, 0.7, cfg)
    assert b.error == pytest.approx(2.0 * a.error, rel=1e-2)
