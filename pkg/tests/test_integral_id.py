import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import rl_frac_bp_oracle, table_kernel
from psifrac.classical import borel_pompeiu_classical, closed_surface_null, kernel_dbar_residual, stokes_residual
from psifrac.errors import DomainError, PreconditionError
from psifrac.families import constant_field, member_field, trig_field, witness_field
from psifrac.fractional import (
    build_lambda,
    cauchy_corollary_check,
    certification_points,
    derivative_of_one,
    frac_borel_pompeiu,
    frac_stokes_residual,
    lambda_for,
    remainder_R,
    weighted_product_rule_residual,
)
from psifrac.grid import Box
from psifrac.psi_ops import FracParams, Weight3, slice_integral
from psifrac.quadrature import cauchy_kernel, kernel_at, sphere_moment
from psifrac.quat import STANDARD, qnorm, rotated_set

UNIT = Box.unit()
Y = (0.5, 0.5, 0.5)
SETS = [STANDARD, rotated_set(0.4)]


def zero(x):
    return np.zeros(np.shape(x)[:-1] + (4,))


def scalar(fn):
    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (4,))
        out[..., 0] = fn(x)
        return out

    return f


# --- Cauchy kernel --------------------------------------------------------------


def test_kernel_on_unit_sphere_is_conjugate_over_4pi():
    x = np.array([0.0, 0.6, 0.8, 0.0])
    np.testing.assert_allclose(cauchy_kernel(x), np.array([0.0, -0.6, -0.8, 0.0]) / (4 * math.pi), atol=1e-15)


def test_kernel_is_odd_and_matches_table_oracle():
    rng = np.random.default_rng(3)
    d = rng.normal(size=(20, 3))
    k = kernel_at(d)
    np.testing.assert_allclose(kernel_at(-d), -k, atol=1e-15)
    for row, val in zip(d, k):
        np.testing.assert_allclose(val, table_kernel(np.append(row, 0.0)), rtol=1e-13)


def test_kernel_raises_at_origin():
    with pytest.raises(DomainError):
        cauchy_kernel(np.zeros(4))


@pytest.mark.parametrize("psi", SETS)
def test_kernel_annihilated_by_right_operator_at_order_two(psi):
    errs = [kernel_dbar_residual(h, psi) for h in (1e-2, 5e-3, 2.5e-3)]
    orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
    assert all(abs(o - 2.0) < 0.3 for o in orders)


# --- surface quadratures ---------------------------------------------------------


@pytest.mark.parametrize("psi", SETS)
def test_closed_box_surface_form_sums_to_zero(psi):
    assert closed_surface_null(Box((0, -1, 0.5), (2, 1, 1.5)), 16, psi) < 1e-14


@pytest.mark.parametrize("radius", [0.5, 1.0])
def test_sphere_moment_is_four_pi_r_cubed(radius):
    val = sphere_moment((0, 0, 0), radius, 64)
    target = 4 * math.pi * radius**3
    assert qnorm(val - np.array([target, 0, 0, 0])) / target < 1e-3


def test_sphere_moment_independent_of_centre():
    a = sphere_moment((0, 0, 0), 1.0, 32)
    b = sphere_moment((3.0, -2.0, 0.5), 1.0, 32)
    np.testing.assert_allclose(a, b, atol=1e-12)


def test_sphere_moment_order_two():
    errs = [qnorm(sphere_moment((0, 0, 0), 1.0, m) - np.array([4 * math.pi, 0, 0, 0])) for m in (16, 32, 64)]
    assert all(math.log2(a / b) >= 1.9 for a, b in zip(errs, errs[1:]))


# --- classical Stokes and Borel-Pompeiu ---------------------------------------------


def test_stokes_zero_function_is_exact():
    rep = stokes_residual(trig_field(1), zero, UNIT, 4, 4)
    assert rep.residual == 0.0


def test_stokes_with_unit_left_factor_and_linear_function():
    # g = e0, f = x0 e0: surface integral and volume integral both equal psi_0
    rep = stokes_residual(constant_field([1, 0, 0]), scalar(lambda x: x[..., 0]), UNIT, 4, 4)
    np.testing.assert_allclose(rep.lhs, [1, 0, 0, 0], atol=1e-12)
    np.testing.assert_allclose(rep.rhs, [1, 0, 0, 0], atol=1e-9)


def test_stokes_is_order_sensitive():
    # g = e1, f = e2 x0: swapping the noncommuting factors changes the surface integral
    e1 = constant_field([0, 1, 0])

    def e2x0(x):
        out = np.zeros(np.shape(x)[:-1] + (4,))
        out[..., 2] = np.asarray(x)[..., 0]
        return out

    a = stokes_residual(e1, e2x0, UNIT, 4, 4).lhs
    b = stokes_residual(e2x0, e1, UNIT, 4, 4).lhs
    assert qnorm(a - b) > 0.5


@pytest.mark.parametrize("psi", SETS)
def test_stokes_converges_at_order_two(psi):
    res = [stokes_residual(trig_field(1), trig_field(0), UNIT, n, n, psi).residual for n in (8, 16, 32)]
    assert all(math.log2(a / b) >= 1.8 for a, b in zip(res, res[1:]))


def test_borel_pompeiu_constant_inside_and_outside():
    c = constant_field([1, 0, 0])
    inside = borel_pompeiu_classical(c, zero, (0.5, 0.5, 0.5), UNIT, 8, 32)
    np.testing.assert_allclose(inside.lhs, [1, 0, 0, 0], atol=2e-3)
    outside = borel_pompeiu_classical(c, zero, (1.5, 1.5, 1.5), UNIT, 8, 32)
    assert qnorm(outside.lhs) < 1e-3


@pytest.mark.parametrize("psi", SETS)
def test_borel_pompeiu_reproduces_left_hyperholomorphic_witness(psi):
    # the volume term vanishes, so the boundary integral alone returns f(x)
    rep = borel_pompeiu_classical(witness_field(psi), zero, (0.4, 0.55, 0.5), UNIT, 8, 48, psi=psi)
    assert rep.relative_residual < 1e-2


def test_borel_pompeiu_rejects_boundary_point():
    with pytest.raises(DomainError):
        borel_pompeiu_classical(trig_field(0), zero, (1.0, 0.5, 0.5), UNIT, 4, 4)


def test_borel_pompeiu_interior_residual_decreases():
    res = [borel_pompeiu_classical(trig_field(0), trig_field(1), (0.45, 0.5, 0.55), UNIT, n, n).relative_residual for n in (8, 12, 16)]
    assert res[0] > res[1] > res[2]


# --- exponential weights ----------------------------------------------------------


def test_lambda_vanishes_for_unit_proportion():
    ls = build_lambda(Weight3.linear(), (1.0, 0.0, 0.0), Y, STANDARD, UNIT)
    np.testing.assert_allclose(ls.coeffs, 0.0, atol=1e-15)


def test_lambda_defining_condition_real_sigma():
    ls = build_lambda(Weight3.quadratic(), (0.6, 0.0, 0.0), Y, STANDARD, UNIT)
    pts = np.random.default_rng(0).uniform(0.1, 0.9, size=(20, 3))
    assert ls.defining_condition_residual(pts) < 1e-12


@pytest.mark.parametrize("psi", SETS)
def test_lambda_defining_condition_generic_sigma_random_nodes(psi):
    ls = build_lambda(Weight3.quadratic(), (0.5, 0.3, 0.0), Y, psi, UNIT)
    pts = np.random.default_rng(1).uniform(0.05, 0.95, size=(100, 3))
    assert ls.defining_condition_residual(pts) < 1e-8


def test_lambda_for_purely_vector_inverse_part():
    # sigma = (1 + e1) / 2 gives sigma^{-1} (1 - sigma) = -e1
    ls = build_lambda(Weight3.linear(), (0.5, 0.5, 0.0), Y, STANDARD, UNIT)
    np.testing.assert_allclose(ls.target, [0, -1, 0, 0], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.tuples(*[st.floats(0.0, 1.0)] * 3).filter(lambda s: np.linalg.norm(s) > 1e-3))
def test_lambda_target_stays_in_A(sigma):
    ls = build_lambda(Weight3.linear(), sigma, Y, STANDARD, UNIT)
    assert ls.target[3] == 0.0


def test_lambda_rejects_zero_proportion():
    with pytest.raises(DomainError):
        build_lambda(Weight3.linear(), (0.0, 0.0, 0.0), Y, STANDARD, UNIT)


def test_lambda_integrability_defect_vanishes_for_linear_weight():
    ls = build_lambda(Weight3.linear(), (0.5, 0.3, 0.0), Y, STANDARD, UNIT)
    assert ls.integrability_defect(certification_points(UNIT, 2)) < 1e-10


# --- weighted product rule ----------------------------------------------------------


def test_product_rule_zero_function():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.quadratic())
    ls = lambda_for(p, Y, STANDARD, UNIT)
    assert weighted_product_rule_residual(zero, p, ls, STANDARD, Y, certification_points(UNIT, 2), UNIT, 32, 1e-3) == 0.0


def test_product_rule_real_case_converges():
    f = scalar(lambda x: np.sin(x[..., 0]) + x[..., 1] * x[..., 2])
    p = FracParams((0.6, 0.7, 0.8), (0.6, 0.0, 0.0), Weight3.linear())
    ls = lambda_for(p, Y, STANDARD, UNIT)
    pts = certification_points(UNIT, 2)
    res = [weighted_product_rule_residual(f, p, ls, STANDARD, Y, pts, UNIT, nq, h) for nq, h in ((64, 4e-3), (128, 2e-3), (256, 1e-3))]
    assert res[0] > res[1] > res[2]
    assert res[2] < 1e-4


def test_product_rule_generic_sigma_linear_weight_converges():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    ls = lambda_for(p, Y, STANDARD, UNIT)
    pts = certification_points(UNIT, 2)
    res = [weighted_product_rule_residual(trig_field(0), p, ls, STANDARD, Y, pts, UNIT, nq, h) for nq, h in ((64, 4e-3), (128, 2e-3), (256, 1e-3))]
    assert all(math.log2(a / b) > 1.8 for a, b in zip(res, res[1:]))


# --- fractional Stokes -----------------------------------------------------------


def test_frac_stokes_zero_functions():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    rep = frac_stokes_residual(zero, zero, p, p, Y, UNIT, 4, 4)
    assert rep.residual == 0.0


def test_frac_stokes_degenerate_matches_classical_within_factor_two():
    p = FracParams((1.0, 1.0, 1.0), (1.0, 0.0, 0.0), Weight3.linear())
    f, g = trig_field(0), trig_field(1)
    for n in (8, 12, 16):
        frac = frac_stokes_residual(f, g, p, p, Y, UNIT, n, n).residual
        classical = stokes_residual(g, f, UNIT, n, n).residual
        assert 0.5 <= frac / classical <= 2.0


def test_frac_stokes_generic_residual_decreases():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.quadratic())
    res = [frac_stokes_residual(trig_field(0), trig_field(1), p, p, Y, UNIT, n, n).relative_residual for n in (8, 12, 16)]
    assert res[0] > res[1] > res[2]


def test_frac_stokes_rejects_boundary_base_point():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    with pytest.raises(DomainError):
        frac_stokes_residual(zero, zero, p, p, (0.0, 0.5, 0.5), UNIT, 4, 4)


# --- remainder and fractional Borel-Pompeiu ----------------------------------------


def test_remainder_of_zero_function():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    np.testing.assert_array_equal(remainder_R(zero, p, (0.3, 0.4, 0.5), Y, UNIT), np.zeros(4))


def test_remainder_is_sum_of_slice_integrals_times_derivatives_of_one():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.2), Weight3.linear())
    c = constant_field([1.0, 0.5, -0.3])
    x = (0.3, 0.4, 0.5)
    ones = [derivative_of_one(p, Y, UNIT, j, x[j], 128, 1e-3) for j in range(3)]
    expected = sum(slice_integral(c, p, Y, UNIT, i, np.array(x[i]), n_quad=128)[0] * sum(ones[j] for j in range(3) if j != i) for i in range(3))
    np.testing.assert_allclose(remainder_R(c, p, x, Y, UNIT), expected, atol=1e-14)


def test_remainder_at_order_one_counts_slices():
    # complement order 0: each slice integral is the value and each derivative of 1 is 1
    p = FracParams((1.0, 1.0, 1.0), (0.6, 0.3, 0.2), Weight3.linear())
    r = remainder_R(constant_field([1.0, 0.5, -0.3]), p, (0.3, 0.4, 0.5), Y, UNIT)
    np.testing.assert_allclose(r, [6.0, 3.0, -1.8, 0.0], rtol=1e-4)


def test_frac_bp_zero_functions():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    rep = frac_borel_pompeiu(zero, zero, p, p, (0.45, 0.55, 0.5), Y, UNIT, 6, 6, 16)
    assert rep.residual == 0.0


def test_frac_bp_rejects_points_near_boundary():
    p = FracParams.rl((0.6, 0.7, 0.8))
    with pytest.raises(DomainError):
        frac_borel_pompeiu(zero, zero, p, p, (1.05, 0.5, 0.5), Y, UNIT, 8, 8, 16)


# Both sides at n = 8 for f = [1, 0.5, -0.3], RL orders (0.6, 0.7, 0.8), frozen
# from the term-by-term assembly in oracles.rl_frac_bp_oracle.
BP_ORACLE_LHS = [7.697524879431031, 3.865967414747221, -2.149436023106279, 0.08118141355045942]
BP_ORACLE_RHS = [8.095360256533908, 4.047680128266954, -2.428608076960172, 0.0]


def _rl_setting():
    pf = FracParams.rl((0.6, 0.7, 0.8))
    pg = FracParams.rl((0.5, 0.5, 0.5))
    return constant_field([1.0, 0.5, -0.3]), pf, pg, (0.55, 0.45, 0.5), (0.4, 0.5, 0.6)


def test_frac_bp_rl_constant_matches_frozen_oracle():
    c, pf, pg, x, y = _rl_setting()
    rep = frac_borel_pompeiu(c, zero, pf, pg, x, y, UNIT, 8, 8, 32, 0.25 / 8)
    np.testing.assert_allclose(rep.lhs, BP_ORACLE_LHS, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(rep.rhs, BP_ORACLE_RHS, rtol=1e-10, atol=1e-12)


def test_frozen_oracle_values_reproduce():
    c, pf, _, x, y = _rl_setting()
    lhs, rhs = rl_frac_bp_oracle(c, pf.alpha, x, y, (0, 0, 0), (1, 1, 1), 8, 8, 32, 0.25 / 8, 2.0 / 8)
    np.testing.assert_allclose(lhs, BP_ORACLE_LHS, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(rhs, BP_ORACLE_RHS, rtol=1e-12, atol=1e-14)


def test_frac_bp_exterior_decreases():
    p = FracParams((0.6, 0.7, 0.8), (0.5, 0.3, 0.0), Weight3.linear())
    vals = [qnorm(frac_borel_pompeiu(trig_field(0), trig_field(1), p, p, (1.5, 1.5, 1.5), Y, UNIT, n, n, 32).lhs) for n in (6, 8, 10)]
    assert vals[0] > vals[1] > vals[2]


# --- boundary-only corollary --------------------------------------------------------


def _member_setting():
    s = 0.6
    p = FracParams((1.0, 1.0, 1.0), (s, 0.0, 0.0), Weight3.linear())
    return p, member_field("left", s, 3.0, Y), member_field("right", s, 3.0, Y)


def test_corollary_members_reproduce_from_boundary():
    p, fl, gr = _member_setting()
    rep = cauchy_corollary_check(fl, gr, p, p, (0.45, 0.55, 0.5), Y, UNIT, 8, 8, 64)
    assert rep.extra["residual_f"] <= rep.extra["tau_f"]
    assert rep.relative_residual < 1e-2


def test_corollary_zero_left_function():
    p, _, gr = _member_setting()
    rep = cauchy_corollary_check(zero, gr, p, p, (0.45, 0.55, 0.5), Y, UNIT, 6, 6, 64)
    assert rep.extra["stokes_boundary"] == 0.0
    assert rep.relative_residual < 1e-2


def test_corollary_boundary_stokes_term_shrinks_for_members():
    p, fl, gr = _member_setting()
    vals = [cauchy_corollary_check(fl, gr, p, p, (0.45, 0.55, 0.5), Y, UNIT, n, n, 64).extra["stokes_boundary"] for n in (6, 8)]
    assert math.log(vals[0] / vals[1]) / math.log(8 / 6) > 1.8


def test_corollary_rejects_non_member():
    p, _, _ = _member_setting()
    with pytest.raises(PreconditionError):
        cauchy_corollary_check(trig_field(0), zero, p, p, (0.45, 0.55, 0.5), Y, UNIT, 6, 6, 32)


def test_boundary_stokes_term_nonzero_for_generic_function():
    p, _, gr = _member_setting()
    rep = frac_stokes_residual(trig_field(0), gr, p, p, Y, UNIT, 8, 8)
    assert qnorm(rep.lhs) > 1e-2
