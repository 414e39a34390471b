import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elliptic_sos.exceptions import DegenerateNodes, DegenerateParameter, InvalidContext, NonConvergence
from elliptic_sos.lattice.theta import (
    EllipticContext,
    HigherOrderTheta,
    addition_rule_residual,
    bracket,
    classify_order_norm,
    eval_f,
    f_prime_zero,
    interpolate_theta,
    lattice_distance,
    reduce_argument,
    require_generic,
    trig_degree_residual,
)

TAU = 1.5j
complex_points = st.builds(complex, st.floats(-1.5, 1.5), st.floats(-1.0, 1.0))


def jtheta_f(tau, lam):
    """f through mpmath: f(λ) = -i θ_1(iλ, q) / (2 q^{1/4})."""
    q = mpmath.exp(1j * mpmath.pi * tau)
    quarter = mpmath.exp(1j * mpmath.pi * tau / 4)
    return complex(-1j * mpmath.jtheta(1, 1j * lam, q) / (2 * quarter))


@pytest.mark.parametrize("lam", [0.3 + 0.1j, -0.7 + 0.4j, 1.9 - 0.8j, 5.2 + 2.1j])
def test_matches_jtheta(elliptic_ctx, lam):
    expected = jtheta_f(elliptic_ctx.tau, lam)
    assert abs(eval_f(elliptic_ctx, lam) - expected) <= 1e-12 * abs(expected)


def test_trigonometric_context_is_sinh(trig_ctx):
    for lam in (0.3 + 0.1j, -2.5 + 1.4j):
        assert eval_f(trig_ctx, lam) == pytest.approx(cmath.sinh(lam), rel=1e-15)
    assert trig_ctx.q == 0
    assert trig_ctx.fprime0 == 1


def test_nearly_trigonometric_limit():
    ctx = EllipticContext(tau=40j)
    for lam in (0.3 + 0.1j, 0.8 - 0.25j):
        assert abs(eval_f(ctx, lam) - cmath.sinh(lam)) <= 1e-12 * abs(cmath.sinh(lam))


def test_array_evaluation(ctx):
    lams = np.array([0.1 + 0.2j, 0.4 - 0.3j, 0.7 + 0.05j])
    values = eval_f(ctx, lams)
    assert isinstance(values, np.ndarray)
    assert values.shape == (3,)
    for lam, value in zip(lams, values):
        assert value == pytest.approx(eval_f(ctx, complex(lam)), rel=1e-14)
    assert isinstance(eval_f(ctx, 0.3), complex)


@settings(max_examples=50, deadline=None)
@given(lam=complex_points)
def test_oddness(lam):
    ctx = EllipticContext(tau=TAU)
    assert abs(eval_f(ctx, lam) + eval_f(ctx, -lam)) <= 1e-12 * max(1.0, abs(eval_f(ctx, lam)))


@settings(max_examples=50, deadline=None)
@given(lam=complex_points)
def test_quasiperiodicity(lam):
    ctx = EllipticContext(tau=0.5 + 2j)
    value = eval_f(ctx, lam)
    scale = max(1.0, abs(value))
    assert abs(eval_f(ctx, lam + 1j * np.pi) + value) <= 1e-12 * scale
    expected = -cmath.exp(-2 * lam - 1j * np.pi * ctx.tau) * value
    assert abs(eval_f(ctx, lam + 1j * np.pi * ctx.tau) - expected) <= 1e-10 * max(1.0, abs(expected))


@settings(max_examples=50, deadline=None)
@given(lams=st.tuples(complex_points, complex_points, complex_points, complex_points))
def test_addition_rule(lams):
    assert addition_rule_residual(EllipticContext(tau=TAU), *lams) < 1e-10


def test_addition_rule_trigonometric(trig_ctx):
    assert addition_rule_residual(trig_ctx, 0.3 + 0.1j, -0.2 + 0.4j, 0.7 - 0.3j, 0.05 + 0.2j) < 1e-12


@pytest.mark.parametrize("m,n", [(1, 0), (0, 1), (-1, 1), (2, -1)])
def test_lattice_zeros(elliptic_ctx, m, n):
    zero = 1j * np.pi * (m + n * elliptic_ctx.tau)
    assert abs(eval_f(elliptic_ctx, zero)) <= 1e-12 * abs(eval_f(elliptic_ctx, zero + 0.05))
    assert lattice_distance(elliptic_ctx, zero + 0.01) == pytest.approx(0.01, rel=1e-9)


def test_f_prime_zero(elliptic_ctx):
    h = 1e-5
    difference = (eval_f(elliptic_ctx, h) - eval_f(elliptic_ctx, -h)) / (2 * h)
    assert abs(difference - f_prime_zero(elliptic_ctx)) <= 1e-8 * abs(f_prime_zero(elliptic_ctx))
    q2 = elliptic_ctx.q**2
    expected = complex(mpmath.qp(q2, q2) ** 3)
    assert f_prime_zero(elliptic_ctx) == pytest.approx(expected, rel=1e-13)


def test_reduce_argument(elliptic_ctx):
    lam = 3.7 + 6.1j
    reduced, multiplier = reduce_argument(elliptic_ctx, lam)
    assert abs(reduced.real) <= abs(np.pi * elliptic_ctx.tau.imag) / 2 + 1e-12
    assert multiplier * jtheta_f(elliptic_ctx.tau, reduced) == pytest.approx(jtheta_f(elliptic_ctx.tau, lam), rel=1e-11)


def test_reduce_argument_needs_elliptic_context(trig_ctx):
    with pytest.raises(InvalidContext):
        reduce_argument(trig_ctx, 0.3)


@pytest.mark.parametrize(
    "kwargs",
    [
        {'tau': -1j},
        {'tau': 0.5},
        {'tau': 1j, 'series_tol': 0},
        {'tau': 1j, 'max_terms': 4},
        {'tau': 1j, 'guard': -1.0},
    ],
)
def test_invalid_context(kwargs):
    with pytest.raises(InvalidContext):
        EllipticContext(**kwargs)


def test_series_non_convergence():
    ctx = EllipticContext(tau=TAU, series_tol=1e-300, max_terms=8)
    with pytest.raises(NonConvergence) as e:
        eval_f(ctx, 0.3 + 0.1j)
    assert e.value.terms == 8


def test_bracket(ctx):
    assert bracket(ctx, []) == 1
    assert bracket(ctx, [0.2, 0.5j]) == pytest.approx(eval_f(ctx, 0.2) * eval_f(ctx, 0.5j), rel=1e-15)


def test_require_generic_names_the_guard(ctx):
    with pytest.raises(DegenerateParameter) as e:
        require_generic(ctx, 1e-15, '[lambda_1-mu_1]')
    assert e.value.guard == '[lambda_1-mu_1]'
    assert '[lambda_1-mu_1]' in str(e.value)
    assert require_generic(ctx, 0.4, '[x]') == eval_f(ctx, 0.4)


def test_classify_higher_order_theta(ctx):
    target = HigherOrderTheta(prefactor=2.0, zeros=(0.1 + 0.2j, -0.3 + 0.05j, 0.45 - 0.1j))
    residuals = classify_order_norm(ctx, lambda lam: target.evaluate(ctx, lam), target.order, target.norm)
    assert max(residuals) < 1e-10


def test_classify_detects_wrong_norm(elliptic_ctx):
    target = HigherOrderTheta(prefactor=1.0, zeros=(0.1 + 0.2j, -0.3 + 0.05j))
    _, residual_pi_tau = classify_order_norm(elliptic_ctx, lambda lam: target.evaluate(elliptic_ctx, lam), 2, target.norm + 0.3)
    assert residual_pi_tau > 1e-2


def test_trig_degree_residual():
    assert trig_degree_residual(lambda lam: cmath.sinh(lam) ** 3, 3) < 1e-13
    assert trig_degree_residual(lambda lam: cmath.sinh(lam) ** 3 * cmath.exp(lam), 3) > 1e-2


def test_interpolation(ctx):
    target = HigherOrderTheta(prefactor=1.5 - 0.5j, zeros=(0.12 + 0.31j, -0.27 + 0.08j, 0.4 - 0.22j))
    nodes = (0.05 + 0.1j, 0.33 - 0.2j, 0.61 + 0.25j)
    values = [target.evaluate(ctx, node) for node in nodes]
    for node, value in zip(nodes, values):
        assert interpolate_theta(ctx, 3, target.norm, nodes, values, node) == pytest.approx(value, rel=1e-12)
    for lam in (0.2 + 0.05j, -0.4 + 0.3j):
        assert interpolate_theta(ctx, 3, target.norm, nodes, values, lam) == pytest.approx(target.evaluate(ctx, lam), rel=1e-10)


def test_interpolation_refuses_bad_input(ctx):
    with pytest.raises(ValueError):
        interpolate_theta(ctx, 1, 0.0, [0.1], [1.0], 0.2)
    with pytest.raises(ValueError):
        interpolate_theta(ctx, 3, 0.0, [0.1, 0.2], [1.0, 1.0], 0.2)
    with pytest.raises(DegenerateNodes):
        interpolate_theta(ctx, 2, 0.1, [0.3, 0.3], [1.0, 1.0], 0.2)


def test_higher_order_theta_norm_mismatch():
    with pytest.raises(ValueError):
        HigherOrderTheta(prefactor=1.0, zeros=(0.1, 0.2), norm=0.5)
