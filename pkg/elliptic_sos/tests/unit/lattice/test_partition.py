import numpy as np
import pytest

from elliptic_sos.exceptions import ContourTooLarge, DegenerateParameter, RouteDisagreement
from elliptic_sos.lattice.funceq import special_zero_scan
from elliptic_sos.lattice.partition import (
    ALT,
    COEFFICIENT,
    MAIN,
    PartitionReport,
    check_point,
    contour_nodes,
    crossing_factor,
    enclosure_distance,
    m_l,
    omega_L,
    partition_report,
    relative_deviation,
    z_algebraic,
    z_bar,
    z_closed_l1,
    z_contour,
    z_symmetrized,
)
from elliptic_sos.lattice.theta import EllipticContext, classify_order_norm


def route_cases():
    for tau in (1.5j, 2j, 0.5 + 2j):
        for L in (1, 2, 3, 4):
            marks = [pytest.mark.slow] if L == 4 else []
            yield pytest.param(tau, L, id=f'tau={tau}-L={L}', marks=marks)
    for L in (1, 2, 3, 4, 5, 6):
        marks = [pytest.mark.slow] if L >= 5 else []
        yield pytest.param(None, L, id=f'trigonometric-L={L}', marks=marks)


@pytest.mark.parametrize("tau,L", route_cases())
def test_routes_agree(random_model, tau, L):
    ctx = EllipticContext(tau=tau)
    for _ in range(2):
        drawn = random_model(ctx, L)
        reference = z_algebraic(drawn.model, drawn.point)
        for variant in (MAIN, ALT, COEFFICIENT):
            assert relative_deviation(reference, z_symmetrized(drawn.model, drawn.point, variant)) < 1e-9, variant


@pytest.mark.parametrize("L", [1, 2])
def test_contour_route_agrees(ctx, random_model, L):
    drawn = random_model(ctx, L)
    assert relative_deviation(z_contour(drawn.model, drawn.point, n_nodes=64), z_algebraic(drawn.model, drawn.point)) < 1e-6


def test_contour_route_limits(ctx, model_factory):
    model = model_factory(ctx, L=4)
    with pytest.raises(ValueError, match="contour route limited to L <= 3"):
        z_contour(model, (0.1, 0.2, 0.3, 0.4))
    model = model_factory(ctx, L=1)
    point = (0.27 + 0.05j,)
    with pytest.raises(ContourTooLarge):
        z_contour(model, point, radius=enclosure_distance(model, point))
    with pytest.raises(ContourTooLarge):
        z_contour(model, point, radius=0.0)


def test_contour_nodes_include_the_measure():
    nodes, weights = contour_nodes((0.1 + 0.1j, 0.5), 0.01, 16)
    assert nodes.shape == weights.shape == (32,)
    # Σ w / (z - λ) over a circle around λ is the residue 1
    assert np.sum(weights[:16] / (nodes[:16] - (0.1 + 0.1j))) == pytest.approx(1.0, abs=1e-14)


def test_closed_form_single_column(ctx, random_model):
    drawn = random_model(ctx, 1)
    assert relative_deviation(z_closed_l1(drawn.model, drawn.point[0]), z_algebraic(drawn.model, drawn.point)) < 1e-10


def test_closed_form_needs_one_column(ctx, model_factory):
    with pytest.raises(ValueError):
        z_closed_l1(model_factory(ctx, L=2), 0.3)


@pytest.mark.parametrize("L", [2, 3])
def test_symmetric_in_spectral_parameters(ctx, random_model, L):
    drawn = random_model(ctx, L)
    reference = z_algebraic(drawn.model, drawn.point)
    assert relative_deviation(reference, z_algebraic(drawn.model, drawn.point[::-1])) < 1e-11
    assert relative_deviation(reference, z_algebraic(drawn.model, drawn.point[1:] + drawn.point[:1])) < 1e-11


@pytest.mark.parametrize("L", [2, 3])
def test_symmetric_in_inhomogeneities(ctx, random_model, L):
    drawn = random_model(ctx, L)
    swapped = drawn.model.with_inhomogeneities(drawn.model.mu[::-1])
    assert relative_deviation(z_algebraic(drawn.model, drawn.point), z_algebraic(swapped, drawn.point)) < 1e-10
    assert relative_deviation(z_symmetrized(drawn.model, drawn.point), z_symmetrized(swapped, drawn.point)) < 1e-10


@pytest.mark.parametrize("L", [1, 2, 3])
def test_crossing(ctx, random_model, L):
    drawn = random_model(ctx, L)
    model, point = drawn.model, drawn.point
    crossed = (-point[0] - model.gamma,) + point[1:]
    assert relative_deviation(z_algebraic(model, crossed), crossing_factor(model, point[0]) * z_algebraic(model, point)) < 1e-10


@pytest.mark.parametrize("L", [2, 3])
def test_special_zeros(ctx, random_model, L):
    drawn = random_model(ctx, L)
    model = drawn.model

    def evaluate(point):
        return z_algebraic(model, point)

    for k in range(1, L + 1):
        ratios = special_zero_scan(model, evaluate, k, rest=drawn.point[: L - 2])
        assert ratios.shape == (2, 2)
        assert np.max(ratios) < 1e-9


@pytest.mark.parametrize("L", [1, 2, 3])
def test_z_bar_is_a_theta_function(ctx, random_model, L):
    drawn = random_model(ctx, L)
    model, rest = drawn.model, drawn.point[1:]
    residuals = classify_order_norm(ctx, lambda lam: z_bar(model, (lam,) + rest), 2 * (L + 1), (L - 1) * model.gamma)
    assert max(residuals) < 1e-8


def test_z_bar_removes_the_pole(ctx, random_model):
    drawn = random_model(ctx, 2)
    model, point = drawn.model, drawn.point
    product = np.prod([model.f(model.theta + model.zeta + lam) for lam in point])
    assert relative_deviation(z_bar(model, point), product * z_algebraic(model, point)) < 1e-11
    pole = (-model.theta - model.zeta, point[1])
    assert np.isfinite(z_bar(model, pole))
    with pytest.raises(DegenerateParameter):
        z_algebraic(model, pole)


def test_check_point(ctx, model_factory):
    model = model_factory(ctx, L=2)
    with pytest.raises(ValueError):
        check_point(model, (0.1,))
    with pytest.raises(DegenerateParameter) as e:
        check_point(model, (0.3, 0.3))
    assert e.value.guard == '[lambda_1-lambda_2]'
    at_zero = (model.mu[0], 0.4 + 0.1j)
    assert check_point(model, at_zero) == at_zero
    with pytest.raises(DegenerateParameter) as e:
        check_point(model, at_zero, strict=True)
    assert e.value.guard == '[lambda_1-mu_1]'


def test_dense_routes_are_capped(ctx, model_factory):
    model = model_factory(ctx, L=3)
    with pytest.raises(ValueError, match="limited to L <= 2"):
        z_algebraic(model, (0.1, 0.2, 0.3), max_l=2)


def test_unknown_variant(ctx, model_factory):
    with pytest.raises(ValueError):
        z_symmetrized(model_factory(ctx, L=1), (0.3,), 'SIDEWAYS')


def test_m_l_argument_count(ctx, model_factory):
    model = model_factory(ctx, L=2)
    with pytest.raises(ValueError):
        m_l(model, 2, (0.1,))
    with pytest.raises(ValueError):
        m_l(model, 3, (0.1, 0.2, 0.3))


def test_omega_depends_on_the_model_only(ctx, model_factory):
    model = model_factory(ctx, L=3)
    assert omega_L(model) == omega_L(model.with_inhomogeneities(model.mu))
    assert np.isfinite(omega_L(model))


def test_partition_report(trig_ctx, random_model):
    drawn = random_model(trig_ctx, 2)
    report = partition_report(drawn.model, drawn.point, routes=('a', 's', 'c'), contour_nodes_count=64)
    assert set(report.values) == {'algebraic', 'symmetrized', 'symmetrized_alt', 'contour'}
    assert set(report.timings) == {'algebraic', 'symmetrized', 'symmetrized_alt', 'contour'}
    assert 'algebraic/contour' in report.deviations
    assert report.diagnostics['reverse_order'] < 1e-11
    assert report.disagreements(1e-9) == {}
    report.raise_for_disagreement(1e-9)


def test_partition_report_refuses_unknown_routes(ctx, model_factory):
    with pytest.raises(ValueError):
        partition_report(model_factory(ctx, L=1), (0.3,), routes=('a', 'x'))


def test_disagreements():
    report = PartitionReport(point=(0.1,), omega_L=1.0, z_algebraic=1.0, z_symmetrized=1.0 + 1e-6, z_contour=1.0 + 1e-7)
    report.compute_deviations()
    assert set(report.disagreements(1e-9)) == {'algebraic/symmetrized'}
    with pytest.raises(RouteDisagreement) as e:
        report.raise_for_disagreement(1e-9)
    assert 'algebraic/symmetrized' in e.value.deviations


def test_relative_deviation():
    assert relative_deviation(0, 0) == 0.0
    assert relative_deviation(1.0, 1.5) == pytest.approx(1 / 3)
