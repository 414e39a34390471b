import numpy as np
import pytest

from elliptic_sos.exceptions import DegenerateParameter
from elliptic_sos.lattice.algebra import (
    BACKWARD,
    FORWARD,
    REL_ABB,
    RELATIONS,
    algebra_relation_residual,
    apply_b,
    b_crossing_factor,
    build_double_row,
    build_monodromy,
    d_tilde,
    double_row_weight_residuals,
    extract_block,
    lambda_a_cal,
    monodromy_crossing_residual,
    monodromy_unitarity_residual,
    vacuum_annihilation_residual,
    vacuum_eigenvalues_closed,
    vacuum_eigenvalues_operator,
)
from elliptic_sos.lattice.theta import EllipticContext

DRAWS = 3


def relation_cases():
    for L in (1, 2, 3):
        yield pytest.param(1.5j, L, id=f'tau=1.5j-L={L}')
        yield pytest.param(0.5 + 2j, L, id=f'tau=0.5+2j-L={L}')
    for L in (1, 2, 3):
        yield pytest.param(None, L, id=f'trigonometric-L={L}')
    yield pytest.param(None, 4, id='trigonometric-L=4', marks=pytest.mark.slow)


@pytest.mark.parametrize("tau,L", relation_cases())
@pytest.mark.parametrize("relation", RELATIONS)
def test_algebra_relations(random_model, tau, L, relation):
    ctx = EllipticContext(tau=tau)
    for _ in range(DRAWS):
        drawn = random_model(ctx, L, extra=2)
        lam0, lam1 = drawn.extra
        second = drawn.point if relation == REL_ABB else lam1
        assert algebra_relation_residual(drawn.model, relation, lam0, second) < 1e-10


def test_unknown_relation(ctx, model_factory):
    with pytest.raises(ValueError):
        algebra_relation_residual(model_factory(ctx), 'NOPE', 0.1, 0.2)


@pytest.mark.parametrize("L", [1, 2, 3, 4])
def test_vacuum_eigenvalues(ctx, random_model, L):
    drawn = random_model(ctx, L, extra=1)
    lam = drawn.extra[0]
    closed = vacuum_eigenvalues_closed(drawn.model, lam)
    operator, leak = vacuum_eigenvalues_operator(drawn.model, lam)
    for name in closed.__dataclass_fields__:
        assert getattr(operator, name) == pytest.approx(getattr(closed, name), rel=1e-10), name
    assert leak < 1e-11
    assert vacuum_annihilation_residual(drawn.model, lam) < 1e-11


@pytest.mark.parametrize("L", [1, 2, 3])
def test_monodromy_identities(ctx, random_model, L):
    drawn = random_model(ctx, L, extra=1)
    lam = drawn.extra[0]
    assert monodromy_unitarity_residual(drawn.model, lam) < 1e-10
    assert monodromy_crossing_residual(drawn.model, lam) < 1e-10


@pytest.mark.parametrize("L", [1, 2, 3])
def test_double_row_weights(ctx, random_model, L):
    drawn = random_model(ctx, L, extra=1)
    residuals = double_row_weight_residuals(drawn.model, drawn.extra[0])
    assert set(residuals) == {'T', 'A', 'B', 'C', 'D', 'Dt'}
    assert max(residuals.values()) < 1e-12


def test_monodromy_shapes(ctx, model_factory):
    model = model_factory(ctx, L=2)
    forward = build_monodromy(model, 0.3, FORWARD)
    backward = build_monodromy(model, 0.3, BACKWARD)
    assert forward.dim == backward.dim == 8
    assert extract_block(build_double_row(model, 0.3), 'B').weight == -2
    assert d_tilde(model, 0.3).matrix.shape == (4, 4)
    with pytest.raises(ValueError):
        build_monodromy(model, 0.3, 'SIDEWAYS')


def test_apply_b_matches_the_block(ctx, model_factory):
    model = model_factory(ctx, L=2)
    lam = 0.27 - 0.06j
    vector = np.arange(4, dtype=complex) + 1j
    b = extract_block(build_double_row(model, lam), 'B').matrix
    assert np.allclose(apply_b(model, lam, vector), b @ vector, rtol=1e-12, atol=0)
    normalized = apply_b(model, lam, vector, normalized=True)
    assert np.allclose(normalized, model.f(model.theta + model.zeta + lam) * (b @ vector), rtol=1e-12, atol=0)


def test_b_crossing_factor(ctx, model_factory):
    model = model_factory(ctx, L=1)
    lam = 0.22 + 0.03j
    b = extract_block(build_double_row(model, lam), 'B').matrix
    crossed = extract_block(build_double_row(model, -lam - model.gamma), 'B').matrix
    assert np.allclose(crossed, b_crossing_factor(model, lam) * b, rtol=1e-10, atol=0)


def test_lambda_a_cal_refuses_the_pole(ctx, model_factory):
    model = model_factory(ctx)
    with pytest.raises(DegenerateParameter) as e:
        lambda_a_cal(model, -model.theta - model.zeta)
    assert e.value.guard == '[theta+zeta+lambda]'


def test_model_refuses_degenerate_parameters(ctx, model_factory):
    with pytest.raises(DegenerateParameter) as e:
        model_factory(ctx, L=2, mu=(0.2, 0.2))
    assert e.value.guard == '[mu_1-mu_2]'
    with pytest.raises(DegenerateParameter):
        model_factory(ctx, L=1, theta=2 * 0.31 + 0.14j, gamma=0.31 + 0.07j)
    with pytest.raises(ValueError):
        model_factory(ctx, L=1, mu=())


def test_with_inhomogeneities(ctx, model_factory):
    model = model_factory(ctx, L=3)
    reduced = model.with_inhomogeneities(model.mu[:-1])
    assert reduced.L == 2
    assert reduced.gamma == model.gamma
    assert model.h_quantum.tolist() == [3, 1, 1, -1, 1, -1, -1, -3]
