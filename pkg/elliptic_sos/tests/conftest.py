import pytest

from elliptic_sos.lattice.algebra import ModelInstance
from elliptic_sos.lattice.theta import EllipticContext
from elliptic_sos.utils.sampling import make_rng
from elliptic_sos.verification.draws import draw_generic_model

ELLIPTIC_TAUS = (1.5j, 2j, 0.5 + 2j)


@pytest.fixture(params=[*ELLIPTIC_TAUS, None], ids=['tau=1.5j', 'tau=2j', 'tau=0.5+2j', 'trigonometric'])
def ctx(request):
    return EllipticContext(tau=request.param)


@pytest.fixture(params=ELLIPTIC_TAUS, ids=['tau=1.5j', 'tau=2j', 'tau=0.5+2j'])
def elliptic_ctx(request):
    return EllipticContext(tau=request.param)


@pytest.fixture
def trig_ctx():
    return EllipticContext()


@pytest.fixture
def rng():
    return make_rng(42)


@pytest.fixture
def model_factory():
    """
    Build a ModelInstance from explicit parameters; the defaults are a fixed generic choice so failures
    reproduce without a seed.
    """

    def _model_factory(ctx, L=2, gamma=0.31 + 0.07j, zeta=0.43 - 0.11j, theta=0.57 + 0.13j, mu=None):
        if mu is None:
            mu = (0.21 + 0.05j, 0.36 - 0.08j, 0.66 + 0.12j, 0.81 - 0.04j, 0.15 - 0.17j, 0.72 + 0.19j)[:L]
        return ModelInstance(ctx=ctx, gamma=gamma, zeta=zeta, theta=theta, mu=mu)

    return _model_factory


@pytest.fixture
def random_model(rng):
    """draw(ctx, L, extra=0) -> ModelDraw with a generic model, point and extra spectral parameters."""

    def _random_model(ctx, L, extra=0):
        return draw_generic_model(rng, ctx, L, extra=extra)

    return _random_model
