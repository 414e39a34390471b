from dataclasses import dataclass
from typing import Tuple

import numpy as np

from elliptic_sos.lattice.algebra import ModelInstance
from elliptic_sos.lattice.partition import check_point
from elliptic_sos.lattice.theta import EllipticContext
from elliptic_sos.utils.sampling import DEFAULT_REGION, SamplingRegion, draw_complex, draw_generic


@dataclass(frozen=True)
class ModelDraw:
    model: ModelInstance
    point: Tuple[complex, ...]
    extra: Tuple[complex, ...] = ()


def draw_model(rng: np.random.Generator, ctx: EllipticContext, L: int, region: SamplingRegion = DEFAULT_REGION, extra: int = 0) -> ModelDraw:
    """
    A generic model with L columns, a generic point λ_1..λ_L and `extra` further spectral parameters. Raises
    DegenerateParameter on a non-generic draw, so it is meant to be wrapped in draw_generic.
    """
    gamma, zeta, theta = draw_complex(rng, 3, region)
    mu = draw_complex(rng, L, region)
    point = draw_complex(rng, L, region)
    extras = draw_complex(rng, extra, region)
    model = ModelInstance(ctx=ctx, gamma=gamma, zeta=zeta, theta=theta, mu=mu)
    point = check_point(model, point, strict=True)
    for i, lam in enumerate(extras):
        model.require(model.theta + model.zeta + lam, f'[theta+zeta+extra_{i}]')
        model.require(2 * lam + model.gamma, f'[2*extra_{i}+gamma]')
        for j, other in enumerate(point + extras[:i], start=1):
            model.require(lam - other, f'[extra_{i}-lambda_{j}]')
            model.require(lam + other + model.gamma, f'[extra_{i}+lambda_{j}+gamma]')
    return ModelDraw(model=model, point=point, extra=extras)


def draw_generic_model(rng: np.random.Generator, ctx: EllipticContext, L: int, region: SamplingRegion = DEFAULT_REGION, extra: int = 0) -> ModelDraw:
    return draw_generic(rng, lambda rng: draw_model(rng, ctx, L, region, extra=extra))
