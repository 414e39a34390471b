import logging
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from elliptic_sos.exceptions import DegenerateParameter

logger = logging.getLogger('elliptic_sos.utils.sampling')

T = TypeVar('T')

DEFAULT_MAX_ATTEMPTS = 100


@dataclass(frozen=True)
class SamplingRegion:
    """Rectangle the complex draws are taken from."""

    real: Tuple[float, float] = (0.1, 0.9)
    imag: Tuple[float, float] = (-0.3, 0.3)


DEFAULT_REGION = SamplingRegion()


def make_rng(seed: Union[int, Sequence[int], None]) -> np.random.Generator:
    return np.random.default_rng(seed)


def draw_complex(rng: np.random.Generator, count: int, region: SamplingRegion = DEFAULT_REGION) -> Tuple[complex, ...]:
    real = rng.uniform(*region.real, size=count)
    imag = rng.uniform(*region.imag, size=count)
    return tuple(complex(re, im) for re, im in zip(real, imag))


def draw_generic(rng: np.random.Generator, build: Callable[[np.random.Generator], T], max_attempts: int = DEFAULT_MAX_ATTEMPTS) -> T:
    """
    Call build(rng) until it stops raising DegenerateParameter. Every rejected draw still advances the generator,
    so the sequence of accepted draws only depends on the seed.
    """
    for attempt in range(1, max_attempts + 1):
        try:
            result = build(rng)
        except DegenerateParameter as e:
            logger.debug(f"Rejected draw {attempt}: {e}")
            continue
        if attempt > 1:
            logger.warning(f"Resampled {attempt - 1} degenerate draws before a generic one")
        return result
    raise DegenerateParameter(f'no generic draw within {max_attempts} attempts')
