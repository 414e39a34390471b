import logging
from typing import Any, Optional

from django.conf import settings

from elliptic_sos.exceptions import InvalidContext
from elliptic_sos.lattice.partition import DEFAULT_CONTOUR_MAX_L, DEFAULT_CONTOUR_NODES, DEFAULT_MAX_L, DEFAULT_RADIUS_FRACTION
from elliptic_sos.lattice.theta import DEFAULT_GUARD, DEFAULT_MAX_TERMS, DEFAULT_SERIES_TOL, EllipticContext

logger = logging.getLogger('elliptic_sos.utils.settings')

SETTING_PREFIX = 'ELLIPTIC_SOS_'

DEFAULTS = {
    'FEATURES': {'CONTOUR': True},
    'SERIES_TOL': DEFAULT_SERIES_TOL,
    'MAX_TERMS': DEFAULT_MAX_TERMS,
    'GUARD': DEFAULT_GUARD,
    'MAX_NOME': 0.85,
    'MAX_L': DEFAULT_MAX_L,
    'CONTOUR_MAX_L': DEFAULT_CONTOUR_MAX_L,
    'CONTOUR_NODES': DEFAULT_CONTOUR_NODES,
    'CONTOUR_RADIUS_FRACTION': DEFAULT_RADIUS_FRACTION,
    'ROUTE_TOLERANCE': 1e-9,
}


def get_setting(name: str) -> Any:
    """ELLIPTIC_SOS_<name> from the Django settings, falling back to the packaged default."""
    if name not in DEFAULTS:
        raise KeyError(f"Unknown setting {SETTING_PREFIX}{name}")
    return getattr(settings, f'{SETTING_PREFIX}{name}', DEFAULTS[name])


def feature_enabled(feature: str) -> bool:
    features = get_setting('FEATURES') or {}
    return bool(features.get(feature, DEFAULTS['FEATURES'].get(feature, False)))


def get_elliptic_context(tau: Optional[complex] = None) -> EllipticContext:
    """A context with the configured series truncation and guard; refuses nomes above ELLIPTIC_SOS_MAX_NOME."""
    ctx = EllipticContext(
        tau=tau,
        series_tol=get_setting('SERIES_TOL'),
        max_terms=get_setting('MAX_TERMS'),
        guard=get_setting('GUARD'),
    )
    max_nome = get_setting('MAX_NOME')
    if abs(ctx.q) > max_nome:
        raise InvalidContext(f"|q| = {abs(ctx.q):.4f} for tau={tau} exceeds the configured maximum {max_nome}")
    logger.debug(f"Built context {ctx.describe()} with |q|={abs(ctx.q):.3e}")
    return ctx
