from django.core.checks import Error, register

from elliptic_sos.lattice.partition import DEFAULT_MAX_L
from elliptic_sos.lattice.theta import MINIMUM_MAX_TERMS
from elliptic_sos.utils.settings import get_setting

MINIMUM_CONTOUR_NODES = 8


@register()
def check_elliptic_sos_settings(app_configs, **kwargs):
    errors = []
    series_tol = get_setting('SERIES_TOL')
    if not isinstance(series_tol, (int, float)) or series_tol <= 0:
        errors.append(Error('ELLIPTIC_SOS_SERIES_TOL must be a positive number', hint=f'Got {series_tol!r}, the default is 1e-16', id='elliptic_sos.E001'))

    max_terms = get_setting('MAX_TERMS')
    if not isinstance(max_terms, int) or max_terms < MINIMUM_MAX_TERMS:
        errors.append(Error(f'ELLIPTIC_SOS_MAX_TERMS must be an integer of at least {MINIMUM_MAX_TERMS}', hint=f'Got {max_terms!r}', id='elliptic_sos.E002'))

    guard = get_setting('GUARD')
    if not isinstance(guard, (int, float)) or not 0 < guard < 1e-6:
        errors.append(Error('ELLIPTIC_SOS_GUARD must lie strictly between 0 and 1e-6', hint=f'Got {guard!r}, the default is 1e-12', id='elliptic_sos.E003'))

    max_nome = get_setting('MAX_NOME')
    if not isinstance(max_nome, (int, float)) or not 0 < max_nome < 1:
        errors.append(Error('ELLIPTIC_SOS_MAX_NOME must lie strictly between 0 and 1', hint=f'Got {max_nome!r}, the default is 0.85', id='elliptic_sos.E004'))

    max_l = get_setting('MAX_L')
    contour_max_l = get_setting('CONTOUR_MAX_L')
    contour_nodes = get_setting('CONTOUR_NODES')
    sizes_ok = all(isinstance(value, int) for value in (max_l, contour_max_l)) and 1 <= contour_max_l <= max_l <= DEFAULT_MAX_L
    if not sizes_ok:
        errors.append(
            Error(
                f'System sizes must satisfy 1 <= ELLIPTIC_SOS_CONTOUR_MAX_L <= ELLIPTIC_SOS_MAX_L <= {DEFAULT_MAX_L}',
                hint=f'Got CONTOUR_MAX_L={contour_max_l!r} and MAX_L={max_l!r}',
                id='elliptic_sos.E005',
            )
        )
    if not isinstance(contour_nodes, int) or contour_nodes < MINIMUM_CONTOUR_NODES:
        errors.append(
            Error(
                f'ELLIPTIC_SOS_CONTOUR_NODES must be an integer of at least {MINIMUM_CONTOUR_NODES}',
                hint=f'Got {contour_nodes!r}, the default is 128',
                id='elliptic_sos.E005',
            )
        )
    return errors
