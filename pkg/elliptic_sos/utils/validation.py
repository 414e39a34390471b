import math
from typing import Sequence, Tuple

from django.utils.translation import gettext_lazy as _
from rest_framework.serializers import ValidationError

from elliptic_sos.lattice.partition import ROUTES

SUITE_NAMES = ('theta', 'weights', 'algebra', 'partition', 'funceq')

COMPLEX_PAIR = _('Must be a two element list [re, im] of finite numbers')


def validate_complex_pair(value) -> complex:
    if type(value) not in (list, tuple) or len(value) != 2:
        raise ValidationError(COMPLEX_PAIR)
    for part in value:
        # bool is an int subclass
        if isinstance(part, bool) or not isinstance(part, (int, float)) or not math.isfinite(part):
            raise ValidationError(COMPLEX_PAIR)
    return complex(float(value[0]), float(value[1]))


def _parse_choices(value, choices: Sequence[str], what: str) -> Tuple[str, ...]:
    if isinstance(value, str):
        value = [item.strip() for item in value.split(',')]
    if type(value) not in (list, tuple) or not value:
        raise ValidationError(f"Must be a non-empty comma separated list of {what}")
    errors = []
    parsed = []
    for item in value:
        if item not in choices:
            errors.append(f"{item!r} is not one of {', '.join(choices)}")
        elif item not in parsed:
            parsed.append(item)
    if errors:
        raise ValidationError(', '.join(errors))
    return tuple(parsed)


def parse_routes(value) -> Tuple[str, ...]:
    """'a,s,c' -> ('a', 's', 'c'); order is kept, duplicates dropped."""
    return _parse_choices(value, tuple(ROUTES), 'routes')


def parse_suites(value) -> Tuple[str, ...]:
    return _parse_choices(value, SUITE_NAMES, 'suites')


def validate_tolerance(value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value) or value <= 0:
        raise ValidationError(_('Tolerance must be a positive finite number'))
    return float(value)
