import csv
import io
import math
from typing import Any, Iterable, List, Optional, Sequence

from rest_framework.renderers import JSONRenderer


def finite_or_none(value: Optional[float]) -> Optional[float]:
    if value is None:
        return None
    value = float(value)
    return value if math.isfinite(value) else None


def complex_to_pair(value: Optional[complex]) -> Optional[List[Optional[float]]]:
    """[re, im]; a value with a non-finite part becomes None so it never reaches the JSON output."""
    if value is None:
        return None
    value = complex(value)
    pair = [finite_or_none(value.real), finite_or_none(value.imag)]
    if None in pair:
        return None
    return pair


def jsonable(value: Any) -> Any:
    """Recursively turn complex numbers, tuples and numpy scalars into plain JSON types."""
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, complex):
        return complex_to_pair(value)
    if hasattr(value, 'item'):
        return jsonable(value.item())
    if isinstance(value, float):
        return finite_or_none(value)
    return value


def render_json(data: Any) -> bytes:
    # JSONRenderer is strict, a NaN that slipped through raises instead of being written
    return JSONRenderer().render(jsonable(data), renderer_context={'indent': 2}) + b'\n'


def _csv_cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else ''
    return str(value)


def render_csv(headers: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(headers)
    for row in rows:
        writer.writerow([_csv_cell(cell) for cell in row])
    return buffer.getvalue()
