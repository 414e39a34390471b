import json
import math

import numpy as np

from elliptic_sos.utils.serialization import complex_to_pair, finite_or_none, jsonable, render_csv, render_json


def test_complex_to_pair():
    assert complex_to_pair(1.5 - 2j) == [1.5, -2.0]
    assert complex_to_pair(None) is None
    assert complex_to_pair(complex(math.nan, 1.0)) is None
    assert complex_to_pair(complex(1.0, math.inf)) is None


def test_finite_or_none():
    assert finite_or_none(None) is None
    assert finite_or_none(math.inf) is None
    assert finite_or_none(np.float64(0.25)) == 0.25


def test_jsonable():
    data = {'z': 1 + 1j, 'values': (np.float64(0.5), np.complex128(2j), math.nan), 'flag': True, 'n': np.int64(3)}
    assert jsonable(data) == {'z': [1.0, 1.0], 'values': [0.5, [0.0, 2.0], None], 'flag': True, 'n': 3}


def test_render_json_round_trips_doubles():
    value = 0.1 + 0.2
    rendered = render_json({'z': complex(value, -1 / 3)})
    assert rendered.endswith(b'\n')
    assert b'\n  "z"' in rendered
    decoded = json.loads(rendered)
    assert decoded['z'][0] == value
    assert decoded['z'][1] == -1 / 3


def test_render_json_is_deterministic():
    data = {'b': [1.0, 2j], 'a': None}
    assert render_json(data) == render_json(data)


def test_render_csv():
    text = render_csv(['index', 'value', 'reason'], [[0, 0.1 + 0.2, ''], [1, None, '[theta]'], [2, math.nan, '']])
    lines = text.splitlines()
    assert lines[0] == 'index,value,reason'
    assert lines[1] == '0,0.30000000000000004,'
    assert lines[2] == '1,,[theta]'
    assert lines[3] == '2,,'
