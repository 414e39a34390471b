import csv
import json
from io import StringIO
from unittest import mock

import pytest
from django.core.management import CommandError, call_command

from elliptic_sos.lattice.partition import PartitionReport

MODEL = {'tau': None, 'gamma': [0.31, 0.07], 'zeta': [0.43, -0.11], 'theta': [0.57, 0.13], 'mu': [[0.21, 0.05]]}
ELLIPTIC_MODEL = {**MODEL, 'tau': [0.0, 2.0], 'mu': [[0.21, 0.05], [0.36, -0.08]]}


@pytest.fixture
def write_config(tmp_path):
    def _write_config(document, name='config.json'):
        config_path = tmp_path / name
        config_path.write_text(json.dumps(document))
        return str(config_path)

    return _write_config


def run(*args):
    out = StringIO()
    err = StringIO()
    call_command('sos_partition', *args, stdout=out, stderr=err)
    return out.getvalue(), err.getvalue()


def test_eval_all_routes_agree(write_config, tmp_path):
    config = write_config({'model': MODEL, 'point': [[0.44, 0.03]]})
    out_path = tmp_path / 'report.json'
    out, _ = run('eval', '--config', config, '--routes', 'a,s,c', '--out', str(out_path))

    document = json.loads(out_path.read_text())
    assert document['command'] == 'eval'
    assert document['seed'] == 42
    assert document['context'] == 'trigonometric'
    assert document['passed'] is True
    assert document['disagreements'] == {}
    report = document['report']
    for name in ('z_algebraic', 'z_symmetrized', 'z_symmetrized_alt', 'z_contour'):
        assert len(report[name]) == 2
    assert set(report['timings']) == {'algebraic', 'symmetrized', 'symmetrized_alt', 'contour'}

    lines = out.strip().splitlines()
    for header in ("Route", "Re Z", "Im Z", "Seconds"):
        assert header in lines[0]
    assert len(lines) == 2 + 4


def test_eval_writes_json_to_stdout(write_config):
    config = write_config({'model': ELLIPTIC_MODEL})
    out, _ = run('eval', '--config', config, '--seed', '3')
    document = json.loads(out)
    assert document['seed'] == 3
    assert document['context'] == 'tau=2j'
    assert len(document['report']['point']) == 2
    assert document['report']['z_contour'] is None


@mock.patch("elliptic_sos.management.commands.sos_partition.HAS_TABULATE", False)
def test_eval_table_without_tabulate(write_config, tmp_path):
    config = write_config({'model': MODEL, 'point': [[0.44, 0.03]]})
    out, _ = run('eval', '--config', config, '--out', str(tmp_path / 'report.json'))
    lines = out.strip().splitlines()
    assert lines[0].split('\t') == ["Route", "Re Z", "Im Z", "Seconds"]
    assert lines[1].split('\t')[0] == 'algebraic'


def test_eval_reports_disagreement(write_config):
    config = write_config({'model': MODEL, 'point': [[0.44, 0.03]]})
    with mock.patch.object(PartitionReport, 'disagreements', return_value={'algebraic/symmetrized': 1e-3}):
        with pytest.raises(SystemExit) as e:
            run('eval', '--config', config)
    assert e.value.code == 4


def test_eval_refuses_special_point(write_config):
    config = write_config({'model': MODEL, 'point': MODEL['mu']})
    with pytest.raises(CommandError) as e:
        run('eval', '--config', config)
    assert e.value.returncode == 3
    assert '[lambda_1-mu_1]' in str(e.value)


@pytest.mark.parametrize(
    "document,args,message",
    [
        ({'model': {**MODEL, 'mu': [[0.1, 0.0], [0.2, 0.0], [0.3, 0.0], [0.4, 0.0]]}}, ['--routes', 'a,c'], 'contour route limited to L <= 3'),
        ({'model': MODEL}, ['--routes', 'a,b'], "'b' is not one of"),
        ({'model': MODEL, 'colour': 'red'}, [], 'Unknown key'),
        ({}, [], 'needs a model section'),
        ([1, 2], [], 'must be a JSON object'),
    ],
)
def test_eval_config_errors(write_config, document, args, message):
    config = write_config(document)
    with pytest.raises(CommandError) as e:
        run('eval', '--config', config, *args)
    assert e.value.returncode == 2
    assert message in str(e.value)


def test_unreadable_config(tmp_path):
    broken = tmp_path / 'broken.json'
    broken.write_text('{"model": ')
    with pytest.raises(CommandError) as e:
        run('eval', '--config', str(broken))
    assert e.value.returncode == 2
    with pytest.raises(CommandError) as e:
        run('eval', '--config', str(tmp_path / 'missing.json'))
    assert e.value.returncode == 2


VERIFY_CONFIG = {'verify': {'taus': [[0.0, 2.0]], 'trigonometric': True, 'max_l': 1, 'trig_max_l': 1}}


def test_verify_passes_and_is_reproducible(write_config):
    config = write_config(VERIFY_CONFIG)
    first, _ = run('verify', '--config', config, '--suites', 'theta,weights', '--draws', '1')
    second, _ = run('verify', '--config', config, '--suites', 'theta,weights', '--draws', '1')
    assert first == second

    document = json.loads(first)
    assert document['command'] == 'verify'
    assert document['passed'] is True
    assert [suite['name'] for suite in document['suites']] == ['theta', 'weights']
    assert all(check['passed'] for suite in document['suites'] for check in suite['checks'])


def test_verify_failure_exit_code(write_config, tmp_path):
    config = write_config(VERIFY_CONFIG)
    out_path = tmp_path / 'verify.json'
    with pytest.raises(SystemExit) as e:
        run('verify', '--config', config, '--suites', 'weights', '--draws', '1', '--tol', '1e-300', '--out', str(out_path))
    assert e.value.code == 5
    document = json.loads(out_path.read_text())
    assert document['passed'] is False


def scan_config(**scan):
    axis = {'parameter': 'lambda', 'index': 1, 'start': [0.2, 0.0], 'stop': [0.6, 0.0], 'num': 3}
    axis.update(scan)
    return {'model': MODEL, 'point': [[0.44, 0.03]], 'scan': axis}


def test_scan_empty_grid(write_config):
    out, _ = run('scan', '--config', write_config(scan_config(num=0)))
    rows = list(csv.reader(StringIO(out)))
    assert rows == [['index', 'seed', 'lambda_1_re', 'lambda_1_im', 'z_re', 'z_im', 'abs_z', 'z_bar_re', 'z_bar_im', 'abs_z_bar', 'reason']]


def test_scan_csv(write_config):
    out, _ = run('scan', '--config', write_config(scan_config(residuals=['symmetry', 'fe'])))
    rows = list(csv.DictReader(StringIO(out)))
    assert [row['index'] for row in rows] == ['0', '1', '2']
    assert [float(row['lambda_1_re']) for row in rows] == pytest.approx([0.2, 0.4, 0.6])
    for row in rows:
        assert row['reason'] == ''
        assert float(row['abs_z']) > 0
        assert float(row['symmetry_residual']) == 0.0
        assert float(row['fe_residual']) < 1e-8


def test_scan_marks_degenerate_points(write_config):
    # lambda_1 = -(theta + zeta) is a pole of the weights
    out, _ = run('scan', '--config', write_config(scan_config(start=[-1.0, -0.02], stop=[-1.0, -0.02], num=1)))
    (row,) = list(csv.DictReader(StringIO(out)))
    assert row['reason'] == '[theta+zeta+lambda_1]'
    assert row['z_re'] == ''
    assert row['z_bar_re'] != ''
    assert float(row['abs_z_bar']) > 0


def test_scan_through_the_weight_pole(write_config):
    # 50 points, none on the pole at lambda_1 = -1.0 - 0.02j, two of them 0.005 away
    out, _ = run('scan', '--config', write_config(scan_config(start=[-1.245, -0.02], stop=[-0.755, -0.02], num=50)))
    rows = list(csv.DictReader(StringIO(out)))
    assert len(rows) == 50
    assert all(row['reason'] == '' for row in rows)
    abs_z = [float(row['abs_z']) for row in rows]
    abs_z_bar = [float(row['abs_z_bar']) for row in rows]
    assert abs_z.index(max(abs_z)) in (24, 25)
    assert max(abs_z) > 10 * max(abs_z[0], abs_z[-1])
    assert max(abs_z_bar) < 10 * min(abs_z_bar)


def test_scan_through_a_special_zero(write_config):
    # (lambda_1, lambda_2) = (mu_2 - gamma, mu_2) is a zero of Z
    document = {
        'model': ELLIPTIC_MODEL,
        'point': [[0.36 - 0.31, -0.08 - 0.07], [0.44, 0.03]],
        'scan': {'parameter': 'lambda', 'index': 2, 'start': [0.31, -0.08], 'stop': [0.41, -0.08], 'num': 3},
    }
    out, _ = run('scan', '--config', write_config(document))
    rows = list(csv.DictReader(StringIO(out)))
    assert float(rows[1]['lambda_2_re']) == pytest.approx(0.36)
    assert all(row['reason'] == '' for row in rows)
    abs_z = [float(row['abs_z']) for row in rows]
    assert abs_z[1] < 1e-9 * min(abs_z[0], abs_z[2])


def test_scan_json_two_axes(write_config):
    document = scan_config(second={'parameter': 'theta', 'start': [0.5, 0.1], 'stop': [0.6, 0.1], 'num': 2})
    out, _ = run('scan', '--config', write_config(document), '--format', 'json')
    report = json.loads(out)
    assert report['command'] == 'scan'
    assert len(report['rows']) == 3 * 2
    assert report['rows'][1]['theta_re'] == 0.6


def test_scan_needs_scan_section(write_config):
    with pytest.raises(CommandError) as e:
        run('scan', '--config', write_config({'model': MODEL}))
    assert e.value.returncode == 2
