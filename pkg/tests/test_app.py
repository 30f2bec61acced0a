"""Tests for the script app and its command line."""
import json

import pytest

from app import build_parser, create_app, main
from errors import CommandError
from routes.router import CommandRouter

SCRIPT = """
set S in G^1 = { (x) | 0 < x /\\ x < 1 };
set Two in G^1 = { (x) | (0 <= x /\\ x <= 1) \\/ (2 <= x /\\ x <= 3) };
family F in G^2 by w = { (x, w) | 0 <= x /\\ x <= w };
betti_c S;
components Two;
check S;
betti S;
scan F by w;
"""


@pytest.fixture
def app():
    return create_app('testing', timing=False)


def test_run_reports_in_script_order(app):
    envelope = app.run_text(SCRIPT)
    assert envelope.version == 1
    assert [r.command for r in envelope.reports] == ['betti_c', 'components', 'check', 'betti', 'scan']
    betti_c, components, check, betti, scan = envelope.reports
    assert betti_c.ok and betti_c.result['betti_c']['ranks'] == [0, 1]
    assert components.result['count'] == 2
    assert check.result['open'] and not check.result['closed'] and check.result['locally_closed']
    assert not betti.ok and betti.diagnostics
    assert [p['pi0'] for p in scan.result['pieces']] == [0, 1, 1, 1]
    assert all(r.ms == 0 for r in envelope.reports)


def test_json_is_deterministic(app):
    first = app.run_text(SCRIPT, seed=5).model_dump_json()
    second = create_app('testing', timing=False).run_text(SCRIPT, seed=5).model_dump_json()
    assert first == second
    data = json.loads(first)
    assert list(data) == ['version', 'reports']
    assert list(data['reports'][0]) == ['command', 'input', 'ok', 'result', 'diagnostics', 'ms']
    assert list(data['reports'][0]['result']['betti_c']) == ['coeff', 'ranks', 'torsion', 'euler']


def test_parallel_run_keeps_order(app):
    sequential = app.run_text(SCRIPT)
    threaded = app.run_text(SCRIPT, parallel=True)
    assert sequential.model_dump_json() == threaded.model_dump_json()


def test_strict_run_raises(app):
    with pytest.raises(CommandError):
        app.run_text(SCRIPT, strict=True)


def test_coefficients_flow_through(app):
    envelope = app.run_text("set S in G^1 = { (x) | 0 <= x /\\ x <= 1 };\nbetti S;", coeff='Z2')
    assert envelope.reports[0].result['betti']['coeff'] == 'Z2'


def test_router_rejects_duplicate_verbs():
    router = CommandRouter()

    @router.command('betti')
    def first(cmd, env, ctx):
        return {}

    with pytest.raises(ValueError):
        router.command('betti')(first)


def test_cli_exit_codes(tmp_path, capsys):
    good = tmp_path / 'good.txt'
    good.write_text("set S in G^1 = { (x) | 0 <= x /\\ x <= 1 };\nbetti S;\n")
    assert main([str(good), '--no-timing', '--env', 'testing']) == 0
    out = json.loads(capsys.readouterr().out)
    assert out['reports'][0]['result']['betti']['ranks'] == [1]

    failing = tmp_path / 'failing.txt'
    failing.write_text("set S in G^1 = { (x) | 0 < x };\nbetti S;\n")
    assert main([str(failing), '--env', 'testing']) == 1
    assert main([str(failing), '--strict', '--env', 'testing']) == 1

    broken = tmp_path / 'broken.txt'
    broken.write_text("set S in G^1 = { (x) | x <= };\n")
    assert main([str(broken), '--env', 'testing']) == 2
    assert '1:' in capsys.readouterr().err


def test_cli_flags():
    args = build_parser().parse_args(['--coeff', 'Z', '--seed', '9', '--validate', '--no-timing'])
    assert args.coeff == 'Z' and args.seed == 9 and args.validate and not args.timing
    assert args.strict is None and args.parallel is None


def test_cli_rejects_zero_denominator(tmp_path, capsys):
    script = tmp_path / 'zero.txt'
    script.write_text("set S in G^1 = { (x) | x <= 1/0 };\nbetti S;\n")
    assert main([str(script), '--env', 'testing']) == 2
    err = capsys.readouterr().err
    assert '1:29:' in err and 'zero denominator' in err


def test_cli_rejects_undecodable_script(tmp_path, capsys):
    script = tmp_path / 'binary.txt'
    script.write_bytes(b"\xff\xfe betti S;\n")
    assert main([str(script), '--env', 'testing']) == 2
    assert 'error: 1:1: invalid UTF-8 byte 0xff' in capsys.readouterr().err

    script.write_bytes(b"betti S;\nbetti \xc3(;\n")
    assert main([str(script), '--env', 'testing']) == 2
    assert 'error: 2:7:' in capsys.readouterr().err


def test_cli_text_output(tmp_path, capsys):
    script = tmp_path / 'good.txt'
    script.write_text("set S in G^1 = { (x) | 0 <= x /\\ x <= 1 };\nbetti S;\nbetti_c S;\n")
    assert main([str(script), '--no-json', '--no-timing', '--env', 'testing']) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 2
    assert lines[0].startswith('betti S: ') and '"ranks": [1]' in lines[0]
    assert lines[1].startswith('betti_c S: ')

    failing = tmp_path / 'failing.txt'
    failing.write_text("set S in G^1 = { (x) | 0 < x };\nbetti S;\n")
    assert main([str(failing), '--no-json', '--env', 'testing']) == 1
    assert capsys.readouterr().out.startswith('betti S: error: ')


def test_cli_json_flag():
    assert build_parser().parse_args([]).json
    assert build_parser().parse_args(['--json']).json
    assert not build_parser().parse_args(['--no-json']).json


def test_validated_table_checks_cores(app):
    text = "table [x: (0, inf), y: (0, inf), z: {0}] 1 3;"
    plain = app.run_text(text, validate=False).reports[0]
    assert plain.ok and 'core_acyclic' not in plain.result
    checked = app.run_text(text, validate=True).reports[0]
    assert checked.ok and checked.result['core_acyclic'] is True
