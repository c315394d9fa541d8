#!/usr/bin/env python3
"""
Tests for the command line front end
"""
import io
import json

import numpy as np
import pandas as pd
import pytest

from biharmonic_cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_solve_const24(capsys):
    code, out, _ = run(capsys, 'solve', '--N', '10', '--forcing', 'const24')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ['x', 'u', 'u_exact', 'error']
    assert len(frame) == 11
    assert frame['error'].max() <= 1e-4


def test_solve_zero(capsys):
    code, out, _ = run(capsys, 'solve', '--N', '10', '--forcing', 'zero')
    assert code == EXIT_OK
    assert (pd.read_csv(io.StringIO(out))['u'] == 0.0).all()


def test_solve_from_file(capsys, tmp_path):
    path = tmp_path / 'f.txt'
    path.write_text("\n".join(["24"] * 9))
    code, out, _ = run(capsys, 'solve', '--N', '10', '--forcing', 'file', '--input', str(path))
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    np.testing.assert_allclose(frame['u'], frame['x'] ** 2 * (1 - frame['x']) ** 2, atol=1e-4)


def test_solve_malformed_file(capsys, tmp_path):
    path = tmp_path / 'bad.txt'
    path.write_text("1.0\nnot-a-number\n")
    code, _, err = run(capsys, 'solve', '--N', '4', '--forcing', 'file', '--input', str(path))
    assert code == EXIT_USAGE
    assert 'error' in err


def test_solve_missing_file(capsys, tmp_path):
    code, _, _ = run(capsys, 'solve', '--N', '4', '--forcing', 'file', '--input', str(tmp_path / 'none.txt'))
    assert code == EXIT_USAGE


def test_eigs_table(capsys):
    code, out, _ = run(capsys, 'eigs', '--N', '10,20,30,40,50,60', '--k', '1,2,3,4')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame['N']) == ['true eigenvalue', 'N=10', 'N=20', 'N=30', 'N=40', 'N=50', 'N=60']
    assert frame.loc[0, 'lambda_1'] == pytest.approx(500.563902, abs=1e-4)
    assert frame.loc[1, 'lambda_4'] == pytest.approx(39493.816015, abs=1e-3)
    assert frame.loc[6, 'lambda_3'] == pytest.approx(14617.606815, abs=1e-3)


def test_eigs_small_grid(capsys):
    code, out, _ = run(capsys, 'eigs', '--N', '4', '--k', '1')
    assert code == EXIT_OK
    assert pd.read_csv(io.StringIO(out)).loc[1, 'lambda_1'] > 0


def test_eigs_k_too_large(capsys):
    code, _, err = run(capsys, 'eigs', '--N', '4', '--k', '5')
    assert code == EXIT_USAGE
    assert 'exceeds' in err


def test_converge_slope(capsys):
    code, out, _ = run(capsys, 'converge', '--k', '1', '--N', '10..60')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) == 6
    assert -4.3 <= frame['slope'].iloc[0] <= -3.7


def test_converge_second_mode(capsys):
    code, _, _ = run(capsys, 'converge', '--k', '2', '--N', '16,32,64')
    assert code == EXIT_OK


def test_converge_outside_band(capsys):
    code, _, _ = run(capsys, 'converge', '--k', '1', '--N', '10,20,30', '--band', '-3.0', '-2.0')
    assert code == EXIT_FAILED


def test_converge_too_few_points(capsys):
    code, _, _ = run(capsys, 'converge', '--k', '1', '--N', '10')
    assert code == EXIT_USAGE


def test_converge_json(capsys):
    code, out, _ = run(capsys, 'converge', '--k', '1', '--N', '10,20,30', '--format', 'json')
    assert code == EXIT_OK
    document = json.loads(out)
    assert document['band'] == [-4.3, -3.7]
    assert document['slopes'][0]['k'] == 1


def test_verify_all_pass(capsys):
    code, out, _ = run(capsys, 'verify', '--seed', '42', '--N', '4,8,16,32')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert (frame['status'] == 'pass').all()


def test_verify_injected_fault(capsys):
    code, out, err = run(capsys, 'verify', '--N', '4', '--inject-fault', 'kernel-sign')
    assert code == EXIT_FAILED
    frame = pd.read_csv(io.StringIO(out))
    assert frame.set_index('suite').loc['positivity', 'status'] == 'fail'
    failure = json.loads(next(line for line in err.splitlines() if line.startswith('{')))
    assert failure['suite'] == 'positivity'


def test_verify_degenerate_grid(capsys):
    code, _, _ = run(capsys, 'verify', '--N', '2')
    assert code == EXIT_OK


def test_spline_samples(capsys):
    code, out, _ = run(capsys, 'spline', '--N', '8', '--points', '11')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert list(frame.columns) == ['x', 's', 's_d1', 's_d2']
    assert len(frame) == 11


def test_kernel_dump(capsys):
    code, out, _ = run(capsys, 'kernel', '--N', '4')
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(out))
    assert len(frame) == 9
    code, out, _ = run(capsys, 'kernel', '--mode', 'probe', '--resolution', '5')
    assert code == EXIT_OK
    assert len(pd.read_csv(io.StringIO(out))) == 25


def test_output_is_deterministic(capsys, tmp_path):
    first, second = tmp_path / 'a.json', tmp_path / 'b.json'
    assert main(['verify', '--N', '4', '--seed', '3', '--format', 'json', '--output', str(first)]) == EXIT_OK
    assert main(['verify', '--N', '4', '--seed', '3', '--format', 'json', '--output', str(second)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_output_dir_environment(capsys, monkeypatch, tmp_path):
    monkeypatch.setenv('BIHARMONIC_OUTPUT_DIR', str(tmp_path))
    assert main(['solve', '--N', '6', '--output', 'solve.csv']) == EXIT_OK
    assert (tmp_path / 'solve.csv').exists()


def test_usage_errors(capsys):
    assert main([]) == EXIT_USAGE
    assert main(['solve', '--N', '1']) == EXIT_USAGE
    assert main(['solve', '--N', '4,8']) == EXIT_USAGE
