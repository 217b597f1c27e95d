import csv
import io
import json
import os
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from rhkit import __version__
from rhkit.cli import main, parse_grid
from rhkit.errors import ParameterError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def run_process(*argv, env=None):
    return subprocess.run([sys.executable, "-m", "rhkit.cli", *argv], capture_output=True,
                          text=True, env=env)


def test_tw_table(capsys):
    code, out, err = run(capsys, "tw-table", "--s", "-2:0.5:2")
    assert code == 0
    table = rows(out)
    assert len(table) == 9
    assert [float(r["s"]) for r in table] == [-2 + 0.5 * k for k in range(9)]
    assert all(float(r["abs_diff"]) <= 1e-5 for r in table)
    assert all(int(r["det_nodes"]) > 0 for r in table)
    meta = json.loads(err.strip().splitlines()[-1])
    assert meta["version"] == __version__ and meta["command"] == "tw-table"


def test_pii_solve_zero(capsys):
    code, out, _ = run(capsys, "pii-solve", "--gamma", "0")
    assert code == 0
    table = rows(out)
    assert len(table) > 100
    assert all(float(r["u"]) == 0 and float(r["u_prime"]) == 0 for r in table)


def test_efp_columns(capsys):
    code, out, _ = run(capsys, "efp", "--h", "1", "--n-max", "10")
    assert code == 0
    table = rows(out)
    p = [float(r["P_n"]) for r in table]
    assert len(p) == 10 and all(b < a for a, b in zip(p, p[1:]))
    assert all(float(r["ratio_gap"]) <= 1e-7 for r in table)


def test_milne_and_op(capsys):
    code, out, _ = run(capsys, "milne", "--x", "1,2")
    assert code == 0 and all(float(r["residual"]) <= 1e-6 for r in rows(out))
    code, out, _ = run(capsys, "op-rhp", "--n", "3")
    table = rows(out)
    assert code == 0 and len(table) == 3
    assert all(float(r["jump_residual"]) <= 1e-8 for r in table)


def test_nls_demo(capsys):
    code, out, _ = run(capsys, "nls-demo")
    (r,) = rows(out)
    assert code == 0
    assert float(r["pde_residual_rel"]) <= 1e-4 and float(r["certificate"]) < 1


def test_json_output(capsys):
    code, out, err = run(capsys, "milne", "--x", "0.5,1", "--format", "json")
    assert code == 0 and err == ""
    doc = json.loads(out)
    assert doc["columns"]["x"] == [0.5, 1.0]
    assert doc["meta"]["version"] == __version__ and doc["meta"]["c"] == 1.0


def test_out_file_matches_stdout(capsys, tmp_path):
    _, out, _ = run(capsys, "efp", "--h", "0.5", "--n-max", "4")
    path = tmp_path / "efp.csv"
    assert run(capsys, "efp", "--h", "0.5", "--n-max", "4", "--out", str(path))[0] == 0
    assert path.read_text() == out


def test_byte_identical_reruns(capsys):
    argv = ("tw-table", "--s", "-1,0,1", "--format", "json")
    first = run(capsys, *argv)[1]
    assert run(capsys, *argv)[1] == first


@pytest.mark.parametrize("argv", [
    ("efp", "--h", "3"),
    ("tw-table", "--s", "a:b"),
    ("tw-table", "--nodes", "0"),
    ("pii-solve", "--gamma", "1", "--tol", "-1"),
    ("kpz-cdf", "--T", "1e-5"),
])
def test_parameter_errors_exit_1(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and "parameter error" in err


def test_argparse_errors_exit_1(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code == 1


def test_numeric_error_exit_2(capsys):
    code, out, err = run(capsys, "nls-demo", "--amplitude", "0.95")
    assert code == 2 and out == "" and "numeric error" in err


def test_thread_cap_env():
    env = dict(os.environ, RHKIT_THREADS="1")
    ok = run_process("milne", "--x", "1", env=env)
    assert ok.returncode == 0 and ok.stdout.startswith("x,phi,residual")
    bad = run_process("milne", env=dict(os.environ, RHKIT_THREADS="zero"))
    assert bad.returncode == 1 and "RHKIT_THREADS" in bad.stderr


def test_process_byte_determinism():
    a = run_process("efp", "--h", "1", "--n-max", "5")
    b = run_process("efp", "--h", "1", "--n-max", "5")
    assert a.returncode == 0 and a.stdout == b.stdout


@pytest.mark.parametrize("text,expect", [
    ("-2:0.5:2", [-2, -1.5, -1, -0.5, 0, 0.5, 1, 1.5, 2]),
    ("0:0.3:1", [0, 0.3, 0.6, 0.8999999999999999]),
    ("1,2.5", [1, 2.5]),
    ("7", [7]),
    ("3:-1:1", [3, 2, 1]),
])
def test_parse_grid(text, expect):
    assert parse_grid(text) == pytest.approx(expect, abs=1e-15)


@pytest.mark.parametrize("text", ["1:2", "0:0:1", "0:-1:1", "x", "1,nan", "0:1e-6:1"])
def test_parse_grid_rejects(text):
    with pytest.raises(ParameterError):
        parse_grid(text)


@given(st.integers(-50, 50), st.integers(1, 8), st.integers(0, 40))
def test_parse_grid_endpoints(a, denom, m):
    step = 1 / denom
    b = a + m * step
    g = parse_grid(f"{a}:{step!r}:{b!r}")
    assert len(g) == m + 1
    assert g[0] == a and abs(g[-1] - b) <= 1e-9
