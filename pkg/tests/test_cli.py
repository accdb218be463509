import csv
import io
import json
import subprocess
import sys

import pytest

from nusat.cli import main
from nusat.formula import from_dimacs


def run(args, capsys, stdin=None, monkeypatch=None):
    if stdin is not None:
        monkeypatch.setattr(sys, "stdin", io.StringIO(stdin))
    code = main(args)
    out, err = capsys.readouterr()
    return code, out, err


def test_threshold_uniform(capsys):
    code, out, _ = run(["threshold", "--dist", "uniform", "--n", "1000"], capsys)
    assert code == 0
    js = json.loads(out)
    assert js["schema_version"] == 1
    assert js["m_star"] == 1000 and js["sharp"] is True and js["regime"] == "Case3"


@pytest.fixture
def core4_file(tmp_path):
    path = tmp_path / "core4.cnf"
    path.write_text("p cnf 2 4\n1 2 0\n-1 2 0\n1 -2 0\n-1 -2 0\n")
    return path


def test_solve_exit_codes(capsys, core4_file, tmp_path):
    code, out, _ = run(["solve", str(core4_file)], capsys)
    assert code == 20
    assert json.loads(out)["witness_var"] in (1, 2)
    sat = tmp_path / "sat.cnf"
    sat.write_text("p cnf 2 1\n1 2 0\n")
    code, out, _ = run(["solve", str(sat)], capsys)
    assert code == 10 and json.loads(out)["status"] == "SAT"


def test_gen_then_solve_pipeline():
    gen = [sys.executable, "-m", "nusat", "gen", "--dist", "powerlaw:2.5", "--n", "100", "--m", "50", "--seed", "7"]
    codes, outs = [], []
    for _ in range(2):
        g = subprocess.run(gen, capture_output=True, text=True, check=True)
        s = subprocess.run([sys.executable, "-m", "nusat", "solve", "-"], input=g.stdout, capture_output=True, text=True)
        codes.append(s.returncode)
        outs.append(g.stdout)
    assert codes[0] == codes[1] and codes[0] in (10, 20)
    assert outs[0] == outs[1]
    f = from_dimacs(outs[0], 2)
    assert f.n == 100 and f.m == 50


def test_gen_to_file(capsys, tmp_path):
    path = tmp_path / "f.cnf"
    code, out, _ = run(["gen", "--dist", "uniform", "--n", "10", "--m", "5", "--seed", "1", "--out", str(path)], capsys)
    assert code == 0 and out == ""
    assert from_dimacs(path.read_text()).m == 5


def test_gen_uses_user_labels(capsys, tmp_path):
    w = tmp_path / "w.txt"
    w.write_text("1\n1\n1000\n")
    code, out, _ = run(["gen", "--dist", f"file:{w}", "--m", "20", "--seed", "3"], capsys)
    assert code == 0
    f = from_dimacs(out)
    # the heavy variable is the user's variable 3
    assert all(3 in {abs(l) for l in c} for c in f)


def test_witness_modes(capsys, core4_file, tmp_path):
    code, out, _ = run(["witness", str(core4_file), "--find", "core"], capsys)
    assert json.loads(out)["result"]["variables"] == [1, 2]
    code, out, _ = run(["witness", str(core4_file), "--find", "bicycle"], capsys)
    assert json.loads(out)["result"]["type"] == "bicycle"
    snake = tmp_path / "snake.cnf"
    snake.write_text("p cnf 3 4\n2 1 0\n-1 2 0\n-2 3 0\n-3 -2 0\n")
    code, out, _ = run(["witness", str(snake), "--find", "snake:2"], capsys)
    res = json.loads(out)["result"]
    assert res["central"] == 2 and res["multiplicity"] == 1
    code, out, _ = run(["witness", str(snake), "--find", "core"], capsys)
    assert json.loads(out)["result"] is None
    code, _, err = run(["witness", str(snake), "--find", "wheel"], capsys)
    assert code == 2 and "wheel" in err


def test_bounds(capsys):
    code, out, _ = run(["bounds", "--dist", "uniform", "--n", "50", "--m", "55", "--t", "2"], capsys)
    js = json.loads(out)
    assert code == 0
    assert js["bounds"]["expected_snakes"]["value"] == pytest.approx(0.00995, rel=1e-3)
    assert js["bounds"]["bicycle"]["divergent"] is True


def test_sweep_csv(capsys):
    code, out, err = run(
        ["sweep", "--dist", "uniform", "--n", "200", "--rel-grid", "0.5,1.5", "--trials", "30", "--seed", "4"], capsys
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["m"]) for r in rows] == [100, 300]
    assert all(int(r["trials"]) == 30 for r in rows)


def test_crossing_and_sharpness_json(capsys):
    code, out, _ = run(["crossing", "--dist", "uniform", "--n", "500", "--budget", "1500"], capsys)
    js = json.loads(out)
    assert code == 0 and js["schema_version"] == 1 and js["ci"][0] <= js["m_hat"] <= js["ci"][1]
    code, out, _ = run(
        ["sharpness", "--dist", "uniform", "--n-grid", "300,600", "--delta", "0.5", "--budget", "1200"], capsys
    )
    js = json.loads(out)
    assert [p["width"] for p in js["points"]] == [0.0, 0.0]


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"dist": "uniform", "n": 300, "m_grid": [100, 200], "trials": 10}))
    code, out, _ = run(["--config", str(cfg), "sweep", "--trials", "7"], capsys)
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["trials"] for r in rows] == ["7", "7"]
    assert [r["n"] for r in rows] == ["300", "300"]


@pytest.mark.parametrize(
    "args, token",
    [
        (["threshold", "--dist", "uniform", "--bogus"], "--bogus"),
        (["threshold", "--dist", "uniform"], "--n"),
        (["threshold", "--n", "5"], "--dist"),
        (["threshold", "--dist", "zipf:2", "--n", "5"], "zipf"),
        (["sweep", "--dist", "uniform", "--n", "5", "--m-grid", "1", "--rel-grid", "1", "--trials", "1"], "--rel-grid"),
        (["crossing", "--dist", "uniform", "--n", "100", "--budget", "10"], "--budget"),
        ([], "subcommand"),
    ],
)
def test_usage_errors(capsys, args, token):
    code, out, err = run(args, capsys)
    assert code == 2
    assert out == ""
    assert token in err


def test_runtime_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2 1\n1 5 0\n")
    code, out, err = run(["solve", str(bad)], capsys)
    assert code == 3 and out == "" and "range" in err
    code, _, _ = run(["solve", str(tmp_path / "missing.cnf")], capsys)
    assert code == 3


def test_help_lists_subcommands(capsys):
    code, out, _ = run(["--help"], capsys)
    assert code == 0
    for cmd in ("gen", "solve", "witness", "threshold", "bounds", "sweep", "crossing", "sharpness"):
        assert cmd in out
