from __future__ import annotations

import json

import pytest

from searchgame.cli import dispatch


@pytest.fixture
def files(tmp_path):
    ex1 = tmp_path / "ex1.json"
    ex1.write_text(json.dumps({"boxes": [{"q": 0.4, "t": 1.0}, {"q": 0.64, "t": 0.6}], "cyclic_exponents": [2, 1]}))
    sym = tmp_path / "symmetric2.json"
    sym.write_text(json.dumps({"boxes": [{"q": 0.5, "t": 1.0}, {"q": 0.5, "t": 1.0}]}))
    return tmp_path, ex1, sym


def run(capsys, *argv):
    code = dispatch(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve(capsys, files):
    _, ex1, _ = files
    code, out, _ = run(capsys, "solve", "--instance", str(ex1), "--eps", "1e-6")
    assert code == 0
    d = json.loads(out)
    assert d["L"] == pytest.approx(3.0625, rel=1e-6) and d["U"] == pytest.approx(3.0625, rel=1e-6)
    assert d["termination"] == "gap" and d["verification"]["equalizing_ok"]


def test_test_p0(capsys, files):
    _, _, sym = files
    code, out, _ = run(capsys, "test-p0", "--instance", str(sym))
    d = json.loads(out)
    assert code == 0 and d["verdict"] == "optimal" and d["value"] == 3.5


def test_ruckle(capsys):
    code, out, _ = run(capsys, "ruckle", "--q", "0.5")
    d = json.loads(out)
    assert code == 0 and d["h"] == 2 and d["p_star"] == 0.8


def test_value_and_simulate(capsys, files):
    _, ex1, _ = files
    code, out, _ = run(capsys, "value", "--instance", str(ex1), "--hider", "0.75,0.25")
    d = json.loads(out)
    assert code == 0 and d["sequence"]["cycle"] == [1, 2, 1] and d["expected_time"] == 3.0625
    code, out, _ = run(capsys, "simulate", "--instance", str(ex1), "--trials", "20000", "--seed", "4")
    d = json.loads(out)
    assert code == 0 and all(abs(b["z"]) < 4 for b in d["boxes"])


def test_study_and_scatter_output_files(capsys, files):
    tmp, _, _ = files
    a, b = tmp / "a.csv", tmp / "b.csv"
    for path in (a, b):
        assert dispatch(["study", "--count", "6", "--seed", "9", "--format", "csv", "--out", str(path)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "id,cyclic,n,v_p0,L,U,p0_optimal,subopt_pct,iters,D_size"
    code, out, _ = run(capsys, "scatter", "--count", "4", "--seed", "1")
    assert code == 0 and json.loads(out)["summary"]["count"] == 4


def test_twelve_significant_digits(capsys, files):
    _, ex1, _ = files
    _, out, _ = run(capsys, "solve", "--instance", str(ex1))
    hider = json.loads(out)["hider"]
    assert all(len(repr(x).replace(".", "").lstrip("0")) <= 12 for x in hider)


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--instance", "/nonexistent.json"],
        ["ruckle", "--q", "1.5"],
        ["frobnicate"],
        ["solve"],
        ["solve", "--instance", "x.json", "--beta", "2"],
    ],
)
def test_input_errors(capsys, argv, files):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and err


def test_bad_hider(capsys, files):
    _, ex1, _ = files
    code, _, err = run(capsys, "value", "--instance", str(ex1), "--hider", "0.5,0.2")
    assert code == 1 and "sum" in err


def test_invalid_instance(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"boxes": [{"q": 0.4, "t": 1.0}, {"q": 0.6, "t": 1.0}], "cyclic_exponents": [2, 1]}')
    code, _, err = run(capsys, "solve", "--instance", str(bad))
    assert code == 1 and "disagree" in err
