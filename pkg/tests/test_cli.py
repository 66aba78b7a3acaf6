import json

import pytest

from weyl3 import __version__
from weyl3.cli import main


def run(tmp_path, *argv, name="out.json"):
    path = tmp_path / name
    code = main([*argv, "--json", str(path)])
    return code, json.loads(path.read_text())


def test_check_passes(tmp_path, capsys):
    code, rep = run(tmp_path, "check", "--family", "C", "--H", "1 + x^2 + y*z", "--points", "20")
    assert code == 0 and rep["verdict"] == "pass"
    assert rep["classification"]["classified"] == "C"
    assert "verdict: pass" in capsys.readouterr().out
    for c in rep["checks"]:
        assert set(c) >= {"name", "residual", "tol", "pass", "worst_point"}
    assert rep["meta"]["version"] == __version__ and rep["meta"]["command"] == "check"


def test_check_q_undetermined(tmp_path):
    code, rep = run(tmp_path, "check", "--family", "Bq", "--q", "0.7", "--K", "1+z^2", "--points", "20")
    assert code == 0
    assert rep["classification"]["classified"] == "Bq" and rep["classification"]["q"] is None


def test_classify_identity_and_type_a(tmp_path):
    code, rep = run(tmp_path, "classify", "--coframe", "1,0,0;0,1,0;0,0,1", "--nu", "0,0,0", "--points", "5")
    assert code == 0 and rep["classification"]["classified"] == "Trivial"
    code, rep = run(tmp_path, "classify", "--family", "A-EW", "--F", "x*z", "--G", "x*y^2", "--f", "x^2",
                    "--points", "10")
    assert code == 0
    assert rep["classification"]["classified"] == "Bq"
    assert rep["classification"]["q"] == pytest.approx(-0.5, abs=1e-8)


def test_dkp_command(tmp_path):
    code, rep = run(tmp_path, "dkp", "--K", "x*y + (x^2-2)/2 * z^2", "--points", "20")
    assert code == 0 and rep["dkp"]["verdict"] == "both-zero"
    code, rep = run(tmp_path, "dkp", "--K", "y^2", "--points", "20")
    assert code == 0 and rep["dkp"]["verdict"] == "both-nonzero"
    assert rep["dkp"]["max_ew"] == pytest.approx(0.5 * rep["dkp"]["max_residual"], rel=1e-9)


@pytest.mark.parametrize("argv", [
    ["check", "--family", "Bq", "--q", "0", "--K", "x"],
    ["check", "--family", "C", "--H", "x +"],
    ["check", "--family", "C"],
    ["suite", "--only", "nonsense"],
    ["classify"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err


def test_parse_error_shows_offset(capsys):
    assert main(["check", "--family", "C", "--H", "1 + * x"]) == 2
    assert "4" in capsys.readouterr().err


def test_suite_tolerance_override_fails(tmp_path):
    code, rep = run(tmp_path, "suite", "--only", "gauge", "--tol", "1e-15")
    assert code == 1 and rep["verdict"] == "fail"
    code, rep = run(tmp_path, "suite", "--only", "gauge")
    assert code == 0 and rep["verdict"] == "pass"


def test_suite_is_deterministic(tmp_path):
    reports = []
    for n in range(2):
        code, rep = run(tmp_path, "suite", "--only", "flat,forms,skew", "--seed", "3", name="same.json")
        rep["meta"].pop("wall_time")
        rep["meta"].pop("argv")
        reports.append(json.dumps(rep, sort_keys=True))
    assert reports[0] == reports[1]
    code, other = run(tmp_path, "suite", "--only", "flat,forms,skew", "--seed", "4")
    other["meta"].pop("wall_time")
    other["meta"].pop("argv")
    assert json.dumps(other, sort_keys=True) != reports[0]
