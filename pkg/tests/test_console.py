import json

import pytest

from furst.console import (
    DEBUG_FILE,
    EXIT_CODE_EXPECTED_ERROR,
    EXIT_CODE_SUCCESS,
    EXIT_CODE_UNKNOWN_ERROR,
    EXIT_CODE_USAGE,
    EXIT_CODE_VERIFICATION_FAILED,
    RunConfig,
    dispatch,
)
from furst.exceptions import DomainError


def test_sunits_enum_csv(level, capsys):
    assert dispatch(["sunits", "enum", "--a", "2", "--b", "3", "--M", "10", "--csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "u,v,value"
    assert len(lines) == 8
    assert lines[3] == "0,1,3"


def test_sunits_enum_human(level, capsys):
    dispatch(["sunits", "enum", "--a", "2", "--b", "3", "--M", "10"])
    assert capsys.readouterr().out.split() == ["1", "2", "3", "4", "6", "8", "9"]


def test_harmonics_order(level, capsys):
    assert dispatch(["harmonics", "order", "--a", "2", "--b", "3", "--l", "5"]) == 0
    assert capsys.readouterr().out.strip() == "8"


def test_harmonics_lemma8_json(level, capsys):
    argv = [
        "harmonics", "lemma8", "--a", "2", "--b", "3", "--l", "3",
        "--members", "0,1,2,3,4,5,6,7", "--z", "3/10", "--H", "20", "--json",
    ]
    assert dispatch(argv) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["err"] == "1/20"
    assert data["success"] is True



def test_harmonics_lemma5_csv(level, capsys):
    argv = ["harmonics", "lemma5", "--a", "2", "--b", "3", "--l", "3", "--csv"]
    assert dispatch(argv) == EXIT_CODE_SUCCESS
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m,re,im,abs"
    rows = [line.split(",") for line in lines[1:]]
    assert [int(row[0]) for row in rows] == list(range(1, 8))
    assert float(rows[3][1]) == pytest.approx(-2.0)
    assert float(rows[3][3]) == pytest.approx(2.0)
    assert float(rows[1][3]) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("alpha_argv", [
    ["--A", "1", "--Q", "101"],
    ["--alpha", "1/101"],
])
def test_circle_sigma_alpha(level, alpha_argv, capsys):
    argv = ["circle", "sigma-alpha", "--a", "2", "--b", "3", "--M", "10", "--csv"]
    assert dispatch(argv + alpha_argv) == EXIT_CODE_SUCCESS
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 7
    assert "1/101" in lines


def test_circle_sigma_alpha_needs_alpha(level, capsys):
    argv = ["circle", "sigma-alpha", "--a", "2", "--b", "3", "--M", "10", "--A", "1"]
    assert dispatch(argv) == EXIT_CODE_EXPECTED_ERROR
    assert json.loads(capsys.readouterr().err.splitlines()[0])["error"] == "DomainError"


def test_circle_dispersion_points_file(level, tmp_path, capsys):
    points = tmp_path / "points.txt"
    points.write_text("0\n1/4\n1/2\n")
    argv = ["circle", "dispersion", "--points-file", str(points), "--json"]
    assert dispatch(argv) == EXIT_CODE_SUCCESS
    assert json.loads(capsys.readouterr().out)["dispersion"] == "1/2"


def test_net_build_from_a_q(level, capsys):
    argv = ["net", "build", "--a", "2", "--b", "3", "--A", "1", "--Q", "101", "--M", "10"]
    assert dispatch(argv + ["--json"]) == EXIT_CODE_SUCCESS
    data = json.loads(capsys.readouterr().out)
    assert (data["inv_gap"], data["k"], data["d_gap"]) == ("101", "20", "15")
    assert "net" not in data


@pytest.mark.parametrize("spec", [
    '{"rational": "5/7"}',
    '{"cf": [0, 1, 2, 2]}',
    "5/7",
])
def test_alpha_convergents_spec(level, spec, capsys):
    argv = ["alpha", "convergents", "--spec", spec, "--q-limit", "7"]
    assert dispatch(argv) == EXIT_CODE_SUCCESS
    assert capsys.readouterr().out.split() == ["0/1", "1/1", "2/3", "5/7"]


def test_digits_search_from_file(level, tmp_path, capsys):
    digit_file = tmp_path / "digitset.json"
    digit_file.write_text(json.dumps({"a": 2, "n": 3, "residues": [0, 1, 2, 3, 5, 7]}))
    argv = ["digits", "search", "--in", str(digit_file), "--l", "1", "--eps", "0.05"]
    assert dispatch(argv + ["--json"]) == EXIT_CODE_SUCCESS
    data = json.loads(capsys.readouterr().out)
    assert data["stratum"]["s"] == "3"
    assert data["stratum"]["lam"] == "1"
    assert data["X"] == "2"


@pytest.mark.parametrize("argv", [
    ["digits", "search", "--l", "1", "--a", "2", "--b", "3"],
    ["digits", "search", "--l", "1", "--in", "{digit_file}"],
])
def test_digits_search_errors(level, tmp_path, argv, capsys):
    digit_file = tmp_path / "broken.json"
    digit_file.write_text(json.dumps({"a": 2, "residues": [0]}))
    argv = [arg.format(digit_file=digit_file) for arg in argv]
    assert dispatch(argv) == EXIT_CODE_EXPECTED_ERROR


def test_solve_json(level, capsys):
    argv = ["solve", "--a", "2", "--b", "3", "--alpha", "5/7", "--beta", "0", "--N", "10", "--json"]
    assert dispatch(argv) == EXIT_CODE_SUCCESS
    data = json.loads(capsys.readouterr().out)
    assert data["q"] == "0,1,3"
    assert data["error_lo"] == "1/7"


@pytest.mark.parametrize("argv", [
    ["--help"],
    ["sunits", "enum", "--help"],
])
def test_help(level, argv, capsys):
    assert dispatch(argv) == EXIT_CODE_SUCCESS


@pytest.mark.parametrize("argv", [
    [],
    ["sunits", "enum", "--a", "2", "--b", "3", "--M", "10", "--bogus"],
    ["sunits", "enum", "--a", "two", "--b", "3", "--M", "10"],
    ["verify-all", "medium"],
])
def test_usage_errors(level, argv, capsys):
    assert dispatch(argv) == EXIT_CODE_USAGE


def test_library_errors_on_stderr(level, capsys):
    argv = ["sunits", "enum", "--a", "2", "--b", "4", "--M", "10"]
    assert dispatch(argv) == EXIT_CODE_EXPECTED_ERROR
    captured = capsys.readouterr()
    assert captured.out == ""
    assert json.loads(captured.err.splitlines()[0])["error"] == "ParameterError"


def test_run_writes_report(level, tmp_path, capsys):
    config_file = tmp_path / "run.json"
    config_file.write_text(json.dumps({"a": 2, "b": 3, "A": 1, "Q": 101, "targets": ["0"]}))
    out_file = tmp_path / "report.json"
    argv = ["run", "--config", str(config_file), "--out", str(out_file), "--seed", "9", "--json"]
    assert dispatch(argv) == EXIT_CODE_SUCCESS
    report = json.loads(out_file.read_text())
    assert report["seed"] == "9"
    assert report["M"] == "10"
    assert json.loads(capsys.readouterr().out) == report


def test_verify_failure_exit_code(level, tmp_path, capsys):
    regression = tmp_path / "regression.csv"
    regression.write_text("gaps.normalized_constant.q<=1e10,0.5\n")
    argv = ["verify-all", "fast", "--only", "gaps", "--regression-file", str(regression), "--csv"]
    assert dispatch(argv) == EXIT_CODE_VERIFICATION_FAILED
    assert capsys.readouterr().out.startswith("name,passed,hard,elapsed,detail\ngaps,False")


def test_unknown_error_writes_debug_file(level, tmp_path, mocker, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    mocker.patch("furst.console.enumerate_sigma", side_effect=RuntimeError("boom"))
    argv = ["sunits", "enum", "--a", "2", "--b", "3", "--M", "10"]
    assert dispatch(argv) == EXIT_CODE_UNKNOWN_ERROR
    assert "VERSION" in (tmp_path / DEBUG_FILE).read_text()
    assert "ERROR: boom" in capsys.readouterr().err


@pytest.mark.parametrize("kwargs", [
    dict(format="xml"),
    dict(threads=0),
    dict(bits=10),
    dict(seed=-1),
])
def test_run_config_errors(level, kwargs):
    with pytest.raises(DomainError):
        RunConfig("sunits", **kwargs)
