import json
import subprocess
import sys

import jsonschema
import pytest

from cfinsler.cli import execute
from cfinsler.report import dumps, envelope, jsonable, load_schema, table_csv

SCHEMA = load_schema()


def run(argv, capsys):
    code = execute(argv)
    out = capsys.readouterr().out
    report = json.loads(out) if out.lstrip().startswith("{") else None
    if report is not None:
        jsonschema.validate(report, SCHEMA)
    return code, report, out


def test_classify_disk(capsys):
    code, rep, _ = run(["classify", "--builtin", "disk", "--eps", "-1", "--dim", "2", "--samples", "64",
                        "--seed", "7"], capsys)
    assert code == 0
    assert rep["result"]["kahler"] is True
    assert rep["config"]["seed"] == 7 and rep["config"]["tol"] == 1e-7
    assert rep["tolerances"]["kahler"] == 1e-7
    assert rep["residual_maxima"]["kahler"] < 1e-7
    assert rep["version"] and rep["tool"] == "cfinsler"


def test_project_check_euclidean_disk(capsys):
    code, rep, _ = run(["project-check", "--builtin", "euclidean", "--dim", "2", "--with", "disk:eps=-1",
                        "--samples", "16"], capsys)
    assert code == 0 and rep["verdict"] is True


def test_false_verdict_and_expect_false(capsys):
    argv = ["project-check", "--builtin", "euclidean", "--dim", "2", "--with", "randers-z2", "--samples", "8"]
    code, rep, _ = run(argv, capsys)
    assert code == 2 and rep["verdict"] is False and rep["exit_status"] == 2
    code, rep, _ = run(argv + ["--expect-false"], capsys)
    assert code == 0 and rep["verdict"] is False
    code, _, _ = run(["hilbert", "--builtin", "disk", "--dim", "2", "--samples", "8", "--expect-false"], capsys)
    assert code == 2


def test_empty_metric_file(tmp_path, capsys):
    f = tmp_path / "empty.mf"
    f.write_text("")
    code, rep, _ = run(["classify", "--metric-file", str(f)], capsys)
    assert code == 1
    assert rep["error"]["kind"] == "syntax" and rep["error"]["line"] == 1
    assert rep["exit_status"] == 1


@pytest.mark.parametrize("argv,kind", [
    (["classify"], "usage"),
    (["classify", "--builtin", "disk", "--eps", "0.5"], "precondition"),
    (["classify", "--builtin", "nosuch"], "precondition"),
    (["classify", "--builtin", "disk", "--samples", "x"], "usage"),
    (["frobnicate"], "usage"),
    ([], "usage"),
    (["classify", "--metric-file", "/nonexistent/m.yaml"], "io"),
    (["project-check", "--builtin", "disk", "--dim", "2", "--with", "euclidean:dim=3"], "domain"),
    (["geodesic", "--builtin", "disk", "--dim", "2", "--z0", "2,0", "--v0", "1,0"], "domain"),
    (["geodesic", "--builtin", "disk", "--dim", "2", "--z0", "0.1,0"], "usage"),
    (["randers", "--builtin", "disk", "--dim", "2", "--samples", "4"], "precondition"),
])
def test_errors_exit_one(argv, kind, capsys):
    code, rep, _ = run(argv, capsys)
    assert code == 1
    assert rep["error"]["kind"] == kind


def test_syntax_error_location_in_report(tmp_path, capsys):
    f = tmp_path / "bad.yaml"
    f.write_text("name: bad\ndim: 2\nbody: eta[1]*etabar[1] + * eta[2]\n")
    code, rep, _ = run(["classify", "--metric-file", str(f)], capsys)
    assert code == 1
    assert (rep["error"]["line"], rep["error"]["column"]) == (3, 26)


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("FINSLER_SEED", "11")
    _, rep, _ = run(["classify", "--builtin", "euclidean", "--samples", "4"], capsys)
    assert rep["config"]["seed"] == 11 and rep["config"]["env_seed_used"]
    _, rep, _ = run(["classify", "--builtin", "euclidean", "--samples", "4", "--seed", "3"], capsys)
    assert rep["config"]["seed"] == 3
    monkeypatch.setenv("FINSLER_SEED", "abc")
    code, rep, _ = run(["classify", "--builtin", "euclidean", "--samples", "4"], capsys)
    assert code == 1 and rep["error"]["kind"] == "usage"
    monkeypatch.delenv("FINSLER_SEED")
    _, rep, _ = run(["classify", "--builtin", "euclidean", "--samples", "4"], capsys)
    assert rep["config"]["seed"] == 7


def test_outputs_are_byte_identical(tmp_path):
    argv = ["project-check", "--builtin", "euclidean", "--dim", "2", "--with", "disk:eps=-1", "--samples", "8"]
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert execute(argv + ["--out", str(a)]) == 0
    assert execute(argv + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_metric_file_as_second_metric(tmp_path, capsys):
    f = tmp_path / "disk.yaml"
    f.write_text("name: d\ndim: 2\ndomain: ball(1)\nbody: sum(k, eta[k]*etabar[k]) / (1 - sum(k, z[k]*zbar[k]))"
                 " + abs2(sum(k, zbar[k]*eta[k])) / (1 - sum(k, z[k]*zbar[k]))^2\n")
    code, rep, _ = run(["project-check", "--builtin", "euclidean", "--dim", "2", "--with", str(f),
                        "--samples", "8"], capsys)
    assert code == 0
    assert rep["metrics"][1]["name"] == "d"


def test_modes_and_commands(capsys):
    code, rep, _ = run(["project-check", "--builtin", "euclidean", "--dim", "2", "--with", "disk:eps=-1",
                        "--mode", "weakly-kahler", "--samples", "8"], capsys)
    assert code == 0 and rep["result"]["check"] == "weakly-kahler"
    code, rep, _ = run(["hilbert", "--builtin", "hartogs-alpha", "--samples", "8"], capsys)
    assert code == 2 and rep["residual_maxima"]["hilbert_spray"] > 1e-6
    code, rep, _ = run(["randers", "--builtin", "hartogs-randers", "--samples", "8"], capsys)
    assert code == 0 and rep["result"]["flags"]["alpha_Ft_projective"]


def test_geodesic_csv_and_figures(tmp_path, capsys):
    out = tmp_path / "traj.csv"
    figs = tmp_path / "figs"
    code = execute(["geodesic", "--builtin", "disk", "--dim", "2", "--z0", "0.1,0.2j", "--v0", "0.3,0.1",
                    "--steps", "50", "--format", "csv", "--out", str(out), "--figures", str(figs)])
    assert code == 0
    assert out.read_text().startswith("s,z1_re,z1_im")
    rep = json.loads((tmp_path / "traj.csv.json").read_text())
    jsonschema.validate(rep, SCHEMA)
    assert rep["figures"] == ["geodesic.png"]
    assert (figs / "geodesic.png").stat().st_size > 1000
    assert rep["residual_maxima"]["chord_deviation"] < 1e-12
    # complex initial data: still in a complex line, but not the real-rescaled Euclidean segment
    assert not rep["result"]["real_factor_data"]
    assert rep["result"]["matched_pointset_distance"] > 1e-5


def test_geodesic_real_factor_data(capsys):
    code, rep, _ = run(["geodesic", "--builtin", "disk", "--dim", "2", "--z0", "0.1,0.2", "--v0", "0.3,0.1",
                        "--steps", "100"], capsys)
    assert code == 0 and rep["result"]["real_factor_data"]
    assert rep["result"]["matched_pointset_distance"] < 1e-12


def test_classify_csv_table_and_figures(tmp_path, capsys):
    code = execute(["classify", "--builtin", "hartogs-alpha", "--samples", "6", "--format", "csv",
                    "--figures", str(tmp_path)])
    table = capsys.readouterr().out.splitlines()
    assert code == 0 and len(table) == 7
    assert table[0].split(",")[:3] == ["connection_gap", "gen_berwald", "index"]
    assert sorted(p.name for p in tmp_path.iterdir()) == ["classify_maxima.png", "classify_samples.png"]


def test_selftest(capsys):
    code, rep, _ = run(["selftest", "--samples", "4"], capsys)
    assert code == 0 and all(rep["result"]["checks"].values())


def test_report_helpers():
    assert jsonable({"c": 1 + 2j, "n": float("nan"), "a": (1, 2)}) == {"c": [1.0, 2.0], "n": None, "a": [1, 2]}
    rep = envelope("classify", {"seed": 1, "tol": 1e-7})
    jsonschema.validate(rep, SCHEMA)
    assert dumps(rep) == dumps(json.loads(dumps(rep)))
    assert table_csv([]) == ""
    assert table_csv([{"b": 1.5, "a": [1, 2]}]) == 'a,b\n"[1, 2]",1.5\n'


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "cfinsler.cli", "classify", "--builtin", "euclidean",
                           "--samples", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "classify"
