"""End-to-end runs of the command line front end (in-process)."""

import csv
import json

import numpy as np
import pytest

from fraclap import cli
from fraclap.geometry import CircleGrid, LineGrid, field_from_function, save_csv


def _run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def _report(out):
    rep = json.loads(out)
    assert set(rep) == {"meta", "results"}
    return rep


def test_pohozaev_circle_identity(capsys):
    code, out, _ = _run(capsys, ["pohozaev", "--geometry", "circle",
                                 "--preset", "identity-map"])
    assert code == 0
    rep = _report(out)
    assert rep["meta"]["command"] == "pohozaev"
    assert rep["meta"]["schema_version"] == 1
    assert len(rep["meta"]["config_hash"]) == 16
    int(rep["meta"]["config_hash"], 16)  # hex
    checks = rep["results"]["checks"]
    assert checks and all(c["passed"] == c["expect_pass"] for c in checks)
    assert rep["results"]["moment_gap"] <= 1e-10


def test_pohozaev_mobius_preset(capsys):
    code, out, _ = _run(capsys, ["pohozaev", "--geometry", "circle",
                                 "--preset", "mobius", "--a", "0.3"])
    assert code == 0
    assert _report(out)["results"]["a"] == 0.3


def test_results_are_idempotent(tmp_path, capsys):
    argv = ["counterexample", "sweep", "--n", "100,1000", "--R", "4,16"]
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        code = cli.main(argv + ["--out", str(path)])
        capsys.readouterr()
        assert code == 0
        outs.append(json.loads(path.read_text()))
    dumps = [json.dumps(r["results"], sort_keys=True) for r in outs]
    assert dumps[0] == dumps[1]
    # infeasible cross pairs are skipped, not errors
    skipped = outs[0]["results"]["skipped"]
    assert {(s["n"], s["R"]) for s in skipped} == {(100, 16.0)}
    assert len(outs[0]["results"]["entries"]) == 3


def test_counterexample_csv_table(tmp_path, capsys):
    csv_path = tmp_path / "sweep.csv"
    code, out, _ = _run(capsys, ["counterexample", "sweep", "--n", "100,1000",
                                 "--R", "4", "--csv", str(csv_path)])
    assert code == 0
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][:4] == ["n", "R", "c_n_numeric", "c_n_paper"]
    assert len(rows) == 3  # header + the two feasible pairs


def test_counterexample_all_degenerate_is_config_error(tmp_path, capsys):
    out_path = tmp_path / "r.json"
    code, out, err = _run(capsys, ["counterexample", "sweep", "--n", "4",
                                   "--R", "4", "--out", str(out_path)])
    assert code == 2
    assert json.loads(err)["error"] == "config"
    assert out == ""
    assert not out_path.exists()  # nothing written on config errors


def test_config_file_and_overrides(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("[common]\nseed = 3\n\n[counterexample]\nn = 100,1000\nR = 4\n")
    code, out, _ = _run(capsys, ["counterexample", "sweep",
                                 "--config", str(cfg)])
    assert code == 0
    rep = _report(out)
    assert rep["meta"]["seed"] == 3
    assert [e["n"] for e in rep["results"]["entries"]] == [100, 1000]
    # flags beat the file
    code, out, _ = _run(capsys, ["counterexample", "sweep", "--config", str(cfg),
                                 "--seed", "5", "--n", "200"])
    assert code == 0
    rep = _report(out)
    assert rep["meta"]["seed"] == 5
    assert [e["n"] for e in rep["results"]["entries"]] == [200]


def test_config_rejects_unknown_section(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[commonn]\nseed = 3\n")
    code, out, err = _run(capsys, ["counterexample", "sweep", "--config", str(cfg)])
    assert code == 2
    msg = json.loads(err)
    assert msg["error"] == "config" and "commonn" in msg["message"]


def test_config_rejects_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[flow]\nn_modess = 64\n")
    code, _, err = _run(capsys, ["flow", "--config", str(cfg)])
    assert code == 2
    assert "n_modess" in json.loads(err)["message"]


def test_bad_values_and_commands(capsys):
    assert _run(capsys, ["kernel", "--t", "-1.0"])[0] == 2
    assert _run(capsys, ["kernel", "frobnicate"])[0] == 2
    assert _run(capsys, ["frobnicate"])[0] == 2
    assert _run(capsys, ["flow", "--tol", "nope"])[0] == 2
    assert _run(capsys, ["flow", "--tol", "-0.5"])[0] == 2
    assert _run(capsys, [])[0] == 2


def test_kernel_line_report_and_csv(tmp_path, capsys):
    csv_path = tmp_path / "kernel.csv"
    code, out, _ = _run(capsys, ["kernel", "eval", "--geometry", "line",
                                 "--t", "0.7", "--samples", "4096",
                                 "--half-width", "300", "--csv", str(csv_path)])
    assert code == 0
    rep = _report(out)
    assert abs(rep["results"]["midpoint_mass"] - 1.0) < 2e-3
    assert 0.4 < rep["results"]["peak"] <= 1.0 / (0.7 * np.pi)
    with open(csv_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0][0] == "x"
    assert len(rows) == 4097


def test_kernel_circle_ratio(capsys):
    code, out, _ = _run(capsys, ["kernel", "--geometry", "circle",
                                 "--samples", "512"])
    assert code == 0
    res = _report(out)["results"]
    assert abs(res["mass"] - 1.0) < 1e-12
    assert abs(res["closed_form_ratio"] - 2 * np.pi) < 1e-10
    assert res["closed_form_ratio_spread"] < 1e-9


def test_norms_indicator(capsys):
    code, out, _ = _run(capsys, ["norms", "--profile", "indicator",
                                 "--length", "3.0"])
    assert code == 0
    res = _report(out)["results"]
    assert abs(res["l21"] - np.sqrt(3.0)) < 0.07  # sqrt(h) edge effect


def test_flow_default_recipe(capsys):
    code, out, _ = _run(capsys, ["flow", "--n-modes", "64",
                                 "--perturbation", "0.05", "--tol", "1e-5"])
    assert code == 0
    res = _report(out)["results"]
    ids = {c["check"] for c in res["checks"]}
    assert {"flow-monotone", "flow-converged", "flow-energy-target",
            "flow-gradient-fd"} <= ids
    assert res["monotone_violations"] == 0
    assert res["el_residual"] <= 1e-5


def test_flow_initial_field_roundtrip(tmp_path, capsys):
    path = tmp_path / "u0.csv"
    save_csv(field_from_function(CircleGrid(32),
                                 lambda t: np.stack([np.cos(t), np.sin(t)])), path)
    code, out, _ = _run(capsys, ["flow", "--initial", str(path)])
    assert code == 0
    res = _report(out)["results"]
    assert res["iterations"] <= 1  # already critical
    assert res["el_residual"] < 1e-10
    ids = {c["check"] for c in res["checks"]}
    assert "flow-energy-target" not in ids  # file input skips the recipe checks


def test_flow_rejects_bad_initial_fields(tmp_path, capsys):
    line = tmp_path / "line.csv"
    save_csv(field_from_function(LineGrid(1.0, 16),
                                 lambda x: np.stack([x, x])), line)
    assert _run(capsys, ["flow", "--initial", str(line)])[0] == 2
    off = tmp_path / "off.csv"
    save_csv(field_from_function(CircleGrid(16),
                                 lambda t: np.stack([2 * np.cos(t), np.sin(t)])), off)
    assert _run(capsys, ["flow", "--initial", str(off)])[0] == 2
    assert _run(capsys, ["flow", "--initial", str(tmp_path / "nope.csv")])[0] == 2


def test_selftest_subset(capsys):
    code, out, err = _run(capsys, ["selftest", "--only", "06,09"])
    assert code == 0
    res = _report(out)["results"]
    assert res["n_checks"] == 2
    assert res["counts"] == {"pass": 2}
    assert "06-pohozaev-circle" in err  # progress lines go to stderr


def test_selftest_unknown_prefix(capsys):
    assert _run(capsys, ["selftest", "--only", "99"])[0] == 2


def test_threads_from_env(capsys, monkeypatch):
    monkeypatch.setenv("FRACLAP_THREADS", "2")
    code, out, _ = _run(capsys, ["pohozaev", "--geometry", "circle"])
    assert code == 0
    assert _report(out)["meta"]["threads"] == 2
    monkeypatch.setenv("FRACLAP_THREADS", "zero")
    assert _run(capsys, ["pohozaev", "--geometry", "circle"])[0] == 2


def test_threads_flag_beats_env(capsys, monkeypatch):
    monkeypatch.setenv("FRACLAP_THREADS", "2")
    code, out, _ = _run(capsys, ["pohozaev", "--threads", "1"])
    assert code == 0
    assert _report(out)["meta"]["threads"] == 1
