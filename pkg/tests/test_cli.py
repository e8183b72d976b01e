import csv
import json
import subprocess
import sys

import pytest

from solitonflow.cli import ConfigError, build_run, main, sweep_workers, validate_config


def _config(tmp_path, **over):
    cfg = {
        "system": "warped",
        "mode": "soliton",
        "spec": {"d": [1, 2, 3], "lambda": [0, 1, 1]},
        "params": {"C": -1.0},
        "seed": {"t0": 0.001, "l": [6.0, 3.0]},
        "integrator": {"h": 0.001, "t_max": 2.001, "decimate": 10},
    }
    for key, value in over.items():
        cfg[key] = value
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_run_writes_csv_and_report(tmp_path):
    out = tmp_path / "run.csv"
    assert main(["run", "--config", _config(tmp_path), "--out", str(out)]) == 0
    rows = _rows(out)
    header = rows[0]
    for col in ("t", "g_1", "g_3", "gdot_1", "u", "udot", "trL", "xi", "Rbar", "res2"):
        assert col in header
    assert len(rows) == 1 + 201
    report = json.loads(out.with_suffix(".json").read_text())
    assert report["termination"] == "reached t_max"


def test_csv_is_reproducible(tmp_path):
    cfg = _config(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["run", "--config", cfg, "--out", str(a)])
    main(["run", "--config", cfg, "--out", str(b), "--decimate", "10"])
    assert a.read_bytes() == b.read_bytes()


def test_bad_C_is_a_usage_error(tmp_path, capsys):
    code = main(["run", "--config", _config(tmp_path, params={"C": 1.0})])
    assert code == 1
    assert "C < 0" in capsys.readouterr().err


def test_schema_errors_name_fields():
    with pytest.raises(ConfigError) as info:
        validate_config({"system": "warped", "mode": "soliton",
                         "spec": {"d": [1, 2], "lambda": [0, "x"]},
                         "params": {"C": -1.0},
                         "seed": {"t0": 0.5, "l": [1.0]},
                         "integrator": {"h": 0.001, "t_max": 1.0}})
    msg = str(info.value)
    assert "spec.lambda.1" in msg and "seed.t0" in msg


def test_spec_and_preset_are_exclusive(tmp_path, capsys):
    code = main(["run", "--config", _config(tmp_path, preset={"name": "example2", "m": 1})])
    assert code == 1
    assert "spec" in capsys.readouterr().err


def test_tiny_radius_exits_early(tmp_path):
    cfg = _config(tmp_path, seed={"t0": 0.001, "l": [6.0, 1e-6]},
                  integrator={"h": 0.001, "t_max": 10.001})
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_preset_two_summands(tmp_path):
    cfg = _config(tmp_path, system="two-summands", spec=None)
    data = json.loads(open(cfg).read())
    del data["spec"]
    data["preset"] = {"name": "example2", "m": 2}
    data["seed"] = {"h_bar": 6.0}
    spec, p, field, seed, icfg = build_run(data)
    assert (spec.d1, spec.d2, spec.A2, spec.A3) == (2, 8, 16.0, 1.0)
    assert seed.t == pytest.approx(0.01)
    path = tmp_path / "ts.json"
    data["integrator"] = {"h": 0.001, "t_max": 1.01}
    path.write_text(json.dumps(data))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "ts.csv")]) == 0


def test_critical_points_command(tmp_path, capsys):
    out = tmp_path / "cp.json"
    assert main(["critical-points", "--d", "1", "2", "--lambda", "0", "1",
                 "--json", str(out)]) == 0
    rows = json.loads(out.read_text())
    assert sum(r["kind"] == "subset-type" for r in rows) == 1
    assert max(r["rhs_max"] for r in rows) < 1e-14
    assert "subset-type" in capsys.readouterr().out


def test_check_unknown_suite():
    assert main(["check", "--suite", "nope"]) == 1


def test_check_invariants_suite(capsys):
    assert main(["check", "--suite", "invariants"]) == 0
    assert "criterion 4: PASS" in capsys.readouterr().out


def test_compare_command(tmp_path, capsys):
    cfg = _config(tmp_path, integrator={"h": 0.001, "t_max": 6.001})
    assert main(["compare", "--config", cfg, "--t-start", "1", "--t-end", "5"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["max_deviation"] < 1e-6


def test_missing_arguments_exit_1():
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == 1


def test_sweep_workers(monkeypatch):
    monkeypatch.setenv("SOLITONFLOW_THREADS", "2")
    assert sweep_workers(5) == 2 and sweep_workers(1) == 1
    monkeypatch.setenv("SOLITONFLOW_THREADS", "many")
    with pytest.raises(ConfigError):
        sweep_workers(3)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "solitonflow", "critical-points",
                           "--d", "1", "2", "3", "--lambda", "0", "1", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert len(proc.stdout.strip().splitlines()) == 1 + 9
