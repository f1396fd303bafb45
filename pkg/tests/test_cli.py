import csv
import io
import json
import shutil
import subprocess

import pytest

from banach_ito.cli import (EXIT_CONFIG, EXIT_FAIL, EXIT_OK, FIELDS, ConfigError, bundled_configs, load_config,
                            main, run_campaign, sweep)


def _write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg) if not isinstance(cfg, str) else cfg)
    return str(p)


def _rows(path):
    return list(csv.DictReader(io.StringIO(path.read_text())))


def test_empty_config(tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["run", "empty", "--out-dir", str(out)]) == EXIT_OK
    assert (out / "report.csv").read_text().strip() == ",".join(FIELDS)
    assert json.loads((out / "report.json").read_text())["rows"] == []


def test_bundled_isometry_tree_passes(tmp_path):
    out = tmp_path / "out"
    assert main(["run", "isometry-tree", "--out-dir", str(out)]) == EXIT_OK
    rows = _rows(out / "report.csv")
    assert rows and all(r["pass"] == "true" for r in rows)
    assert {r["check_name"].split(".")[0].split("[")[0] for r in rows} >= {"ito_isometry", "cond_expectation", "jensen"}


def test_corrupted_json(tmp_path, capsys):
    path = _write(tmp_path, '{"seed": 1, "checks": [')
    assert main(["run", path, "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    assert "invalid JSON at line 1" in capsys.readouterr().err


def test_missing_file(capsys):
    assert main(["run", "/nonexistent/cfg.json"]) == EXIT_CONFIG


def test_field_path_in_diagnostic(tmp_path, capsys):
    path = _write(tmp_path, {"seed": 1, "checks": [{"name": "no_such_check"}]})
    assert main(["run", path]) == EXIT_CONFIG
    assert "field checks/0/name" in capsys.readouterr().err


@pytest.mark.parametrize("cfg, where", [
    ({"checks": []}, "<root>"),
    ({"seed": -1}, "field seed"),
    ({"seed": 1, "tolerances": {"jensen": 0}}, "field tolerances/jensen"),
    ({"seed": 1, "martingale": {"kind": "random_walk", "steps": 30}}, "field martingale/steps"),
    ({"seed": 1, "martingale": {"kind": "brownian", "steps": 4}}, "path_count"),
])
def test_schema_errors(tmp_path, capsys, cfg, where):
    assert main(["run", _write(tmp_path, cfg)]) == EXIT_CONFIG
    assert where in capsys.readouterr().err


def test_bad_check_params_are_config_errors(tmp_path, capsys):
    cfg = {"seed": 1, "martingale": {"kind": "random_walk", "steps": 4},
           "checks": [{"name": "approximation", "params": {"values": [3]}}]}
    assert main(["run", _write(tmp_path, cfg)]) == EXIT_CONFIG
    assert "field checks/0" in capsys.readouterr().err


def test_failing_check_exits_one(tmp_path, capsys):
    # a z-score tolerance far below sampling noise must fail
    cfg = {"seed": 2, "space": {"kind": "supgrid", "params": {"n": 1}},
           "martingale": {"kind": "brownian", "steps": 4, "path_count": 200, "seed": 4},
           "checks": [{"name": "ito_isometry_mc", "params": {"coords": [1.0]}}],
           "tolerances": {"ito_isometry_mc": 1e-9}}
    rc = main(["run", _write(tmp_path, cfg), "--out-dir", str(tmp_path / "o")])
    err = capsys.readouterr().err
    assert rc == EXIT_FAIL and "FAIL ito_isometry_mc" in err


def test_json_format_and_seed_override(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["run", "mnorm-calculus", "--seed", "99", "--format", "json", "--out-dir", str(out)]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["seed"] == 99 and len(doc["inputs_digest"]) == 64
    assert all(set(r) == set(FIELDS) for r in doc["rows"])


def test_pass_matches_residual_rule():
    rows, _ = run_campaign(load_config("mnorm-calculus"))
    assert all(r.passed == (r.residual <= r.tolerance) for r in rows)


def test_reports_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "approximation", "--out-dir", str(a)]) == EXIT_OK
    assert main(["run", "approximation", "--out-dir", str(b)]) == EXIT_OK
    for name in ("report.csv", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "timings.json").exists()


def test_sweep_coarseness(tmp_path):
    out = tmp_path / "s"
    assert main(["sweep", "approximation", "--param", "coarseness", "--values", "8,2,4",
                 "--out-dir", str(out)]) == EXIT_OK
    rows = _rows(out / "sweep.csv")
    assert [float(r["value"]) for r in rows if not r["check_name"].endswith("monotone")] == [2, 4, 8]
    heads = [float(r["lhs"]) for r in rows if not r["check_name"].endswith("monotone")]
    assert heads == sorted(heads, reverse=True)
    assert sum(r["check_name"] == "coarseness.monotone" for r in rows) == 2


def test_sweep_t_shrinks_profile(tmp_path):
    cfg = load_config("approximation")
    table, _ = sweep(cfg, "t", [0.25, 0.5, 1.0])
    heads = [d["lhs"] for d in table if d["check_name"] != "t.monotone"]
    assert heads[0] <= heads[-1]
    assert all(d["pass"] for d in table)


def test_sweep_single_value_and_bad_param(tmp_path):
    table, _ = sweep(load_config("approximation"), "shift", [1.0])
    assert len(table) == 1
    with pytest.raises(ConfigError):
        sweep(load_config("approximation"), "nope", [1])
    assert main(["sweep", "approximation", "--param", "nope", "--values", "1"]) == EXIT_CONFIG


def test_list(capsys):
    assert main(["list"]) == EXIT_OK
    assert capsys.readouterr().out.split() == bundled_configs()


@pytest.mark.skipif(shutil.which("verify") is None, reason="console script not installed")
def test_console_script(tmp_path):
    proc = subprocess.run(["verify", "run", "empty", "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0
