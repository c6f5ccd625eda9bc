import csv
import hashlib
import json

import pytest

from pmcontrol import cli

SMALL = {
    "optimize": ["--starts", "2", "--budget", "15", "--M", "3"],
    "eval": ["--field", "pm_n1", "--K", "200", "--M", "5"],
    "map": ["--field", "pm_n1", "--field2", "sfb_p2_n1", "--n-delta", "9", "--n-alpha", "5"],
    "sweep": ["--field", "rect_pi", "--K", "50", "--gammas-MHz", "0,1"],
    "dd": ["--n-tau", "3", "--trials", "4", "--tau-stop-us", "60"],
    "spectrum": ["--field", "pm_n1"],
}


def run(tmp_path, command, *extra):
    out = tmp_path / "runs"
    code = cli.main([command, "--out", str(out), *SMALL[command], *extra])
    dirs = sorted(out.glob(f"*-{command}"))
    return code, (dirs[-1] if dirs else None)


@pytest.mark.parametrize("command", sorted(SMALL))
def test_every_command_runs_and_writes_a_manifest(tmp_path, command):
    code, path = run(tmp_path, command)
    assert code == 0
    manifest = json.loads((path / "manifest.json").read_text())
    assert manifest["command"] == command and manifest["exit_code"] == 0
    assert manifest["seed"] == 0 and manifest["version"]
    assert manifest["outputs"]
    for entry in manifest["outputs"].values():
        data = (path / entry["path"]).read_bytes()
        assert hashlib.sha256(data).hexdigest() == entry["sha256"]


def test_optimize_outputs(tmp_path, capsys):
    code, path = run(tmp_path, "optimize")
    assert code == 0
    summary = json.loads((path / "summary.json").read_text())
    assert summary["budget"] == 15 and summary["Omega_ave_basis"] == "envelope |c(t)|"
    assert 0 <= summary["best_F_obj"] <= 1
    assert "best F_obj" in capsys.readouterr().out
    rows = list(csv.reader((path / "ranked_runs.csv").open()))
    assert len(rows) == 3
    assert json.loads((path / "best_field.json").read_text())["family"] == "pm"


def test_dd_outputs_curve_and_t2(tmp_path):
    code, path = run(tmp_path, "dd")
    assert code == 0
    rows = list(csv.reader((path / "dd.csv").open()))
    assert rows[0] == ["T_us", "P0", "stderr", "n_trials"] and len(rows) == 4
    doc = json.loads((path / "dd.json").read_text())
    assert doc["T2_us"] > 0 and doc["pulse_impl"] == "rect"


def test_dd_without_crossing_exits_with_numeric_code(tmp_path):
    code, path = run(tmp_path, "dd", "--tau-stop-us", "0.5")
    assert code == cli.EXIT_NUMERIC
    assert json.loads((path / "dd.json").read_text())["T2_us"] is None
    assert json.loads((path / "manifest.json").read_text())["exit_code"] == cli.EXIT_NUMERIC


def test_map_prints_area_ratio(tmp_path, capsys):
    code, path = run(tmp_path, "map")
    assert code == 0
    assert "area ratio field/field2" in capsys.readouterr().out
    assert "field" in json.loads((path / "summary.json").read_text())["ratios"]


def test_config_file_values_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"starts": 3, "budget": 12, "M": 3, "seed": 4}))
    out = tmp_path / "runs"
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(out), "--seed", "9"]) == 0
    manifest = json.loads(next(out.glob("*-optimize/manifest.json")).read_text())
    assert manifest["config"]["starts"] == 3 and manifest["config"]["budget"] == 12
    assert manifest["seed"] == 9


def test_bad_config_reports_line_and_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text('{\n  "starts": 3,\n  "bogus": 1\n}\n')
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert f"{cfg}:3:" in capsys.readouterr().err
    cfg.write_text('{\n  "starts": "many"\n}\n')
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert f"{cfg}:2:" in capsys.readouterr().err
    cfg.write_text('{\n  "starts": 3,,\n}\n')
    assert cli.main(["optimize", "--config", str(cfg), "--out", str(tmp_path)]) == cli.EXIT_CONFIG
    assert f"{cfg}:2:" in capsys.readouterr().err


def test_missing_field_exits_nonzero(tmp_path, capsys):
    code = cli.main(["eval", "--field", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == cli.EXIT_CONFIG
    assert "no such file" in capsys.readouterr().err


def test_bad_flag_value_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        cli.main(["optimize", "--family", "nope", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_shipped_fields_are_listed():
    assert {"pm_n1", "sfb_p2_n1", "rect_pi", "pm_x_gate", "pm_y_gate"} <= set(cli.shipped_fields())
