import json
import subprocess
import sys

import pytest

from dnls_breathers.cli import build_parser, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out.strip().splitlines()[-1])


def bad(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1
    return exc.value.code, json.loads(err[0])


def test_breather_example(tmp_path, capsys):
    code, out = run(["breather", "--dim", "1", "--p", "1", "--mode", "ST", "--mu", "0.2", "--out", str(tmp_path)],
                    capsys)
    assert code == 0 and out["residual_inf"] <= 1e-12
    res = json.loads((tmp_path / "breather.json").read_text())
    assert res["residual_inf"] <= 1e-12 and res["coercivity_margin"] > 0
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert {"config", "versions", "wall_time"} <= set(manifest)
    assert manifest["config"]["mu"] == 0.2 and manifest["partial"] is False


def test_fem_check_example(tmp_path, capsys):
    code, out = run(["fem-check", "--dim", "2", "--trials", "100", "--seed", "7", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert out["failures"] == 0 and out["max_rel_err"] <= 1e-12 and out["checks"] == 200
    reports = json.loads((tmp_path / "fem_check.json").read_text())["reports"]
    assert {r["identity"] for r in reports} == {"gradient", "mass"}


def test_convergence_example(tmp_path, capsys):
    code, out = run(["convergence", "--dim", "1", "--p", "1", "--mode", "P", "--mus", "0.4,0.2,0.1,0.05",
                     "--out", str(tmp_path)], capsys)
    assert code == 0 and out["fitted_order_qmu"] >= 0.8
    assert len((tmp_path / "convergence.csv").read_text().splitlines()) == 5


def test_ground_state_and_evolve(tmp_path, capsys):
    code, out = run(["ground-state", "--dim", "2", "--out", str(tmp_path / "g")], capsys)
    assert code == 0 and out["mass"] == pytest.approx(1.0, abs=1e-10)
    assert (tmp_path / "g" / "profile.csv").exists()
    code, out = run(["evolve", "--mu", "0.4", "--steps", "512", "--snapshots", "2", "--out", str(tmp_path / "e")],
                    capsys)
    assert code == 0 and out["dN"] <= 1e-12
    assert sorted(p.name for p in (tmp_path / "e").iterdir()) == [
        "breather.csv", "breather.json", "manifest.json", "snapshot_0000.csv", "snapshot_0001.csv",
        "snapshot_summary.json"]


def test_invalid_configs(tmp_path, capsys):
    code, err = bad(["breather", "--dim", "2", "--p", "1", "--out", str(tmp_path)], capsys)
    assert code == 2 and err["key"] == "p" and err["error"] == "invalid_config"
    code, err = bad(["breather", "--dim", "1", "--mode", "H_x", "--out", str(tmp_path)], capsys)
    assert err["key"] == "mode"
    code, err = bad(["breather", "--bogus"], capsys)
    assert code == 2 and "bogus" in err["message"]
    code, err = bad(["convergence", "--mus", "0.2,0.1"], capsys)
    assert err["key"] == "mus"
    code, err = bad(["breather", "--radius", "x"], capsys)
    assert code == 2
    code, err = bad([], capsys)
    assert err["key"] == "command"
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"command": "breather", "colour": 3}))
    code, err = bad(["--config", str(cfg)], capsys)
    assert err["key"] == "colour"
    # nothing was computed
    assert not list(tmp_path.glob("*/manifest.json"))


def test_help_lists_every_flag():
    text = build_parser().format_help()
    for flag in ("--config", "--dim", "--p", "--mode", "--mu", "--mus", "--radius", "--tol", "--max-iter", "--out",
                 "--seed", "--trials", "--steps", "--snapshots"):
        assert flag in text


def test_config_file_env_and_flags(tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "breather", "mu": 0.4, "radius": 120, "out": str(tmp_path / "file")}))
    monkeypatch.setenv("BREATHER_OUT", str(tmp_path / "env"))
    code, out = run(["--config", str(cfg), "--mu", "0.3"], capsys)
    assert code == 0 and out["mu"] == 0.3 and out["radius"] == 120
    assert (tmp_path / "env" / "breather.json").exists()
    code, _ = run(["--config", str(cfg), "--out", str(tmp_path / "flag")], capsys)
    assert (tmp_path / "flag" / "breather.json").exists()


def test_solver_failure_is_flagged(tmp_path, capsys):
    code, out = run(["breather", "--mu", "4", "--out", str(tmp_path)], capsys)
    assert code == 1 and out["partial"] is True
    fail = json.loads((tmp_path / "breather_failure.json").read_text())
    assert fail["partial"] and fail["trace"]
    assert json.loads((tmp_path / "manifest.json").read_text())["partial"] is True


def test_rerun_is_byte_identical(tmp_path, capsys):
    args = ["fem-check", "--dim", "1", "--trials", "20", "--seed", "3"]
    run(args + ["--out", str(tmp_path / "a")], capsys)
    run(args + ["--out", str(tmp_path / "b")], capsys)
    assert (tmp_path / "a" / "fem_check.json").read_bytes() == (tmp_path / "b" / "fem_check.json").read_bytes()
    ma = json.loads((tmp_path / "a" / "manifest.json").read_text())
    mb = json.loads((tmp_path / "b" / "manifest.json").read_text())
    ma.pop("wall_time"), mb.pop("wall_time")
    ma["config"].pop("out"), mb["config"].pop("out")
    assert ma == mb


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "dnls_breathers", "fem-check", "--trials", "2",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["failures"] == 0
