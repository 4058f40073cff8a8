import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from degspin.cli import main
from degspin.solver import read_csv

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_tensors_flat_json(capsys):
    code, out, _ = run(capsys, "tensors", "--config", str(CONFIGS / "flat.yaml"), "--point", "0,0,0,0", "--json")
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_array_equal(doc["gbar"], np.eye(4))
    np.testing.assert_array_equal(doc["h"], np.diag([0.0, 1, 1, 1]))
    assert doc["validation"]["ok"]


def test_tensors_human_output(capsys):
    code, out, _ = run(capsys, "tensors", "--config", str(CONFIGS / "newtonian.yaml"), "--point", "1,0.5,0,0")
    assert code == 0
    assert "gbar:" in out and "frame_X:" in out and "compatibility:" in out


def test_lift_rotating(capsys):
    code, out, _ = run(capsys, "--json", "lift", "--config", str(CONFIGS / "rotating.yaml"))
    assert code == 0
    doc = json.loads(out)
    np.testing.assert_allclose(doc["connection_form"]["rotation"][0], [-0.3, 0, 0], atol=1e-12)
    lifted = np.array(doc["lifted"]["X0"]["re"]) + 1j * np.array(doc["lifted"]["X0"]["im"])
    assert np.abs(lifted).max() == pytest.approx(0.15)


def test_lift_static_newtonian_fails(capsys, tmp_path):
    cfg = tmp_path / "static.yaml"
    cfg.write_text("preset: newtonian\nmetric: static\npotential:\n  - {coefficient: 1.0, exponents: [0, 1, 0, 0]}\n")
    code, _, err = run(capsys, "lift", "--config", str(cfg))
    assert code == 1 and "so(1,0,3)" in err


def test_malformed_config_exit_2(capsys, tmp_path):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("preset: sampled\ngrid:\n  shape: [3, 3, 3]\n")
    code, _, err = run(capsys, "tensors", "--config", str(cfg))
    assert code == 2
    assert "grid.shape (line 3)" in err


def test_off_grid_point_exit_2(capsys):
    code, _, err = run(capsys, "tensors", "--config", str(CONFIGS / "rotating.yaml"), "--point", "0.1,0,0,0")
    assert code == 2 and "grid node" in err


def test_usage_errors_exit_2(capsys):
    assert run(capsys, "solve", "--bogus")[0] == 2
    assert run(capsys, "solve", "--k", "1,2")[0] == 2
    assert run(capsys, "solve", "--mass", "-1")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "verify", "--suite", "nope")[0] == 2


def test_solve_planewave(capsys):
    code, out, _ = run(capsys, "solve", "--mode", "planewave", "--k", "1,0,0", "--mass", "1", "--json")
    assert code == 0
    assert json.loads(out)["residual_max"] <= 1e-12
    code, out, _ = run(capsys, "solve", "--mode", "planewave", "--k", "1,0,0", "--energy", "1.0", "--json")
    assert json.loads(out)["residual_max"] == pytest.approx(0.5)


def test_solve_reduce_check(capsys):
    code, out, _ = run(capsys, "solve", "--mode", "reduce-check", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["extra"]["ll_residual"] <= 1e-10
    code, out, _ = run(capsys, "solve", "--mode", "reduce-check", "--static", "--json")
    doc = json.loads(out)
    assert code == 0 and doc["extra"]["max_norm_gap"] <= 1e-10 and doc["residual_max"] > 0.1


def test_solve_wavepacket_writes_csv_and_report(capsys, tmp_path):
    csv_path, rep = tmp_path / "traj.csv", tmp_path / "report.json"
    code, out, _ = run(capsys, "solve", "--mode", "wavepacket", "--grid-points", "64", "--steps", "10",
                       "--save-every", "5", "--output", str(csv_path), "--report", str(rep))
    assert code == 0 and "l2_error" in out
    assert read_csv(csv_path).psi.shape == (3, 64, 4)
    doc = json.loads(rep.read_text())
    assert doc["output"] == str(csv_path) and np.isfinite(doc["norm_drift"])


def test_verify_subset(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "clifford", "--suite", "lie")
    assert code == 0
    assert out.count("PASS") == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "degspin", "solve", "--mode", "planewave", "--json"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["mode"] == "planewave"
