import csv
import json

import pytest
import yaml

from uscsensor.cli import main

SMALL = ["--n-fock", "12", "--grid-start", "0.65", "--grid-stop", "0.75", "--grid-step", "1e-3"]


def small_config(tmp_path, **extra):
    data = {"numerics": {"n_levels": 6}, **extra}
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(data))
    return ["--config", str(path)]


def test_spectrum_run(tmp_path):
    out = tmp_path / "s"
    assert main(small_config(tmp_path) + SMALL + ["--mode", "spectrum", "--out", str(out)]) == 0
    rows = list(csv.reader(open(out / "spectrum.csv")))
    assert rows[0] == ["omega_1", "value"] and len(rows) == 102
    peaks = json.load(open(out / "peaks.json"))
    assert peaks["schema_version"] == "1"
    assert any(p["label"] == "C" for p in peaks["peaks"])
    snap = yaml.safe_load(open(out / "config.yaml"))
    assert snap["numerics"]["n_fock"] == 12


def test_runs_are_deterministic(tmp_path):
    args = small_config(tmp_path) + SMALL + ["--mode", "g2_scan", "--fixed", "w2=w10"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("g2.csv", "g2.json", "peaks.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_g3_run_with_numeric_fixed(tmp_path):
    out = tmp_path / "g3"
    args = small_config(tmp_path) + SMALL + ["--mode", "g3_scan", "--fixed", "w2=w21", "--fixed", "w3=0.78",
                                             "--theta", "pi/6", "--out", str(out)]
    assert main(args) == 0
    data = json.load(open(out / "g3.json"))
    assert data["kind"] == "g3" and data["fixed_frequencies"]["omega_3"] == 0.78


def test_energy_sweep_run(tmp_path):
    assert main(["--mode", "energy_sweep", "--n-fock", "12", "--out", str(tmp_path / "e")]) == 0
    rows = list(csv.reader(open(tmp_path / "e" / "energies.csv")))
    assert len(rows) == 52


def test_theta_map_run(tmp_path):
    cfg = small_config(tmp_path, theta_grid={"start": 0, "stop": "pi/2", "num": 3})
    assert main(cfg + SMALL + ["--mode", "spectrum_theta_map", "--out", str(tmp_path / "m")]) == 0
    rows = list(csv.reader(open(tmp_path / "m" / "spectrum_theta_map.csv")))
    assert rows[0] == ["theta", "omega_1", "value"] and len(rows) == 1 + 3 * 101
    assert len(json.load(open(tmp_path / "m" / "peaks.json"))["theta_map"]) == 3


@pytest.mark.parametrize("tol,code", [(0.05, 0), (1e-9, 1)])
def test_oracle_check_exit_status(tmp_path, tol, code):
    cfg = small_config(tmp_path, oracle={"spectrum_tolerance": tol, "g2_points": ["w31", "w20"]})
    out = tmp_path / "o"
    assert main(cfg + SMALL + ["--mode", "oracle_check", "--out", str(out)]) == code
    report = json.load(open(out / "oracle_report.json"))
    assert report["pass"] is (code == 0)
    assert report["epsilon_scaling"]["ratio"] == pytest.approx(4, rel=0.05)


@pytest.mark.parametrize("args,field", [
    (["--grid-step", "0"], "grid.step"),
    (["--mode", "g2_scan"], "fixed.w2"),
    (["--mode", "g2_scan", "--fixed", "w2=w01"], "fixed.w2"),
    (["--mode", "g2_scan", "--fixed", "w2=w0"], "fixed.w2"),
    (["--theta", "half"], "model.theta"),
    (["--oracle-epsilon", "1", "--mode", "oracle_check"], "oracle.epsilon"),
])
def test_config_errors(tmp_path, capsys, args, field):
    assert main(small_config(tmp_path) + SMALL + args + ["--out", str(tmp_path / "x")]) == 2
    assert field in capsys.readouterr().err
