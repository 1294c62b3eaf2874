import json
import math
import subprocess
import sys

import numpy as np
import pytest

from sphereperc import records
from sphereperc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_gamma(capsys):
    code, out, _ = run(capsys, "analyze", "--gamma-deg", "5.2", "--N", "500", "--dm-km", "809.5", "--a-km", "10")
    assert code == 0
    d = json.loads(out)
    assert d["N_c"] == pytest.approx(336.49, abs=0.01)
    assert (d["N_L"], d["N_U"]) == (17, 1435)
    assert d["h_c_km"] == pytest.approx(638.6, abs=1)
    hb = d["hex_bounds"][0]
    assert hb["a_km"] == 10.0
    assert hb["N_c_L"] < d["N_c"] < hb["N_c_U"]


def test_analyze_from_elevation(capsys):
    code, out, _ = run(capsys, "analyze", "--h", "550", "--elevation-deg", "40", "--N", "500")
    assert code == 0
    d = json.loads(out)
    assert d["gamma_deg"] == pytest.approx(5.157, abs=1e-3)
    assert d["N_c"] == pytest.approx(342.15, abs=0.05)


def test_analyze_csv_format(capsys):
    code, out, _ = run(capsys, "analyze", "--gamma-deg", "6.14", "--format", "csv")
    assert code == 0
    cols, rows = records._read(out)
    assert float(rows[0]["N_c"]) == pytest.approx(241.3, abs=0.05)


@pytest.mark.parametrize("argv", [
    ["analyze", "--gamma-deg", "95"],
    ["analyze", "--gamma-deg", "0"],
    ["analyze", "--elevation-deg", "40"],
    ["analyze", "--h", "550", "--elevation-deg", "40", "--dm-km", "800"],
    ["analyze", "--h", "550", "--dm-km", "100"],
    ["simulate", "--gamma-deg", "5.2"],
    ["simulate", "--gamma-deg", "5.2", "--N", "10", "--trials", "0"],
    ["sweep", "--gamma-deg", "5.2", "--axis", "N"],
])
def test_domain_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_simulate_json(capsys):
    code, out, _ = run(capsys, "simulate", "--gamma-deg", "10", "--N", "150", "--trials", "40", "--seed", "1")
    assert code == 0
    d = json.loads(out)
    assert d["trials"] == 40 and 0.0 <= d["theta_hat"] <= 1.0
    assert d["theta_hat"] == d["successes"] / 40


def test_simulate_clopper_pearson(capsys):
    code, out, _ = run(capsys, "simulate", "--gamma-deg", "5.2", "--N", "100", "--trials", "20",
                       "--interval", "clopper-pearson")
    d = json.loads(out)
    assert code == 0 and d["degenerate"] and d["ci95_high"] > 0


def test_sweep_csv_round_trip_and_reproducible(capsys, tmp_path):
    argv = ["sweep", "--gamma-deg", "8", "--axis", "N", "--from", "100", "--to", "300", "--step", "100",
            "--trials", "30", "--seed", "2", "--coupled"]
    code, out1, _ = run(capsys, *argv)
    assert code == 0
    code, out2, _ = run(capsys, *argv, "--workers", "2")
    assert out1 == out2
    rows = records.read_sweep_csv(out1)
    assert [r.value for r in rows] == [100.0, 200.0, 300.0]
    assert [r.theta_hat for r in rows] == sorted(r.theta_hat for r in rows)
    assert all(r.critical_marker == pytest.approx(rows[0].critical_marker) for r in rows)
    dest = tmp_path / "s.csv"
    assert run(capsys, *argv, "-o", str(dest))[0] == 0
    assert dest.read_text() == out1


def test_sweep_altitude_infeasible_exit_3(capsys):
    base = ["sweep", "--axis", "altitude", "--N", "50", "--dm-km", "809.5", "--grid", "500", "900",
            "--trials", "5"]
    code, out, err = run(capsys, *base)
    assert code == 3 and "skip-infeasible" in err
    code, out, err = run(capsys, *base, "--skip-infeasible")
    assert code == 3
    assert len(records.read_sweep_csv(out)) == 1
    assert "skipped" in err


def test_sweep_slant_alias(capsys):
    code, out, _ = run(capsys, "sweep", "--axis", "slant", "--N", "50", "--h", "550", "--grid", "700", "800",
                       "--trials", "5")
    assert code == 0
    rows = records.read_sweep_csv(out)
    assert all(r.axis == "slant_range" for r in rows)


def test_layout_audit(capsys, tmp_path):
    rec = tmp_path / "layout.rec"
    code, out, err = run(capsys, "layout", "--gamma-deg", "5.2", "--audit-samples", "20000", "--record", str(rec))
    assert code == 0
    assert "uncovered=0" in err
    centers, meta = records.read_layout_csv(out)
    assert centers.shape == (1435, 3)
    assert meta["m"] == "35" and meta["n"] == "41" and meta["uncovered"] == "0"
    assert np.allclose(np.linalg.norm(centers, axis=1), 1.0)
    assert rec.exists()


def test_hexgrid(capsys):
    code, out, _ = run(capsys, "hexgrid", "--gamma-deg", "5.2", "--N", "400", "--a-km", "10", "--extent-km", "10")
    assert code == 0
    rows = records.read_hexgrid_csv(out)
    assert len(rows) == 7
    assert rows[0][:2] == (0, 0)
    assert {r[4] for r in rows} <= {"open_certified", "closed_certified", "undetermined"}


def test_config_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shell\ngamma-deg = 6.58\nN = 300\ntrials = 10\nseed = 4\n")
    code, out, _ = run(capsys, "--config", str(cfg), "simulate")
    assert code == 0
    d = json.loads(out)
    assert d["gamma_deg"] == pytest.approx(6.58) and d["trials"] == 10
    code, out, _ = run(capsys, "--config", str(cfg), "simulate", "--trials", "12")
    assert json.loads(out)["trials"] == 12


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("frobnicate = 1\n")
    code, _, err = run(capsys, "--config", str(cfg), "analyze", "--gamma-deg", "5")
    assert code == 2 and "frobnicate" in err


def test_threads_env_does_not_change_output(capsys, monkeypatch):
    argv = ["simulate", "--gamma-deg", "9", "--N", "200", "--trials", "16", "--workers", "2"]
    _, a, _ = run(capsys, *argv)
    monkeypatch.setenv("SPHEREPERC_THREADS", "1")
    _, b, _ = run(capsys, *argv)
    assert a == b


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sphereperc.cli", "analyze", "--gamma-deg", "5.2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert math.isclose(json.loads(proc.stdout)["N_c"], 336.49, abs_tol=0.01)
