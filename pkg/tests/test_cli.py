import csv
import json
import subprocess
import sys

import pytest

from kgmradial.cli import main

MODEL = "s = 0.5\nalpha = {alpha}\np = {p}\nomega = {omega}\n"


def config(tmp_path, alpha=0.0, p=4.0, omega=0.3, extra=""):
    path = tmp_path / "run.toml"
    path.write_text(MODEL.format(alpha=alpha, p=p, omega=omega) + extra)
    return str(path)


def test_admissible_ok(tmp_path, capsys):
    assert main(["admissible", "--config", config(tmp_path, p=5.0)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["admissible"] is True and report["violated_conditions"] == []


def test_admissible_reports_violations(tmp_path, capsys):
    assert main(["admissible", "--config", config(tmp_path, p=3.0, omega=0.8), "--out", str(tmp_path)]) == 2
    report = json.loads(capsys.readouterr().out)
    assert report["violated_conditions"] == ["(b)"]
    assert json.loads((tmp_path / "report.json").read_text()) == report


def test_missing_model_key(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("s = 0.5\nalpha = 0.0\np = 4.0\n")
    assert main(["admissible", "--config", str(path)]) == 1
    assert "omega" in capsys.readouterr().err


def test_corrupted_config(tmp_path, capsys):
    path = tmp_path / "bad.toml"
    path.write_text("s = [\n")
    assert main(["solve", "--config", str(path)]) == 1
    assert "malformed" in capsys.readouterr().err


def test_threshold_table_csv(tmp_path):
    cfg = config(tmp_path, extra="[table]\nomegas = [1.0]\ns_points = 1000\n")
    assert main(["threshold-table", "--config", cfg, "--out", str(tmp_path)]) == 0
    with open(tmp_path / "threshold.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 1000 and rows[0].keys() == {"s", "omega_gap", "alpha0", "second_difference"}
    mid = min(rows, key=lambda r: abs(float(r["s"]) - 0.5))
    assert float(mid["alpha0"]) == pytest.approx(2.0, rel=1e-3)


def test_threshold_table_json(tmp_path):
    cfg = config(tmp_path, extra="[table]\nomegas = [0.1, 10.0]\ns_points = 20\n")
    assert main(["threshold-table", "--config", cfg, "--out", str(tmp_path), "--format", "json"]) == 0
    rows = json.loads((tmp_path / "threshold.json").read_text())
    assert len(rows) == 40 and rows[0]["second_difference"] is None


def test_solve_below_threshold(tmp_path, capsys):
    assert main(["solve", "--config", config(tmp_path, alpha=-5.0), "--out", str(tmp_path)]) == 2
    captured = capsys.readouterr()
    assert "threshold" in json.loads(captured.out)["violated_conditions"]
    assert not (tmp_path / "report.json").exists()


def test_solve_unconverged(tmp_path):
    args = ["solve", "--config", config(tmp_path), "--out", str(tmp_path), "--N", "127", "--max-iters", "1"]
    assert main(args) == 3
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["converged"] is False and report["iterations"] == 1
    assert "solve_seconds" in json.loads((tmp_path / "timing.json").read_text())
    assert (tmp_path / "u.csv").read_text().splitlines()[0] == "r,u"


def test_solve_output_is_deterministic(tmp_path):
    outs = []
    for name in ("a", "b"):
        d = tmp_path / name
        assert main(["solve", "--config", config(tmp_path), "--out", str(d), "--N", "127", "--R", "16"]) == 0
        outs.append((d / "report.json").read_bytes() + (d / "u.csv").read_bytes())
    assert outs[0] == outs[1]


def test_spectrum_too_many_pairs(tmp_path, capsys):
    extra = '[potential]\nkind = "coercive"\nexpr = "r**2"\n[spectrum]\nK = 9\n'
    assert main(["spectrum", "--config", config(tmp_path, extra=extra), "--N", "32", "--out", str(tmp_path)]) == 1
    assert "error" in capsys.readouterr().err


def test_spectrum_oscillator(tmp_path):
    extra = '[potential]\nkind = "coercive"\nexpr = "r**2"\nv0 = 0.0\n[grid]\nR = 14.0\nN = 255\n[spectrum]\nK = 4\n'
    assert main(["spectrum", "--config", config(tmp_path, extra=extra), "--out", str(tmp_path), "--format", "csv"]) == 0
    spec = json.loads((tmp_path / "spectrum.json").read_text())
    assert spec["lambdas"] == pytest.approx([3, 7, 11, 15], rel=1e-3)
    header = (tmp_path / "eigenfields.csv").read_text().splitlines()[0]
    assert header == "r,e1,e2,e3,e4"


def test_verify_fails_on_coarse_grid(tmp_path, capsys):
    assert main(["verify", "--N", "8", "--out", str(tmp_path)]) == 4
    summary = json.loads((tmp_path / "verify.json").read_text())
    assert summary["passed"] is False and summary["failures"]
    assert "FAIL" in capsys.readouterr().err


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "kgmradial", "admissible", "--config", config(tmp_path, p=5.0)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["admissible"] is True


@pytest.mark.parametrize("argv", [["nonsense"], ["solve", "--N", "many"], []])
def test_usage_errors_exit_one(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1
