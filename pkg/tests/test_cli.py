import csv
import json
import subprocess
import sys

import pytest

from radscat.cli import EXIT_CERTIFICATION, EXIT_NUMERICAL, EXIT_OK, EXIT_VALIDATION, main

FAST = """
solver:
  dr: 0.25
  t_min: -20.0
  t_max: 20.0
  report_radius: 20.0
scatter:
  fit_lo: 1.5
  fit_hi: 20.0
"""


def write(tmp_path, text, name="c.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def manifest(out):
    return json.loads((out / "manifest.json").read_text())


def test_dump_config_round_trip(tmp_path, capsys):
    assert main(["dump-config", write(tmp_path, FAST)]) == EXIT_OK
    dumped = capsys.readouterr().out
    assert main(["dump-config", write(tmp_path, dumped, "d.yaml")]) == EXIT_OK
    assert capsys.readouterr().out == dumped


def test_simulate_writes_outputs(tmp_path):
    out = tmp_path / "sim"
    assert main(["simulate", write(tmp_path, FAST), "-o", str(out)]) == EXIT_OK
    m = manifest(out)
    run = m["runs"]["simulate"]
    assert run["norm"] <= 1 and run["iterations"] >= 1
    assert run["grid"]["scheme"] == "descent"
    rows = read_csv(out / "snapshots.csv")
    assert rows and set(rows[0]) == {"t", "r", "u", "u0_minus"}


def test_scatter_is_deterministic(tmp_path):
    cfg = write(tmp_path, FAST)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["scatter", cfg, "-o", str(a)]) == EXIT_OK
    assert main(["scatter", cfg, "-o", str(b)]) == EXIT_OK
    assert (a / "decay.csv").read_bytes() == (b / "decay.csv").read_bytes()
    assert manifest(a) == manifest(b)
    run = manifest(a)["runs"]["scatter"]
    assert run["theta"] == 0.3
    assert run["theta_hat_minus"] > 0


def test_rerun_into_same_directory_is_stable(tmp_path):
    cfg = write(tmp_path, FAST)
    out = tmp_path / "o"
    assert main(["scatter", cfg, "-o", str(out)]) == EXIT_OK
    first = (out / "manifest.json").read_bytes()
    assert main(["scatter", cfg, "-o", str(out)]) == EXIT_OK
    assert (out / "manifest.json").read_bytes() == first
    assert main(["report", cfg, "-o", str(out)]) == EXIT_OK
    assert "[scatter]" in (out / "report.txt").read_text()


def test_manifest_conflict(tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", write(tmp_path, FAST), "-o", str(out)]) == EXIT_OK
    other = write(tmp_path, FAST + "nonlinearity:\n  A: 0.5\n", "other.yaml")
    assert main(["simulate", other, "-o", str(out)]) == EXIT_VALIDATION
    err = json.loads((out / "errors.json").read_text())
    assert err["type"] == "ManifestConflict"


def test_invalid_scenario_exit_code(tmp_path):
    out = tmp_path / "bad"
    cfg = write(tmp_path, FAST + "scenario:\n  p: 1.7\n  k: 1.0\n")
    assert main(["scatter", cfg, "-o", str(out)]) == EXIT_VALIDATION
    err = json.loads((out / "errors.json").read_text())
    assert err["error"] == "validation"
    assert {v["tag"] for v in err["violations"]} >= {"power_window"}


def test_unknown_key_exit_code(tmp_path):
    assert main(["scatter", write(tmp_path, "solver:\n  dx: 1\n")]) == EXIT_VALIDATION


def test_large_amplitude_numerical_exit(tmp_path):
    out = tmp_path / "big"
    cfg = write(tmp_path, FAST + "scenario:\n  eps: 100.0\n")
    assert main(["scatter", cfg, "-o", str(out)]) == EXIT_NUMERICAL
    err = json.loads((out / "errors.json").read_text())
    assert err["type"] == "SmallnessViolatedError"


def test_certify_trivial_sub_box(tmp_path):
    out = tmp_path / "cert"
    cfg = write(tmp_path, "verify:\n  lemmas: [A2]\n  box: 2.0\n  where: {b: [0.0]}\n")
    assert main(["certify", cfg, "-o", str(out)]) == EXIT_OK
    rep = manifest(out)["runs"]["certify"]["lemmas"]["A2"]
    assert rep["verdict"] == "pass"
    assert rep["C_hat"] == pytest.approx(1.0, rel=1e-9)
    assert read_csv(out / "lemma_A2.csv")


def test_certify_reports_failure_exit(tmp_path):
    # b = nu p is still pre-asymptotic on [0, 2], so box doubling exceeds its tolerance
    out = tmp_path / "cert"
    cfg = write(tmp_path, "verify:\n  lemmas: [A2]\n  box: 2.0\n")
    assert main(["certify", cfg, "-o", str(out)]) == EXIT_CERTIFICATION
    assert manifest(out)["runs"]["certify"]["lemmas"]["A2"]["verdict"] == "fail"


def test_certify_j2_refusal(tmp_path):
    out = tmp_path / "j2"
    cfg = write(tmp_path, "verify:\n  lemmas: [I2_J2]\n  box: 2.0\n"
                          "  params: {a: 1.0, m: 0.0, nu: 0.3, kappa: 2.5, p: 1.9}\n")
    assert main(["certify", cfg, "-o", str(out)]) == EXIT_VALIDATION
    err = json.loads((out / "errors.json").read_text())
    assert err["lemma_id"] == "I2_J2" and err["reasons"]


def test_certify_unknown_lemma(tmp_path):
    assert main(["certify", write(tmp_path, "verify:\n  lemmas: [Z9]\n"), "-o", str(tmp_path / "z")]) \
        == EXIT_VALIDATION


def test_sweep_theta_column(tmp_path):
    out = tmp_path / "sw"
    cfg = write(tmp_path, "scenario:\n  k: 2.4\nsweep:\n  command: scenario\n  grid: {p: [1.85, 1.9, 1.95]}\n")
    assert main(["sweep", cfg, "-o", str(out)]) == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert [r["status"] for r in rows] == ["ok", "ok", "ok"]
    # by hand: min(2(p-1) - 1, (k-1)p - 1, k - 2) = k - 2 = 0.4 for each p
    assert [float(r["theta"]) for r in rows] == [0.4, 0.4, 0.4]


def test_sweep_marks_invalid_rows(tmp_path):
    out = tmp_path / "sw"
    cfg = write(tmp_path, "sweep:\n  command: scenario\n  grid: {p: [1.7, 1.9]}\n")
    assert main(["sweep", cfg, "-o", str(out)]) == EXIT_OK
    rows = read_csv(out / "sweep.csv")
    assert rows[0]["status"] == "invalid" and "power_window" in rows[0]["detail"]
    assert rows[1]["status"] == "ok"


def test_single_row_sweep_matches_scatter(tmp_path):
    sw, sc = tmp_path / "sw", tmp_path / "sc"
    assert main(["sweep", write(tmp_path, FAST + "sweep:\n  grid: {p: [1.9]}\n"), "-o", str(sw)]) == EXIT_OK
    assert main(["scatter", write(tmp_path, FAST, "plain.yaml"), "-o", str(sc)]) == EXIT_OK
    row = read_csv(sw / "sweep.csv")[0]
    ref = manifest(sc)["runs"]["scatter"]
    assert float(row["theta_hat_plus"]) == ref["theta_hat_plus"]
    assert (sw / "row_000" / "decay.csv").read_bytes() == (sc / "decay.csv").read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "radscat", "dump-config"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "scenario:" in proc.stdout
