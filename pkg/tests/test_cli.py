"""Exit codes, report layout, and file outputs of the command line tool."""

from __future__ import annotations

import csv
import os
import subprocess
import sys

import numpy as np
import pytest

from cli_golden import run_cli
from mlg.report import strip_timing

NONCOMMUTING = "n = 2\nu1 = x1*x2\nu2 = x1^2\nu3 = 0\n"
QUARTIC = "n = 2\nu1 = x1^4 + x2^4\ngrid = 7\n"
ZERO = "n = 2\nu1 = 0\n"


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_exit_zero_on_passing_fixture():
    code, out, err = run_cli(["check", "--fixture", "quadratic"])
    assert code == 0 and err == ""
    assert "exit_code = 0" in out
    assert "lagrangian_residual_general_sup" in out
    assert "[pass]" in out and "[fail]" not in out


def test_exit_two_on_failed_check(tmp_path):
    path = _write(tmp_path, "noncomm.def", NONCOMMUTING)
    code, out, err = run_cli(["check", "--def", path])
    assert code == 2 and err == ""
    assert "exit_code = 2" in out
    assert "[fail]" in out
    # every route must fail, each with its own witness
    assert out.count("witness") >= 3


def test_exit_one_on_usage_and_parse_errors(tmp_path):
    bad = _write(tmp_path, "bad.def", "n = 2\nu1 = x1 +\n")
    for argv in (
        ["check", "--def", bad],
        ["check", "--fixture", "nope"],
        ["check"],  # no source
        ["check", "--fixture", "sigma2", "--def", bad],  # both sources
        ["frame", "--fixture", "sigma1"],  # general map has no frame
        ["check", "--def", str(tmp_path / "missing.def")],
        ["frame", "--fixture", "sigma2", "--point", "1,2,3"],  # wrong arity
        ["lewy", "--fixture", "quadratic", "--mode", "imaginary"],
    ):
        code, out, err = run_cli(argv)
        assert code == 1, argv
        assert err.strip() != ""


def test_reports_are_deterministic():
    runs = [strip_timing(run_cli(["curvature", "--fixture", "quadratic"])[1]) for _ in range(2)]
    assert runs[0] == runs[1]


def test_out_file_replaces_stdout(tmp_path):
    target = str(tmp_path / "report.txt")
    code, out, err = run_cli(["check", "--fixture", "quadratic", "--out", target])
    assert code == 0 and out == "" and err == ""
    text = open(target, encoding="utf-8").read()
    assert text.startswith("mlg_report = ")
    assert "wall_time_s = " in text


def test_csv_dump_matches_grid(tmp_path):
    target = str(tmp_path / "grid.csv")
    code, _, _ = run_cli(["check", "--fixture", "quadratic", "--csv", target])
    assert code == 0
    with open(target, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["x1", "x2", "residual_general", "residual_commutator", "pullback_max"]
    assert len(rows) - 1 == 11 * 11
    vals = np.array([[float(c) for c in r] for r in rows[1:]])
    assert vals[:, 2:].max() <= 1e-9
    np.testing.assert_allclose(vals[0, :2], [-1.0, -1.0])


def test_frame_report_exact_values():
    code, out, _ = run_cli(["frame", "--fixture", "sigma2", "--point", "1,0"])
    assert code == 0
    assert "lambda_1 = [-6, -6, -6]" in out
    assert "lambda_2 = [6, 6, 6]" in out
    assert "normalizers = [10.4403065089, 10.4403065089]" in out
    assert "star_omega_spectral = 0.00917431192661" in out
    assert "star_omega_determinant = 0.00917431192661" in out
    assert all("e_%d = " % i in out for i in range(1, 9))


def test_lewy_flat_graph_transforms_to_minus_one(tmp_path):
    path = _write(tmp_path, "zero.def", ZERO)
    code, out, _ = run_cli(["lewy", "--def", path, "--c-bound", "0"])
    assert code == 0
    assert "h = 1" in out
    assert "transformed_min_eigenvalue = -1" in out
    assert "transformed_max_eigenvalue = -1" in out


def test_bochner_rejects_non_minimal_graph(tmp_path):
    path = _write(tmp_path, "quartic.def", QUARTIC)
    code, out, _ = run_cli(["bochner", "--def", path])
    assert code == 2
    assert "not_minimal_points" in out


def test_grid_and_eta_overrides(tmp_path):
    code, out, _ = run_cli(["check", "--fixture", "quadratic", "--grid", "5"])
    assert code == 0
    assert "points = 25" in out
    path = _write(tmp_path, "zero.def", ZERO)
    code, out, _ = run_cli(["curvature", "--def", path, "--eta", "0.002"])
    assert code == 0
    assert "eta = 0.002" in out


def test_csv_headers_per_command(tmp_path):
    expect = {
        "curvature": ["x1", "x2", "star_omega", "mean_curvature"],
        "hypotheses": ["x1", "x2", "margin_thm_32", "margin_cor_sij", "margin_cor_lambda_norm"],
        "lewy": [
            "x1",
            "x2",
            "min_eigenvalue",
            "max_eigenvalue",
            "transformed_min",
            "transformed_max",
        ],
    }
    for cmd, header in expect.items():
        target = str(tmp_path / (cmd + ".csv"))
        code, _, _ = run_cli([cmd, "--fixture", "quadratic", "--csv", target])
        assert code == 0, cmd
        with open(target, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == header, cmd
        assert len(rows) - 1 == 121, cmd


def test_help_mentions_defaults():
    with pytest.raises(SystemExit) as exc:
        run_cli(["--help"])
    assert exc.value.code == 0
    with pytest.raises(SystemExit) as exc:
        run_cli(["check", "--help"])
    assert exc.value.code == 0


def test_console_script_subprocess():
    # one end-to-end run through the installed entry point
    env = dict(os.environ, MLG_THREADS="2")
    proc = subprocess.run(
        [sys.executable, "-m", "mlg.cli", "check", "--fixture", "quadratic"],
        capture_output=True,
        text=True,
        env=env,
        timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert "exit_code = 0" in proc.stdout


def test_thread_cap_does_not_change_output():
    base = os.environ.get("MLG_THREADS")
    try:
        os.environ["MLG_THREADS"] = "1"
        one = strip_timing(run_cli(["bochner", "--fixture", "quadratic"])[1])
        os.environ["MLG_THREADS"] = "4"
        four = strip_timing(run_cli(["bochner", "--fixture", "quadratic"])[1])
    finally:
        if base is None:
            os.environ.pop("MLG_THREADS", None)
        else:
            os.environ["MLG_THREADS"] = base
    assert one == four
