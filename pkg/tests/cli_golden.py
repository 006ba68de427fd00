"""Golden-file harness for the command line interface.

Each case runs one CLI invocation in process, strips the wall-time line,
and compares against a committed reference under tests/golden/. Regenerate
the references after an intentional output change with

    python3 tests/cli_golden.py
"""

from __future__ import annotations

import contextlib
import io
import os

from mlg import cli
from mlg.report import strip_timing

GOLDEN_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden")

# (golden file stem, expected exit code, argv)
CASES = [
    ("check_sigma1", 0, ["check", "--fixture", "sigma1"]),
    ("check_sigma2", 0, ["check", "--fixture", "sigma2"]),
    ("check_cubic_sl", 0, ["check", "--fixture", "cubic-sl"]),
    ("check_quadratic", 0, ["check", "--fixture", "quadratic"]),
    ("frame_sigma2", 0, ["frame", "--fixture", "sigma2", "--point", "1,0"]),
    ("frame_cubic_sl", 0, ["frame", "--fixture", "cubic-sl", "--point", "1,0"]),
    ("frame_quadratic", 0, ["frame", "--fixture", "quadratic"]),
    ("curvature_sigma2", 0, ["curvature", "--fixture", "sigma2"]),
    ("curvature_cubic_sl", 0, ["curvature", "--fixture", "cubic-sl"]),
    ("curvature_quadratic", 0, ["curvature", "--fixture", "quadratic"]),
    ("bochner_sigma2", 0, ["bochner", "--fixture", "sigma2"]),
    ("bochner_cubic_sl", 0, ["bochner", "--fixture", "cubic-sl"]),
    ("bochner_quadratic", 0, ["bochner", "--fixture", "quadratic"]),
    ("hypotheses_sigma2", 2, ["hypotheses", "--fixture", "sigma2"]),
    ("hypotheses_cubic_sl", 2, ["hypotheses", "--fixture", "cubic-sl"]),
    ("hypotheses_quadratic", 0, ["hypotheses", "--fixture", "quadratic"]),
    ("lewy_sigma2", 2, ["lewy", "--fixture", "sigma2"]),
    ("lewy_cubic_sl_quat", 2, ["lewy", "--fixture", "cubic-sl", "--mode", "quaternionic"]),
    ("lewy_quadratic", 0, ["lewy", "--fixture", "quadratic"]),
]


def run_cli(argv: list[str]):
    """Run the CLI in process; returns (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli.main(argv)
    return code, out.getvalue(), err.getvalue()


def golden_path(stem: str) -> str:
    return os.path.join(GOLDEN_DIR, stem + ".txt")


def regenerate() -> None:
    os.makedirs(GOLDEN_DIR, exist_ok=True)
    for stem, expected_code, argv in CASES:
        code, stdout, stderr = run_cli(argv)
        if code != expected_code:
            raise SystemExit(
                "case %s: exit code %d, expected %d\n%s" % (stem, code, expected_code, stderr)
            )
        with open(golden_path(stem), "w", encoding="utf-8") as fh:
            fh.write(strip_timing(stdout))
        print("wrote", golden_path(stem))


if __name__ == "__main__":
    regenerate()
