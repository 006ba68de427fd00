"""Timing comparison of the numba and numpy kernel backends.

Runs the three hot kernels (third-order jet evaluation, the pair and
triple eigenvalue sweeps) and one end-to-end grid command under each
backend and prints a table of wall times with the speedup factor.

    python3 benchmarks/bench_backends.py [--points N] [--repeats R]
"""

from __future__ import annotations

import argparse
import os
import time

import numpy as np

from mlg import cli, kernels
from mlg.parser import parse

EXPR = "x1^3 - 3*x1*x2^2 + exp(0.3*x1)*sin(x2) + 1/(2 + x1^2 + x2^2)"


def _time(fn, repeats: int) -> float:
    fn()  # prime: lazy compilation and caches must not land in the timing
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _run_suite(points: int, repeats: int, rng: np.random.Generator) -> dict:
    tape = kernels.compile_expression(parse(EXPR, 2), 2)
    X = rng.uniform(-1.0, 1.0, size=(points, 2))
    lams = rng.uniform(-1.5, 1.5, size=(points, 4, 3))
    timings = {
        "jet3_batch": _time(lambda: kernels.jet3_batch(tape, X), repeats),
        "value_batch": _time(lambda: kernels.value_batch(tape, X), repeats),
        "min_eig_pair_sweep": _time(lambda: kernels.min_eig_pair_sweep(lams), repeats),
        "min_eig_sum3_sweep": _time(lambda: kernels.min_eig_sum3_sweep(lams), repeats),
    }

    def grid_command():
        import contextlib, io

        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            cli.main(["curvature", "--fixture", "sigma2"])

    timings["cli curvature sigma2"] = _time(grid_command, max(1, repeats // 3))
    return timings


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=200_000, help="batch size (default 200000)")
    ap.add_argument("--repeats", type=int, default=3, help="timing repeats, best-of (default 3)")
    args = ap.parse_args()

    results = {}
    for backend in ("numba", "numpy"):
        os.environ["MLG_BACKEND"] = backend
        if kernels.active_backend() != backend:
            print("backend %r unavailable, skipping" % backend)
            continue
        kernels.warmup()
        rng = np.random.default_rng(2024)
        results[backend] = _run_suite(args.points, args.repeats, rng)
    os.environ.pop("MLG_BACKEND", None)

    if not results:
        raise SystemExit("no backend available")
    names = list(next(iter(results.values())))
    width = max(len(n) for n in names)
    header = "%-*s" % (width, "kernel")
    for backend in results:
        header += "  %12s" % backend
    if len(results) == 2:
        header += "  %9s" % "speedup"
    print(header)
    print("-" * len(header))
    for name in names:
        row = "%-*s" % (width, name)
        for backend in results:
            row += "  %10.3fms" % (results[backend][name] * 1e3)
        if len(results) == 2:
            row += "  %8.1fx" % (results["numpy"][name] / results["numba"][name])
        print(row)


if __name__ == "__main__":
    main()
