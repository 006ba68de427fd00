"""Backend dispatch for the numerical kernels.

Two interchangeable implementations exist: a numba-compiled one and a pure
numpy one. `MLG_BACKEND` picks between them:

    auto   use numba when importable, else numpy (default)
    numba  require numba, error if missing
    numpy  force the pure-numpy path

The choice is read per call so test code can flip backends by setting the
environment variable. `MLG_THREADS` caps the worker threads used by
`map_chunks`, the fan-out helper for grid sweeps.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _numpy_impl
from .tape import Tape, compile_expression

try:
    from . import _numba_impl

    _HAVE_NUMBA = True
except ImportError:
    _numba_impl = None
    _HAVE_NUMBA = False

__all__ = [
    "Tape",
    "compile_expression",
    "active_backend",
    "jet3_batch",
    "value_batch",
    "min_eig_pair_sweep",
    "min_eig_sum3_sweep",
    "map_chunks",
    "thread_cap",
    "warmup",
]


def active_backend() -> str:
    """Resolve MLG_BACKEND to the backend name that calls will use."""
    choice = os.environ.get("MLG_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            "MLG_BACKEND must be one of auto|numba|numpy, got %r" % choice
        )
    if choice == "numpy":
        return "numpy"
    if not _HAVE_NUMBA:
        if choice == "numba":
            raise RuntimeError("MLG_BACKEND=numba but numba is not importable")
        return "numpy"
    return "numba"


def _as_points(X: np.ndarray, n: int) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != n:
        raise ValueError("expected points of shape (npts, %d), got %r" % (n, X.shape))
    return X


def jet3_batch(tape: Tape, X: np.ndarray):
    """Evaluate value, gradient, Hessian and third derivatives at each row of X.

    Returns (val, grad, hess, third, ok) with shapes (P,), (P,n), (P,n,n),
    (P,n,n,n), (P,). Rows with ok=False hit a domain violation; their
    numeric entries contain nan/inf and must not be consumed.
    """
    X = _as_points(X, tape.n)
    if active_backend() == "numba":
        return _numba_impl.jet3_batch(tape.ops, tape.arg1, tape.arg2, tape.consts, X)
    return _numpy_impl.jet3_batch(tape, X)


def value_batch(tape: Tape, X: np.ndarray):
    """Evaluate the expression value only. Returns (val, ok)."""
    X = _as_points(X, tape.n)
    if active_backend() == "numba":
        return _numba_impl.value_batch(tape.ops, tape.arg1, tape.arg2, tape.consts, X)
    return _numpy_impl.value_batch(tape, X)


def min_eig_pair_sweep(lams: np.ndarray) -> np.ndarray:
    """For eigenvalue triples lams (P,n,3): min over pairs (i,j) of the
    smallest eigenvalue of S_ij = (Lambda_i^T Lambda_j + Lambda_j^T Lambda_i)/2
    where Lambda_i = diag(lams[p,i,:])."""
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    if active_backend() == "numba":
        return _numba_impl.min_eig_pair_sweep(lams)
    return _numpy_impl.min_eig_pair_sweep(lams)


def min_eig_sum3_sweep(lams: np.ndarray) -> np.ndarray:
    """Min over triples (i,j,k) of the smallest eigenvalue of S_ij+S_jk+S_ki."""
    lams = np.ascontiguousarray(lams, dtype=np.float64)
    if active_backend() == "numba":
        return _numba_impl.min_eig_sum3_sweep(lams)
    return _numpy_impl.min_eig_sum3_sweep(lams)


def thread_cap() -> int:
    raw = os.environ.get("MLG_THREADS", "").strip()
    if raw:
        cap = int(raw)
        if cap < 1:
            raise ValueError("MLG_THREADS must be a positive integer")
        return cap
    return min(8, os.cpu_count() or 1)


def map_chunks(fn, total: int, chunk: int = 2048):
    """Apply fn(lo, hi) over [0, total) in chunks, fanning out across worker
    threads, and return the results as a list in deterministic index order."""
    spans = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    workers = min(thread_cap(), max(len(spans), 1))
    if workers <= 1 or len(spans) <= 1:
        return [fn(lo, hi) for lo, hi in spans]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda span: fn(span[0], span[1]), spans))


def warmup() -> None:
    """Force numba compilation up front so timed runs measure steady state."""
    if active_backend() != "numba":
        return
    from .tape import OP_SIN, OP_VAR

    ops = np.array([OP_VAR, OP_SIN], dtype=np.int64)
    arg1 = np.array([0, 0], dtype=np.int64)
    arg2 = np.array([-1, -1], dtype=np.int64)
    consts = np.array([0.0, 0.0], dtype=np.float64)
    X = np.ones((2, 1))
    _numba_impl.jet3_batch(ops, arg1, arg2, consts, X)
    _numba_impl.value_batch(ops, arg1, arg2, consts, X)
    lams = np.ones((1, 2, 3))
    _numba_impl.min_eig_pair_sweep(lams)
    _numba_impl.min_eig_sum3_sweep(lams)
