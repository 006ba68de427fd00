"""Backend dispatch, numba/numpy parity, and the eigenvalue sweep kernels."""

from __future__ import annotations

import numpy as np
import pytest

from mlg import kernels
from mlg.kernels import _numpy_impl
from mlg.kernels.tape import compile_expression
from mlg.parser import parse

try:
    from mlg.kernels import _numba_impl

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")

PARITY_EXPRS = [
    ("x1^3 - 3*x1*x2^2", 2),
    ("sin(x1)*exp(x2) + tanh(x1*x2)", 2),
    ("log(2 + x1^2) / (1 + x2^2)", 2),
    ("sqrt(1 + x1^2 + x2^2 + x3^2)", 3),
    ("-x1^2 + 2^-2*x2", 2),
]


def test_active_backend_env(monkeypatch):
    monkeypatch.setenv("MLG_BACKEND", "numpy")
    assert kernels.active_backend() == "numpy"
    monkeypatch.setenv("MLG_BACKEND", "bogus")
    with pytest.raises(ValueError):
        kernels.active_backend()
    monkeypatch.delenv("MLG_BACKEND")
    assert kernels.active_backend() in ("numba", "numpy")


@needs_numba
def test_jet_backend_parity(monkeypatch):
    rng = np.random.default_rng(31415)
    for src, n in PARITY_EXPRS:
        tape = compile_expression(parse(src, n), n)
        X = rng.uniform(-0.9, 0.9, size=(64, n))
        monkeypatch.setenv("MLG_BACKEND", "numpy")
        v1, g1, h1, t1, ok1 = kernels.jet3_batch(tape, X)
        monkeypatch.setenv("MLG_BACKEND", "numba")
        v2, g2, h2, t2, ok2 = kernels.jet3_batch(tape, X)
        assert np.array_equal(ok1, ok2)
        np.testing.assert_allclose(v1, v2, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(g1, g2, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(h1, h2, rtol=1e-13, atol=1e-13)
        np.testing.assert_allclose(t1, t2, rtol=1e-13, atol=1e-13)


@needs_numba
def test_value_backend_parity_with_ok_mask(monkeypatch):
    tape = compile_expression(parse("log(x1)", 1), 1)
    X = np.array([[0.5], [-0.5], [2.0], [0.0]])
    monkeypatch.setenv("MLG_BACKEND", "numpy")
    v1, ok1 = kernels.value_batch(tape, X)
    monkeypatch.setenv("MLG_BACKEND", "numba")
    v2, ok2 = kernels.value_batch(tape, X)
    assert ok1.tolist() == ok2.tolist() == [True, False, True, False]
    np.testing.assert_allclose(v1[ok1], v2[ok2], rtol=1e-15)


def _min_eig_oracle_pair(lams):
    # reference route: assemble each symmetrized outer product and call eigvalsh
    P, n, _ = lams.shape
    out = np.full(P, np.inf)
    for p in range(P):
        for i in range(n):
            for j in range(n):
                S = 0.5 * (np.outer(lams[p, i], lams[p, j]) + np.outer(lams[p, j], lams[p, i]))
                out[p] = min(out[p], np.linalg.eigvalsh(S)[0])
    return out


def _min_eig_oracle_sum3(lams):
    P, n, _ = lams.shape
    out = np.full(P, np.inf)
    for p in range(P):
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    M = np.zeros((3, 3))
                    for a, b in ((i, j), (j, k), (k, i)):
                        M += 0.5 * (np.outer(lams[p, a], lams[p, b]) + np.outer(lams[p, b], lams[p, a]))
                    out[p] = min(out[p], np.linalg.eigvalsh(M)[0])
    return out


def test_min_eig_sweeps_match_eigvalsh_oracle():
    rng = np.random.default_rng(777)
    lams = rng.uniform(-1.5, 1.5, size=(30, 3, 3))
    np.testing.assert_allclose(
        kernels.min_eig_pair_sweep(lams), _min_eig_oracle_pair(lams), rtol=1e-12, atol=1e-12
    )
    np.testing.assert_allclose(
        kernels.min_eig_sum3_sweep(lams), _min_eig_oracle_sum3(lams), rtol=1e-12, atol=1e-12
    )


@needs_numba
def test_min_eig_sweep_backend_parity(monkeypatch):
    rng = np.random.default_rng(778)
    lams = rng.uniform(-2, 2, size=(50, 4, 3))
    monkeypatch.setenv("MLG_BACKEND", "numpy")
    a1, b1 = kernels.min_eig_pair_sweep(lams), kernels.min_eig_sum3_sweep(lams)
    monkeypatch.setenv("MLG_BACKEND", "numba")
    a2, b2 = kernels.min_eig_pair_sweep(lams), kernels.min_eig_sum3_sweep(lams)
    np.testing.assert_allclose(a1, a2, rtol=1e-13, atol=1e-13)
    np.testing.assert_allclose(b1, b2, rtol=1e-13, atol=1e-13)


def test_closed_form_eig3_against_eigvalsh():
    rng = np.random.default_rng(4242)
    A = rng.normal(size=(200, 3, 3))
    A = 0.5 * (A + np.transpose(A, (0, 2, 1)))
    mine = _numpy_impl._eig3_min(A)
    ref = np.linalg.eigvalsh(A)[:, 0]
    np.testing.assert_allclose(mine, ref, rtol=1e-12, atol=2e-13)


def test_map_chunks_order_and_thread_cap(monkeypatch):
    total = 1000
    out = np.zeros(total)

    def fill(lo, hi):
        out[lo:hi] = np.arange(lo, hi)

    monkeypatch.setenv("MLG_THREADS", "3")
    assert kernels.thread_cap() == 3
    kernels.map_chunks(fill, total, chunk=64)
    assert np.array_equal(out, np.arange(total))
    monkeypatch.setenv("MLG_THREADS", "1")
    out[:] = 0
    kernels.map_chunks(fill, total, chunk=64)
    assert np.array_equal(out, np.arange(total))


def test_forced_numba_without_numba_raises(monkeypatch):
    if HAVE_NUMBA:
        monkeypatch.setattr(kernels, "_HAVE_NUMBA", False)
    monkeypatch.setenv("MLG_BACKEND", "numba")
    with pytest.raises(RuntimeError):
        kernels.active_backend()
