"""Third-order jets of scalar expressions.

`jet_eval` propagates (value, gradient, Hessian, third derivatives) through
the expression tree with truncated Taylor arithmetic, so derivatives are
exact to machine precision. `fd_jet` is an independent finite-difference
oracle (central stencils, one Richardson extrapolation level) used to
cross-check the jet arithmetic; production geometry never calls it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError
from .parser import Expr
from .kernels.tape import compile_expression


@dataclass
class Jet3:
    """Value and derivatives of a scalar field at one point.

    hess is symmetric and third is symmetric in all three indices, exactly:
    producers compute one canonical entry per index set and mirror it.
    """

    value: float
    grad: np.ndarray   # (n,)
    hess: np.ndarray   # (n, n)
    third: np.ndarray  # (n, n, n)

    @property
    def n(self) -> int:
        return self.grad.shape[0]

    def assert_symmetric(self) -> None:
        assert (self.hess == self.hess.T).all()
        t = self.third
        assert (t == np.transpose(t, (0, 2, 1))).all()
        assert (t == np.transpose(t, (1, 0, 2))).all()
        assert (t == np.transpose(t, (2, 1, 0))).all()


def eval_expr(e: Expr, x) -> float:
    """Evaluate the expression at one point.

    Raises DomainError when the evaluation leaves the real domain (log of a
    nonpositive value, division by zero, sqrt of a negative, overflow).
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if not np.isfinite(x).all():
        raise DomainError("evaluation point must be finite")
    tape = compile_expression(e, x.size)
    val, ok = kernels.value_batch(tape, x[None, :])
    if not ok[0]:
        raise DomainError("expression undefined at the given point")
    return float(val[0])


def eval_expr_batch(e: Expr, X: np.ndarray, n: int | None = None):
    """Vectorized expression values. Returns (values, ok) without raising."""
    X = np.asarray(X, dtype=np.float64)
    tape = compile_expression(e, X.shape[1] if n is None else n)
    return kernels.value_batch(tape, X)


def jet_eval(e: Expr, x) -> Jet3:
    """Exact 3-jet of the expression at one point."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    tape = compile_expression(e, x.size)
    val, grad, hess, third, ok = kernels.jet3_batch(tape, x[None, :])
    if not ok[0]:
        raise DomainError("jet undefined at the given point")
    jet = Jet3(float(val[0]), grad[0], hess[0], third[0])
    jet.assert_symmetric()
    return jet


def jet_eval_batch(e: Expr, X: np.ndarray, n: int | None = None):
    """Batched 3-jets: (val, grad, hess, third, ok) over rows of X."""
    X = np.asarray(X, dtype=np.float64)
    tape = compile_expression(e, X.shape[1] if n is None else n)
    return kernels.jet3_batch(tape, X)


def _fd_components(e: Expr, x: np.ndarray, eta: float):
    """Raw central-difference jet at step eta.

    All stencil evaluations are gathered into one batched call; offsets are
    tracked as integer multiples of eta so shared points are computed once.
    """
    n = x.size
    index: dict[tuple, int] = {}
    order: list[tuple] = []

    def at(*moves) -> int:
        off = [0] * n
        for axis, step in moves:
            off[axis] += step
        key = tuple(off)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    center = at()
    gi = [(at((i, 1)), at((i, -1))) for i in range(n)]
    cross = {}
    for i in range(n):
        for j in range(i + 1, n):
            cross[(i, j)] = (
                at((i, 1), (j, 1)),
                at((i, 1), (j, -1)),
                at((i, -1), (j, 1)),
                at((i, -1), (j, -1)),
            )

    def hess_stencil(base, j, k):
        """Index rows for the second-derivative stencil of axes (j,k),
        shifted by the offset list `base`."""
        if j == k:
            return [
                (1.0, at(*base, (j, 1))),
                (-2.0, at(*base)),
                (1.0, at(*base, (j, -1))),
            ]
        return [
            (0.25, at(*base, (j, 1), (k, 1))),
            (-0.25, at(*base, (j, 1), (k, -1))),
            (-0.25, at(*base, (j, -1), (k, 1))),
            (0.25, at(*base, (j, -1), (k, -1))),
        ]

    third_plan = {}
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                third_plan[(i, j, k)] = (
                    hess_stencil([(i, 1)], j, k),
                    hess_stencil([(i, -1)], j, k),
                )

    pts = x[None, :] + eta * np.asarray(order, dtype=np.float64)
    tape = compile_expression(e, n)
    f, ok = kernels.value_batch(tape, pts)
    if not ok.all():
        raise DomainError("finite-difference stencil leaves the expression domain")

    grad = np.empty(n)
    hess = np.empty((n, n))
    third = np.empty((n, n, n))
    for i in range(n):
        p, m = gi[i]
        grad[i] = (f[p] - f[m]) / (2.0 * eta)
        hess[i, i] = (f[p] - 2.0 * f[center] + f[m]) / (eta * eta)
    for (i, j), (pp, pm, mp, mm) in cross.items():
        v = (f[pp] - f[pm] - f[mp] + f[mm]) / (4.0 * eta * eta)
        hess[i, j] = v
        hess[j, i] = v
    for (i, j, k), (plus_rows, minus_rows) in third_plan.items():
        hp = sum(w * f[idx] for w, idx in plus_rows)
        hm = sum(w * f[idx] for w, idx in minus_rows)
        v = (hp - hm) / (2.0 * eta * eta * eta)
        for a, b, c in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
            third[a, b, c] = v
    return float(f[center]), grad, hess, third


def fd_jet(e: Expr, x, eta: float = 1e-3) -> Jet3:
    """Finite-difference 3-jet oracle.

    Central stencils have even error expansions, so one Richardson step over
    steps (eta, 2*eta) cancels the leading O(eta^2) truncation term:
    R = (4*T(eta) - T(2*eta)) / 3.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    val, g1, h1, t1 = _fd_components(e, x, eta)
    _, g2, h2, t2 = _fd_components(e, x, 2.0 * eta)
    jet = Jet3(
        val,
        (4.0 * g1 - g2) / 3.0,
        (4.0 * h1 - h2) / 3.0,
        (4.0 * t1 - t2) / 3.0,
    )
    jet.assert_symmetric()
    return jet
