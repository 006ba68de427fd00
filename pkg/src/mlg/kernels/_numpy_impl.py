"""Pure-numpy backend: vectorized over sample points, chunked to bound memory.

Each tape slot holds the full 3-jet of its subexpression for a chunk of
points. Domain violations (log of nonpositive, division by zero, overflow)
surface as non-finite entries and are reported through the `ok` mask.
"""

from __future__ import annotations

import numpy as np

from . import tape as T

_CHUNK_BUDGET = 4_000_000  # floats of slot storage per chunk


def _chunk_size(nslots: int, n: int) -> int:
    per_point = nslots * (1 + n + n * n + n * n * n)
    return max(16, _CHUNK_BUDGET // max(per_point, 1))


def _pow_factors(v: np.ndarray, p: float, order: int) -> np.ndarray:
    """coef * v**(p-order) with the coefficient-zero guard (avoids 0*inf)."""
    coef = 1.0
    for k in range(order):
        coef *= p - k
    if coef == 0.0:
        return np.zeros_like(v)
    return coef * v ** (p - order)


def _chain(order3, fv, fg, fh, ft, d0, d1, d2, d3):
    """Unary chain rule through phi with derivatives d0..d3 at f's value."""
    val = d0
    grad = d1[:, None] * fg
    hess = d2[:, None, None] * fg[:, :, None] * fg[:, None, :] + d1[:, None, None] * fh
    if not order3:
        return val, grad, hess, None
    gg = fg[:, :, None, None] * fg[:, None, :, None] * fg[:, None, None, :]
    cross = (
        fh[:, :, :, None] * fg[:, None, None, :]
        + fh[:, :, None, :] * fg[:, None, :, None]
        + fh[:, None, :, :] * fg[:, :, None, None]
    )
    third = d3[:, None, None, None] * gg + d2[:, None, None, None] * cross + d1[:, None, None, None] * ft
    return val, grad, hess, third


def _product(order3, av, ag, ah, at, bv, bg, bh, bt):
    """Leibniz rule for a*b truncated at order 3."""
    val = av * bv
    grad = ag * bv[:, None] + av[:, None] * bg
    hess = (
        ah * bv[:, None, None]
        + av[:, None, None] * bh
        + ag[:, :, None] * bg[:, None, :]
        + ag[:, None, :] * bg[:, :, None]
    )
    if not order3:
        return val, grad, hess, None
    third = (
        at * bv[:, None, None, None]
        + av[:, None, None, None] * bt
        + ah[:, :, :, None] * bg[:, None, None, :]
        + ah[:, :, None, :] * bg[:, None, :, None]
        + ah[:, None, :, :] * bg[:, :, None, None]
        + ag[:, :, None, None] * bh[:, None, :, :]
        + ag[:, None, :, None] * bh[:, :, None, :]
        + ag[:, None, None, :] * bh[:, :, :, None]
    )
    return val, grad, hess, third


def _unary_derivs(op: int, v: np.ndarray):
    if op == T.OP_SIN:
        s, c = np.sin(v), np.cos(v)
        return s, c, -s, -c
    if op == T.OP_COS:
        s, c = np.sin(v), np.cos(v)
        return c, -s, -c, s
    if op == T.OP_EXP:
        e = np.exp(v)
        return e, e, e, e
    if op == T.OP_LOG:
        inv = 1.0 / v
        return np.log(v), inv, -(inv * inv), 2.0 * inv * inv * inv
    if op == T.OP_SQRT:
        r = np.sqrt(v)
        inv = 1.0 / r
        return r, 0.5 * inv, -0.25 * inv / v, 0.375 * inv / (v * v)
    if op == T.OP_TANH:
        t = np.tanh(v)
        sech2 = 1.0 - t * t
        return t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0)
    assert op == T.OP_RECIP
    inv = 1.0 / v
    inv2 = inv * inv
    return inv, -inv2, 2.0 * inv2 * inv, -6.0 * inv2 * inv2


def _run_chunk(tape: T.Tape, X: np.ndarray, order3: bool):
    npts, n = X.shape
    m = tape.size
    val = np.empty((m, npts))
    grad = np.zeros((m, npts, n))
    hess = np.zeros((m, npts, n, n))
    third = np.zeros((m, npts, n, n, n)) if order3 else [None] * m
    for t in range(m):
        op = int(tape.ops[t])
        a = int(tape.arg1[t])
        b = int(tape.arg2[t])
        if op == T.OP_CONST:
            val[t] = tape.consts[t]
        elif op == T.OP_VAR:
            val[t] = X[:, a]
            grad[t][:, a] = 1.0
        elif op == T.OP_ADD or op == T.OP_SUB:
            sign = 1.0 if op == T.OP_ADD else -1.0
            val[t] = val[a] + sign * val[b]
            grad[t] = grad[a] + sign * grad[b]
            hess[t] = hess[a] + sign * hess[b]
            if order3:
                third[t] = third[a] + sign * third[b]
        elif op == T.OP_MUL:
            v, g, h, tt = _product(order3, val[a], grad[a], hess[a], third[a], val[b], grad[b], hess[b], third[b])
            val[t], grad[t], hess[t] = v, g, h
            if order3:
                third[t] = tt
        elif op == T.OP_NEG:
            val[t] = -val[a]
            grad[t] = -grad[a]
            hess[t] = -hess[a]
            if order3:
                third[t] = -third[a]
        elif op == T.OP_POW:
            p = float(tape.consts[t])
            v = val[a]
            d0 = v**p
            d1 = _pow_factors(v, p, 1)
            d2 = _pow_factors(v, p, 2)
            d3 = _pow_factors(v, p, 3) if order3 else None
            vv, g, h, tt = _chain(order3, val[a], grad[a], hess[a], third[a], d0, d1, d2, d3)
            val[t], grad[t], hess[t] = vv, g, h
            if order3:
                third[t] = tt
        else:
            d0, d1, d2, d3 = _unary_derivs(op, val[a])
            vv, g, h, tt = _chain(order3, val[a], grad[a], hess[a], third[a], d0, d1, d2, d3)
            val[t], grad[t], hess[t] = vv, g, h
            if order3:
                third[t] = tt
    top = m - 1
    return val[top], grad[top], hess[top], third[top] if order3 else None


def _symmetrize(hess: np.ndarray, third: np.ndarray | None):
    """Mirror the canonical i<=j(<=k) entries so symmetry holds exactly."""
    n = hess.shape[-1]
    for i in range(n):
        for j in range(i + 1, n):
            hess[:, j, i] = hess[:, i, j]
    if third is None:
        return
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                v = third[:, i, j, k]
                third[:, i, k, j] = v
                third[:, j, i, k] = v
                third[:, j, k, i] = v
                third[:, k, i, j] = v
                third[:, k, j, i] = v


def jet3_batch(tape: T.Tape, X: np.ndarray):
    npts, n = X.shape
    val = np.empty(npts)
    grad = np.empty((npts, n))
    hess = np.empty((npts, n, n))
    third = np.empty((npts, n, n, n))
    ok = np.empty(npts, dtype=bool)
    step = _chunk_size(tape.size, n)
    with np.errstate(all="ignore"):
        for lo in range(0, npts, step):
            hi = min(lo + step, npts)
            v, g, h, t = _run_chunk(tape, X[lo:hi], order3=True)
            _symmetrize(h, t)
            val[lo:hi], grad[lo:hi], hess[lo:hi], third[lo:hi] = v, g, h, t
            ok[lo:hi] = (
                np.isfinite(v)
                & np.isfinite(g).all(axis=1)
                & np.isfinite(h).all(axis=(1, 2))
                & np.isfinite(t).all(axis=(1, 2, 3))
            )
    return val, grad, hess, third, ok


def value_batch(tape: T.Tape, X: np.ndarray):
    npts, n = X.shape
    m = tape.size
    val = np.empty(npts)
    ok = np.empty(npts, dtype=bool)
    step = max(256, _CHUNK_BUDGET // max(m, 1))
    with np.errstate(all="ignore"):
        for lo in range(0, npts, step):
            hi = min(lo + step, npts)
            Xc = X[lo:hi]
            slots = np.empty((m, hi - lo))
            for t in range(m):
                op = int(tape.ops[t])
                a = int(tape.arg1[t])
                b = int(tape.arg2[t])
                if op == T.OP_CONST:
                    slots[t] = tape.consts[t]
                elif op == T.OP_VAR:
                    slots[t] = Xc[:, a]
                elif op == T.OP_ADD:
                    slots[t] = slots[a] + slots[b]
                elif op == T.OP_SUB:
                    slots[t] = slots[a] - slots[b]
                elif op == T.OP_MUL:
                    slots[t] = slots[a] * slots[b]
                elif op == T.OP_NEG:
                    slots[t] = -slots[a]
                elif op == T.OP_SIN:
                    slots[t] = np.sin(slots[a])
                elif op == T.OP_COS:
                    slots[t] = np.cos(slots[a])
                elif op == T.OP_EXP:
                    slots[t] = np.exp(slots[a])
                elif op == T.OP_LOG:
                    slots[t] = np.log(slots[a])
                elif op == T.OP_SQRT:
                    slots[t] = np.sqrt(slots[a])
                elif op == T.OP_TANH:
                    slots[t] = np.tanh(slots[a])
                elif op == T.OP_RECIP:
                    slots[t] = 1.0 / slots[a]
                else:
                    slots[t] = slots[a] ** tape.consts[t]
            val[lo:hi] = slots[m - 1]
            ok[lo:hi] = np.isfinite(slots[m - 1])
    return val, ok


def _eig3_min(A: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of a stack (..., 3, 3) of symmetric matrices.

    Closed-form characteristic cubic (trigonometric solution), vectorized.
    """
    q = (A[..., 0, 0] + A[..., 1, 1] + A[..., 2, 2]) / 3.0
    d0 = A[..., 0, 0] - q
    d1 = A[..., 1, 1] - q
    d2 = A[..., 2, 2] - q
    off = A[..., 0, 1] ** 2 + A[..., 0, 2] ** 2 + A[..., 1, 2] ** 2
    p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * off
    p = np.sqrt(p2 / 6.0)
    safe = np.where(p > 0.0, p, 1.0)
    b00, b11, b22 = d0 / safe, d1 / safe, d2 / safe
    b01, b02, b12 = A[..., 0, 1] / safe, A[..., 0, 2] / safe, A[..., 1, 2] / safe
    detb = (
        b00 * (b11 * b22 - b12 * b12)
        - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02)
    )
    r = np.clip(detb / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    lam_min = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return np.where(p2 > 0.0, lam_min, q)


def _pair_s_matrices(lams: np.ndarray) -> np.ndarray:
    outer = np.einsum("pia,pjb->pijab", lams, lams)
    return 0.5 * (outer + np.swapaxes(outer, 3, 4))


def min_eig_pair_sweep(lams: np.ndarray) -> np.ndarray:
    """Per point: min over ordered pairs (i,j) of lambda_min(S_ij)."""
    out = np.empty(lams.shape[0])
    step = max(1, 2_000_000 // (9 * lams.shape[1] ** 2))
    for lo in range(0, lams.shape[0], step):
        S = _pair_s_matrices(lams[lo : lo + step])
        out[lo : lo + step] = _eig3_min(S).min(axis=(1, 2))
    return out


def min_eig_sum3_sweep(lams: np.ndarray) -> np.ndarray:
    """Per point: min over ordered triples (i,j,k) of lambda_min(S_ij+S_jk+S_ki)."""
    out = np.empty(lams.shape[0])
    n = lams.shape[1]
    step = max(1, 2_000_000 // (9 * n**3))
    for lo in range(0, lams.shape[0], step):
        S = _pair_s_matrices(lams[lo : lo + step])
        M = S[:, :, :, None] + S[:, None, :, :] + np.swapaxes(S, 1, 2)[:, :, None, :]
        out[lo : lo + step] = _eig3_min(M).min(axis=(1, 2, 3))
    return out
