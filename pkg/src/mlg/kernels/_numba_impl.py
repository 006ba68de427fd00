"""Numba backend: serial loop over points, canonical-triangle jet slots.

Compiled under error_model='numpy' so domain violations produce nan/inf
(reported via the ok mask) instead of raising inside nopython code.
Semantics match _numpy_impl bit-for-bit up to summation order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .tape import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_POW,
    OP_RECIP,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_TANH,
    OP_VAR,
)


@njit(cache=True, nogil=True, error_model="numpy")
def _unary_d(op, x):
    if op == OP_SIN:
        s = np.sin(x)
        c = np.cos(x)
        return s, c, -s, -c
    if op == OP_COS:
        s = np.sin(x)
        c = np.cos(x)
        return c, -s, -c, s
    if op == OP_EXP:
        e = np.exp(x)
        return e, e, e, e
    if op == OP_LOG:
        inv = 1.0 / x
        return np.log(x), inv, -inv * inv, 2.0 * inv * inv * inv
    if op == OP_SQRT:
        r = np.sqrt(x)
        inv = 1.0 / r
        return r, 0.5 * inv, -0.25 * inv / x, 0.375 * inv / (x * x)
    if op == OP_TANH:
        t = np.tanh(x)
        s2 = 1.0 - t * t
        return t, s2, -2.0 * t * s2, s2 * (6.0 * t * t - 2.0)
    inv = 1.0 / x
    inv2 = inv * inv
    return inv, -inv2, 2.0 * inv2 * inv, -6.0 * inv2 * inv2


@njit(cache=True, nogil=True, error_model="numpy")
def _pow_d(x, p):
    d0 = x**p
    d1 = 0.0 if p == 0.0 else p * x ** (p - 1.0)
    c2 = p * (p - 1.0)
    d2 = 0.0 if c2 == 0.0 else c2 * x ** (p - 2.0)
    c3 = c2 * (p - 2.0)
    d3 = 0.0 if c3 == 0.0 else c3 * x ** (p - 3.0)
    return d0, d1, d2, d3


@njit(cache=True, nogil=True, error_model="numpy")
def jet3_batch(ops, arg1, arg2, consts, X):
    npts, n = X.shape
    m = ops.shape[0]
    out_v = np.empty(npts)
    out_g = np.empty((npts, n))
    out_h = np.empty((npts, n, n))
    out_t = np.empty((npts, n, n, n))
    ok = np.empty(npts, np.bool_)
    v = np.empty(m)
    g = np.empty((m, n))
    h = np.empty((m, n, n))
    t3 = np.empty((m, n, n, n))
    for pt in range(npts):
        for s in range(m):
            op = ops[s]
            a = arg1[s]
            b = arg2[s]
            if op == OP_CONST or op == OP_VAR:
                v[s] = consts[s] if op == OP_CONST else X[pt, a]
                for i in range(n):
                    g[s, i] = 1.0 if (op == OP_VAR and i == a) else 0.0
                    for j in range(i, n):
                        h[s, i, j] = 0.0
                        for k in range(j, n):
                            t3[s, i, j, k] = 0.0
            elif op == OP_ADD or op == OP_SUB:
                sg = 1.0 if op == OP_ADD else -1.0
                v[s] = v[a] + sg * v[b]
                for i in range(n):
                    g[s, i] = g[a, i] + sg * g[b, i]
                    for j in range(i, n):
                        h[s, i, j] = h[a, i, j] + sg * h[b, i, j]
                        for k in range(j, n):
                            t3[s, i, j, k] = t3[a, i, j, k] + sg * t3[b, i, j, k]
            elif op == OP_MUL:
                v[s] = v[a] * v[b]
                for i in range(n):
                    g[s, i] = g[a, i] * v[b] + v[a] * g[b, i]
                for i in range(n):
                    for j in range(i, n):
                        h[s, i, j] = (
                            h[a, i, j] * v[b]
                            + v[a] * h[b, i, j]
                            + g[a, i] * g[b, j]
                            + g[a, j] * g[b, i]
                        )
                        for k in range(j, n):
                            t3[s, i, j, k] = (
                                t3[a, i, j, k] * v[b]
                                + v[a] * t3[b, i, j, k]
                                + h[a, i, j] * g[b, k]
                                + h[a, i, k] * g[b, j]
                                + h[a, j, k] * g[b, i]
                                + g[a, i] * h[b, j, k]
                                + g[a, j] * h[b, i, k]
                                + g[a, k] * h[b, i, j]
                            )
            elif op == OP_NEG:
                v[s] = -v[a]
                for i in range(n):
                    g[s, i] = -g[a, i]
                    for j in range(i, n):
                        h[s, i, j] = -h[a, i, j]
                        for k in range(j, n):
                            t3[s, i, j, k] = -t3[a, i, j, k]
            else:
                if op == OP_POW:
                    d0, d1, d2, d3 = _pow_d(v[a], consts[s])
                else:
                    d0, d1, d2, d3 = _unary_d(op, v[a])
                v[s] = d0
                for i in range(n):
                    g[s, i] = d1 * g[a, i]
                for i in range(n):
                    for j in range(i, n):
                        h[s, i, j] = d2 * g[a, i] * g[a, j] + d1 * h[a, i, j]
                        for k in range(j, n):
                            t3[s, i, j, k] = (
                                d3 * g[a, i] * g[a, j] * g[a, k]
                                + d2
                                * (
                                    h[a, i, j] * g[a, k]
                                    + h[a, i, k] * g[a, j]
                                    + h[a, j, k] * g[a, i]
                                )
                                + d1 * t3[a, i, j, k]
                            )
        top = m - 1
        fin = np.isfinite(v[top])
        out_v[pt] = v[top]
        for i in range(n):
            out_g[pt, i] = g[top, i]
            fin = fin and np.isfinite(g[top, i])
            for j in range(i, n):
                hv = h[top, i, j]
                out_h[pt, i, j] = hv
                out_h[pt, j, i] = hv
                fin = fin and np.isfinite(hv)
                for k in range(j, n):
                    tv = t3[top, i, j, k]
                    out_t[pt, i, j, k] = tv
                    out_t[pt, i, k, j] = tv
                    out_t[pt, j, i, k] = tv
                    out_t[pt, j, k, i] = tv
                    out_t[pt, k, i, j] = tv
                    out_t[pt, k, j, i] = tv
                    fin = fin and np.isfinite(tv)
        ok[pt] = fin
    return out_v, out_g, out_h, out_t, ok


@njit(cache=True, nogil=True, error_model="numpy")
def value_batch(ops, arg1, arg2, consts, X):
    npts = X.shape[0]
    m = ops.shape[0]
    val = np.empty(npts)
    ok = np.empty(npts, np.bool_)
    slots = np.empty(m)
    for pt in range(npts):
        for s in range(m):
            op = ops[s]
            a = arg1[s]
            if op == OP_CONST:
                slots[s] = consts[s]
            elif op == OP_VAR:
                slots[s] = X[pt, a]
            elif op == OP_ADD:
                slots[s] = slots[a] + slots[arg2[s]]
            elif op == OP_SUB:
                slots[s] = slots[a] - slots[arg2[s]]
            elif op == OP_MUL:
                slots[s] = slots[a] * slots[arg2[s]]
            elif op == OP_NEG:
                slots[s] = -slots[a]
            elif op == OP_SIN:
                slots[s] = np.sin(slots[a])
            elif op == OP_COS:
                slots[s] = np.cos(slots[a])
            elif op == OP_EXP:
                slots[s] = np.exp(slots[a])
            elif op == OP_LOG:
                slots[s] = np.log(slots[a])
            elif op == OP_SQRT:
                slots[s] = np.sqrt(slots[a])
            elif op == OP_TANH:
                slots[s] = np.tanh(slots[a])
            elif op == OP_RECIP:
                slots[s] = 1.0 / slots[a]
            else:
                slots[s] = slots[a] ** consts[s]
        val[pt] = slots[m - 1]
        ok[pt] = np.isfinite(slots[m - 1])
    return val, ok


@njit(cache=True, nogil=True)
def _eig3_min(a00, a11, a22, a01, a02, a12):
    q = (a00 + a11 + a22) / 3.0
    d0 = a00 - q
    d1 = a11 - q
    d2 = a22 - q
    p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * (a01 * a01 + a02 * a02 + a12 * a12)
    if p2 <= 0.0:
        return q
    p = np.sqrt(p2 / 6.0)
    b00 = d0 / p
    b11 = d1 / p
    b22 = d2 / p
    b01 = a01 / p
    b02 = a02 / p
    b12 = a12 / p
    detb = (
        b00 * (b11 * b22 - b12 * b12)
        - b01 * (b01 * b22 - b12 * b02)
        + b02 * (b01 * b12 - b11 * b02)
    )
    r = detb / 2.0
    if r < -1.0:
        r = -1.0
    elif r > 1.0:
        r = 1.0
    phi = np.arccos(r) / 3.0
    return q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)


@njit(cache=True, nogil=True)
def min_eig_pair_sweep(lams):
    npts, n, _ = lams.shape
    out = np.empty(npts)
    for pt in range(npts):
        best = np.inf
        for i in range(n):
            for j in range(n):
                s00 = lams[pt, i, 0] * lams[pt, j, 0]
                s11 = lams[pt, i, 1] * lams[pt, j, 1]
                s22 = lams[pt, i, 2] * lams[pt, j, 2]
                s01 = 0.5 * (lams[pt, i, 0] * lams[pt, j, 1] + lams[pt, i, 1] * lams[pt, j, 0])
                s02 = 0.5 * (lams[pt, i, 0] * lams[pt, j, 2] + lams[pt, i, 2] * lams[pt, j, 0])
                s12 = 0.5 * (lams[pt, i, 1] * lams[pt, j, 2] + lams[pt, i, 2] * lams[pt, j, 1])
                lm = _eig3_min(s00, s11, s22, s01, s02, s12)
                if lm < best:
                    best = lm
        out[pt] = best
    return out


@njit(cache=True, nogil=True)
def min_eig_sum3_sweep(lams):
    npts, n, _ = lams.shape
    out = np.empty(npts)
    S = np.empty((n, n, 6))
    for pt in range(npts):
        for i in range(n):
            for j in range(n):
                S[i, j, 0] = lams[pt, i, 0] * lams[pt, j, 0]
                S[i, j, 1] = lams[pt, i, 1] * lams[pt, j, 1]
                S[i, j, 2] = lams[pt, i, 2] * lams[pt, j, 2]
                S[i, j, 3] = 0.5 * (lams[pt, i, 0] * lams[pt, j, 1] + lams[pt, i, 1] * lams[pt, j, 0])
                S[i, j, 4] = 0.5 * (lams[pt, i, 0] * lams[pt, j, 2] + lams[pt, i, 2] * lams[pt, j, 0])
                S[i, j, 5] = 0.5 * (lams[pt, i, 1] * lams[pt, j, 2] + lams[pt, i, 2] * lams[pt, j, 1])
        best = np.inf
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    lm = _eig3_min(
                        S[i, j, 0] + S[j, k, 0] + S[k, i, 0],
                        S[i, j, 1] + S[j, k, 1] + S[k, i, 1],
                        S[i, j, 2] + S[j, k, 2] + S[k, i, 2],
                        S[i, j, 3] + S[j, k, 3] + S[k, i, 3],
                        S[i, j, 4] + S[j, k, 4] + S[k, i, 4],
                        S[i, j, 5] + S[j, k, 5] + S[k, i, 5],
                    )
                    if lm < best:
                        best = lm
        out[pt] = best
    return out
