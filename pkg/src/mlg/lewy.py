"""Rotations that trade a Hessian lower bound for a two-sided bound.

Given Hess(u) >= -C I, a rotation of the graph plane with parameter h
produces a new parametrization (xbar, ybar) that is again a gradient
graph, with Hessian eigenvalues transformed by a monotone Moebius map.
Choosing the closed-form h makes the transformed bound symmetric:

  complex mode        h = C + sqrt(C^2 + 1)
      xbar = (h x + grad u)/sqrt(1+h^2)
      ybar = (-x + h grad u)/sqrt(1+h^2)
      Hess(ubar) = (h I + Hess u)^{-1} (-I + h Hess u)
      eigenvalue map  t -> (-1 + h t)/(h + t),  range [-h, h)

  quaternionic mode   h = sqrt(3) C + sqrt(3 C^2 + 1)
      xbar = (h x + sqrt(3) grad u)/sqrt(1+h^2)
      ybar = (-x/sqrt(3) + h grad u)/sqrt(1+h^2)
      Hess(ubar) = (h I + sqrt(3) Hess u)^{-1} (-(1/sqrt(3)) I + h Hess u)
      eigenvalue map  t -> (-1/sqrt(3) + h t)/(h + sqrt(3) t),
      range [-h/sqrt(3), h/sqrt(3))

The quaternionic rotation extends to an orthogonal map of R^{4n} given by
n copies of a 4x4 block D; applied to embedded points (x, g, g, g) it
produces (xbar, ybar, ybar, ybar), so one ybar suffices.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .errors import BoundViolated, DomainError, NegativeC
from .jets import jet_eval_batch

MODE_COMPLEX = "complex"
MODE_QUATERNIONIC = "quaternionic"
_SQRT3 = sqrt(3.0)
_BOUND_TOL = 1e-10


@dataclass(frozen=True)
class LewyParams:
    mode: str
    C: float
    h: float
    a: float  # rotation entry h/sqrt(1+h^2)
    b: float  # rotation entry; complex 1/sqrt(1+h^2), quaternionic 1/(sqrt(3) sqrt(1+h^2))

    @property
    def transformed_bound(self) -> float:
        """Symmetric eigenvalue bound of the transformed Hessian."""
        if self.mode == MODE_COMPLEX:
            return self.h
        return self.h / _SQRT3

    @property
    def jacobian_lower_bound(self) -> float:
        """Lower bound on the squared singular values of dxbar/dx, hence the
        injectivity constant |xbar1-xbar2|^2 >= bound * |x1-x2|^2."""
        if self.mode == MODE_COMPLEX:
            return (self.h - self.C) ** 2 / (1.0 + self.h**2)
        return (self.h - _SQRT3 * self.C) ** 2 / (1.0 + self.h**2)

    def fixed_point_residual(self) -> float:
        """Defect of the defining equation for the closed-form h."""
        if self.mode == MODE_COMPLEX:
            return abs(self.h - (1.0 + self.h * self.C) / (self.h - self.C))
        return abs(
            self.h / _SQRT3
            - (1.0 / _SQRT3 + self.h * self.C) / (self.h - _SQRT3 * self.C)
        )


def lewy_params(mode: str, C: float) -> LewyParams:
    """Closed-form rotation parameters for a given lower-bound constant."""
    if mode not in (MODE_COMPLEX, MODE_QUATERNIONIC):
        raise ValueError("mode must be 'complex' or 'quaternionic', got %r" % mode)
    C = float(C)
    if not C >= 0.0:
        raise NegativeC("lower-bound constant C must be nonnegative, got %g" % C)
    if mode == MODE_COMPLEX:
        h = C + sqrt(C * C + 1.0)
        b = 1.0 / sqrt(1.0 + h * h)
    else:
        h = _SQRT3 * C + sqrt(3.0 * C * C + 1.0)
        b = 1.0 / (_SQRT3 * sqrt(1.0 + h * h))
    a = h / sqrt(1.0 + h * h)
    return LewyParams(mode=mode, C=C, h=h, a=a, b=b)


def mobius_eigenvalues(params: LewyParams, eigs) -> np.ndarray:
    """Transformed Hessian eigenvalues (the scalar route)."""
    t = np.asarray(eigs, dtype=np.float64)
    h = params.h
    if params.mode == MODE_COMPLEX:
        return (-1.0 + h * t) / (h + t)
    return (-1.0 / _SQRT3 + h * t) / (h + _SQRT3 * t)


@dataclass
class TransformedPoint:
    xbar: np.ndarray
    ybar: np.ndarray
    hess_ubar: np.ndarray
    jacobian_lower_bound: float


def _check_bound(hess: np.ndarray, C: float) -> None:
    min_eig = float(np.linalg.eigvalsh(hess)[0])
    if min_eig < -C - _BOUND_TOL:
        raise BoundViolated(
            "Hess(u) has eigenvalue %.12g below -C = %.12g" % (min_eig, -C)
        )


def transform_complex(x, grad, hess, params: LewyParams) -> TransformedPoint:
    if params.mode != MODE_COMPLEX:
        raise ValueError("params built for mode %r" % params.mode)
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    _check_bound(hess, params.C)
    h = params.h
    scale = 1.0 / sqrt(1.0 + h * h)
    n = x.size
    xbar = scale * (h * x + grad)
    ybar = scale * (-x + h * grad)
    hbar = np.linalg.solve(h * np.eye(n) + hess, -np.eye(n) + h * hess)
    return TransformedPoint(xbar, ybar, hbar, params.jacobian_lower_bound)


def transform_quaternionic(x, grad, hess, params: LewyParams) -> TransformedPoint:
    if params.mode != MODE_QUATERNIONIC:
        raise ValueError("params built for mode %r" % params.mode)
    x = np.asarray(x, dtype=np.float64)
    grad = np.asarray(grad, dtype=np.float64)
    hess = np.asarray(hess, dtype=np.float64)
    _check_bound(hess, params.C)
    h = params.h
    scale = 1.0 / sqrt(1.0 + h * h)
    n = x.size
    xbar = scale * (h * x + _SQRT3 * grad)
    ybar = scale * (-x / _SQRT3 + h * grad)
    hbar = np.linalg.solve(
        h * np.eye(n) + _SQRT3 * hess, -np.eye(n) / _SQRT3 + h * hess
    )
    return TransformedPoint(xbar, ybar, hbar, params.jacobian_lower_bound)


def transform_point(x, grad, hess, params: LewyParams) -> TransformedPoint:
    if params.mode == MODE_COMPLEX:
        return transform_complex(x, grad, hess, params)
    return transform_quaternionic(x, grad, hess, params)


def d_block(params: LewyParams) -> np.ndarray:
    """The 4x4 rotation block of the quaternionic transform."""
    a, b = params.a, params.b
    return np.array(
        [
            [a, b, b, b],
            [-b, a, b, -b],
            [-b, -b, a, b],
            [-b, b, -b, a],
        ]
    )


def d_matrix(params: LewyParams, n: int) -> np.ndarray:
    """The full 4n x 4n orthogonal transform, n identical blocks acting on
    the (x, y, z, w) block structure."""
    return np.kron(d_block(params), np.eye(n))


def verify_lewy_round_trip(pt, params: LewyParams, samples: np.ndarray, eta: float = 1e-3) -> float:
    """Check that the transformed graph is again a gradient graph.

    At each sample the chain-rule Jacobian d(ybar)/d(xbar) must equal the
    transformed Hessian: the returned value is the max over samples of
    (a) the asymmetry of hess_ubar and (b) the max-norm gap between
    hess_ubar and a central-difference Jacobian of ybar against xbar taken
    through the x-parametrization with step eta. Raises BoundViolated if
    any sample breaks Hess(u) >= -C I.
    """
    samples = np.atleast_2d(np.asarray(samples, dtype=np.float64))
    P, n = samples.shape
    # stencil: center plus x +- eta e_b
    offs = np.concatenate([np.zeros((1, n)), eta * np.eye(n), -eta * np.eye(n)])
    pts = (samples[:, None, :] + offs[None, :, :]).reshape(-1, n)
    _, grads, hesss, _, ok = jet_eval_batch(pt.u1, pts, n)
    if not ok.all():
        raise DomainError("round-trip stencil leaves the potential's domain")
    grads = grads.reshape(P, 2 * n + 1, n)
    hesss = hesss.reshape(P, 2 * n + 1, n, n)
    h = params.h
    scale = 1.0 / sqrt(1.0 + h * h)
    if params.mode == MODE_COMPLEX:
        gx, gy = h, 1.0
    else:
        gx, gy = h, _SQRT3

    worst = 0.0
    for p in range(P):
        tp = transform_point(samples[p], grads[p, 0], hesss[p, 0], params)
        asym = float(np.abs(tp.hess_ubar - tp.hess_ubar.T).max())
        dxbar = np.empty((n, n))
        dybar = np.empty((n, n))
        for bidx in range(n):
            gp = grads[p, 1 + bidx]
            gm = grads[p, 1 + n + bidx]
            xp = samples[p] + eta * np.eye(n)[bidx]
            xm = samples[p] - eta * np.eye(n)[bidx]
            if params.mode == MODE_COMPLEX:
                xbp = scale * (gx * xp + gp)
                xbm = scale * (gx * xm + gm)
                ybp = scale * (-xp + h * gp)
                ybm = scale * (-xm + h * gm)
            else:
                xbp = scale * (gx * xp + gy * gp)
                xbm = scale * (gx * xm + gy * gm)
                ybp = scale * (-xp / _SQRT3 + h * gp)
                ybm = scale * (-xm / _SQRT3 + h * gm)
            dxbar[:, bidx] = (xbp - xbm) / (2.0 * eta)
            dybar[:, bidx] = (ybp - ybm) / (2.0 * eta)
        j_fd = dybar @ np.linalg.inv(dxbar)
        disc = float(np.abs(j_fd - tp.hess_ubar).max())
        worst = max(worst, asym, disc)
    return worst
