"""Graph embeddings F(x) = (x, grad u1, grad u2, grad u3) and their geometry.

Provides the embedding jet, the three fixed complex structures on R^{4n}
with their symplectic pullbacks, both forms of the Lagrangian check, the
induced metric, and the determinant route to the volume ratio
*Omega = det(I + sum_s Hess(u_s)^2)^{-1/2}.

Complex-structure convention, acting on blocks (x, y, z, w) of R^{4n}:

    I:(x,y,z,w) -> (-y,  x, -w,  z)
    J:(x,y,z,w) -> (-z,  w,  x, -y)
    K:(x,y,z,w) -> (-w, -z,  y,  x)

so that I^2 = J^2 = K^2 = -Id, IJ = K, and the standard basis satisfies
I a_i = a_{n+i}, J a_i = a_{2n+i}, K a_i = a_{3n+i}.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, ShapeMismatch
from .jets import jet_eval_batch
from .parser import Expr, is_zero, parse

SHAPE_GENERAL = "general-triple"
SHAPE_SPECIAL_LAGRANGIAN = "special-lagrangian"
SHAPE_TRIPLE_EQUAL = "triple-equal"


@dataclass(frozen=True)
class PotentialTriple:
    """Three scalar potentials on R^n defining the graph embedding."""

    n: int
    u1: Expr
    u2: Expr
    u3: Expr

    @classmethod
    def from_strings(cls, n: int, s1: str, s2: str, s3: str) -> "PotentialTriple":
        return cls(n, parse(s1, n), parse(s2, n), parse(s3, n))

    @property
    def potentials(self):
        return (self.u1, self.u2, self.u3)

    @property
    def single_potential(self) -> bool:
        """True for the shape (x, grad u, 0, 0)."""
        return is_zero(self.u2) and is_zero(self.u3)

    @property
    def triple_equal(self) -> bool:
        """True for the shape (x, grad u, grad u, grad u)."""
        return self.u1 == self.u2 == self.u3

    @property
    def shape(self) -> str:
        if self.single_potential:
            return SHAPE_SPECIAL_LAGRANGIAN
        if self.triple_equal:
            return SHAPE_TRIPLE_EQUAL
        return SHAPE_GENERAL


def triple_jets_batch(pt: PotentialTriple, X: np.ndarray):
    """Jets of all three potentials over rows of X.

    Returns (grads, hess, third, ok) with shapes (P,3,n), (P,3,n,n),
    (P,3,n,n,n), (P,).
    """
    X = np.asarray(X, dtype=np.float64)
    P = X.shape[0]
    n = pt.n
    grads = np.empty((P, 3, n))
    hess = np.empty((P, 3, n, n))
    third = np.empty((P, 3, n, n, n))
    ok = np.ones(P, dtype=bool)
    for s, u in enumerate(pt.potentials):
        _, g, h, t, oks = jet_eval_batch(u, X, n)
        grads[:, s] = g
        hess[:, s] = h
        third[:, s] = t
        ok &= oks
    return grads, hess, third, ok


def hessians(pt: PotentialTriple, x) -> np.ndarray:
    """The three Hessians at one point, shape (3, n, n)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    _, h, _, ok = triple_jets_batch(pt, x[None, :])
    if not ok[0]:
        raise DomainError("potential jets undefined at the given point")
    return h[0]


@dataclass
class EmbeddingJet:
    """Second-order data of the embedding F at one point.

    position (4n,), tangents (n, 4n) with tangents[i] = dF/dx_i, and
    second_derivs (n, n, 4n) with second_derivs[i, j] = d2F/dx_i dx_j.
    """

    position: np.ndarray
    tangents: np.ndarray
    second_derivs: np.ndarray

    @property
    def n(self) -> int:
        return self.tangents.shape[0]


def embedding_jet(pt: PotentialTriple, x) -> EmbeddingJet:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    grads, hess, third, ok = triple_jets_batch(pt, x[None, :])
    if not ok[0]:
        raise DomainError("potential jets undefined at the given point")
    return assemble_embedding_jet(x, grads[0], hess[0], third[0])


def assemble_embedding_jet(x, grads, hess, third) -> EmbeddingJet:
    """Build an EmbeddingJet from per-potential jet arrays at one point."""
    n = x.size
    position = np.concatenate([x, grads[0], grads[1], grads[2]])
    tangents = np.empty((n, 4 * n))
    tangents[:, :n] = np.eye(n)
    for s in range(3):
        # block s+1 of dF/dx_i is Hess(u_s) e_i, i.e. column i of the Hessian
        tangents[:, (s + 1) * n : (s + 2) * n] = hess[s].T
    second = np.zeros((n, n, 4 * n))
    for s in range(3):
        # d2(grad u_s)/dx_i dx_j is the third-derivative slice t[:, i, j]
        second[:, :, (s + 1) * n : (s + 2) * n] = np.transpose(third[s], (1, 2, 0))
    return EmbeddingJet(position, tangents, second)


_BLOCK_I = np.array(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]], dtype=np.float64
)
_BLOCK_J = np.array(
    [[0, 0, -1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, -1, 0, 0]], dtype=np.float64
)
_BLOCK_K = np.array(
    [[0, 0, 0, -1], [0, 0, -1, 0], [0, 1, 0, 0], [1, 0, 0, 0]], dtype=np.float64
)


@dataclass(frozen=True)
class SymplecticStructures:
    """The fixed complex structures I, J, K on R^{4n} as 4n x 4n matrices.

    Each matrix is skew-symmetric and orthogonal, so it is simultaneously
    the complex structure and (up to sign) the matrix of its Kaehler form.
    """

    n: int
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray

    @property
    def triple(self):
        return (self.I, self.J, self.K)


@lru_cache(maxsize=32)
def symplectic_structures(n: int) -> SymplecticStructures:
    eye = np.eye(n)
    return SymplecticStructures(
        n, np.kron(_BLOCK_I, eye), np.kron(_BLOCK_J, eye), np.kron(_BLOCK_K, eye)
    )


def symplectic_pullbacks(tangents: np.ndarray) -> np.ndarray:
    """Pullback matrices of the three Kaehler forms, shape (3, n, n).

    Entry (s, i, j) is omega_s(dF/dx_i, dF/dx_j); all three vanish exactly
    when the graph is Lagrangian.
    """
    n4 = tangents.shape[1]
    if n4 % 4:
        raise ShapeMismatch("tangent vectors must live in R^{4n}")
    S = symplectic_structures(n4 // 4)
    T = tangents.T
    return np.stack([T.T @ M @ T for M in S.triple])


def lagrangian_residual_general(D1: np.ndarray, D2: np.ndarray, D3: np.ndarray) -> float:
    """Max-norm residual of the three first-order Lagrangian equations for a
    general graph map with Jacobians D1, D2, D3 at a point:

        D1 - D1^T + D2^T D3 - D3^T D2 = 0
        D2 - D2^T + D3^T D1 - D1^T D3 = 0
        D3 - D3^T + D1^T D2 - D2^T D1 = 0
    """
    D1, D2, D3 = (np.asarray(D, dtype=np.float64) for D in (D1, D2, D3))
    eq1 = D1 - D1.T + D2.T @ D3 - D3.T @ D2
    eq2 = D2 - D2.T + D3.T @ D1 - D1.T @ D3
    eq3 = D3 - D3.T + D1.T @ D2 - D2.T @ D1
    return float(max(np.abs(eq1).max(), np.abs(eq2).max(), np.abs(eq3).max()))


def commutator_residual(pt: PotentialTriple, x) -> float:
    """Max-norm of the pairwise Hessian commutators at x."""
    H = hessians(pt, x)
    return commutator_residual_matrices(H[0], H[1], H[2])


def commutator_residual_matrices(H1, H2, H3) -> float:
    worst = 0.0
    mats = (np.asarray(H1), np.asarray(H2), np.asarray(H3))
    for a in range(3):
        for b in range(a + 1, 3):
            c = mats[a] @ mats[b] - mats[b] @ mats[a]
            worst = max(worst, float(np.abs(c).max()))
    return worst


def induced_metric(ej: EmbeddingJet) -> np.ndarray:
    """g_ij = <dF/dx_i, dF/dx_j> = delta_ij + sum_s (Hess(u_s)^2)_ij."""
    return ej.tangents @ ej.tangents.T


def metric_from_hessians(hess: np.ndarray) -> np.ndarray:
    """Batched induced metric from Hessians of shape (..., 3, n, n)."""
    n = hess.shape[-1]
    return np.eye(n) + np.einsum("...sij,...sjk->...ik", hess, hess)


def star_omega_from_metric(g: np.ndarray) -> np.ndarray:
    """det(g)^{-1/2} for a batch (..., n, n); g = I + sum Hess^2 is SPD."""
    sign, logdet = np.linalg.slogdet(g)
    if not (sign > 0).all():
        raise ShapeMismatch("induced metric must be positive definite")
    return np.exp(-0.5 * logdet)


def star_omega_det(pt: PotentialTriple, x) -> float:
    """Volume ratio det(I + sum_s Hess(u_s)^2)^{-1/2} at one point."""
    H = hessians(pt, x)
    g = metric_from_hessians(H)
    return float(star_omega_from_metric(g))
