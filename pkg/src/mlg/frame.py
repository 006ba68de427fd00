"""Joint spectral data of the three Hessians and the adapted orthonormal frame.

The three Hessians of a Lagrangian gradient graph commute, so they share an
orthonormal eigenbasis a_1..a_n with eigenvalue triples
Lambda_i = (lambda_i^(1), lambda_i^(2), lambda_i^(3)). From these the
orthonormal frame on R^{4n} adapted to the graph is explicit: with
A_i = sqrt(1 + |Lambda_i|^2), the tangent vector over a_i has block
coefficients (1, l1, l2, l3)/A_i and the three normal vectors are obtained
by applying the complex structures I, J, K.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotCommuting
from .geometry import commutator_residual_matrices


@dataclass
class Spectrum:
    """Common eigenbasis and eigenvalue triples of three commuting Hessians.

    basis holds the eigenvectors a_i as columns; lambdas[i, s] is the
    eigenvalue of Hessian s on a_i; rows are sorted lexicographically by
    (lambda^(1), lambda^(2), lambda^(3)) and signs are canonicalized, so
    identical inputs produce identical spectra.
    """

    basis: np.ndarray    # (n, n), columns a_i
    lambdas: np.ndarray  # (n, 3)

    @property
    def n(self) -> int:
        return self.basis.shape[0]

    @property
    def normalizers(self) -> np.ndarray:
        """A_i = sqrt(1 + sum_s lambda_i^(s)^2), always >= 1."""
        return np.sqrt(1.0 + (self.lambdas**2).sum(axis=1))

    @property
    def big_lambdas(self) -> np.ndarray:
        """Rows Lambda_i = (lambda_i^(1), lambda_i^(2), lambda_i^(3))."""
        return self.lambdas


def _cluster_spans(w: np.ndarray, gap: float):
    """Split sorted eigenvalues into clusters separated by more than gap."""
    spans = []
    start = 0
    for i in range(1, w.size):
        if w[i] - w[i - 1] > gap:
            spans.append((start, i))
            start = i
    spans.append((start, w.size))
    return spans


def joint_diagonalize(H1, H2, H3, tol: float = 1e-9) -> Spectrum:
    """Simultaneously diagonalize three commuting symmetric matrices.

    Recursive eigenspace refinement: eigendecompose the first matrix, split
    into eigenvalue clusters (width 1e-8*(1+||H||) per matrix), restrict the
    next matrix to each cluster's eigenspace and repeat. This is robust
    under degeneracy, where a single random linear combination is not.

    Commutator residuals above tol trigger a warning (best-effort result);
    residuals above 10*tol raise NotCommuting, which downstream signals
    that the input graph is not a Lagrangian gradient graph.
    """
    mats = [np.asarray(H, dtype=np.float64) for H in (H1, H2, H3)]
    n = mats[0].shape[0]
    for H in mats:
        if H.shape != (n, n):
            raise NotCommuting("Hessians must share a common square shape")
    mats = [0.5 * (H + H.T) for H in mats]
    resid = commutator_residual_matrices(*mats)
    if resid > 10.0 * tol:
        raise NotCommuting(
            "pairwise Hessian commutator residual %.3e exceeds 10*tol=%.3e"
            % (resid, 10.0 * tol)
        )
    if resid > tol:
        warnings.warn(
            "Hessians only nearly commute (residual %.3e > tol %.3e); "
            "returning best-effort approximate joint diagonalization" % (resid, tol),
            RuntimeWarning,
            stacklevel=2,
        )
    gaps = [1e-8 * (1.0 + np.linalg.norm(H, np.inf)) for H in mats]

    def refine(cols: np.ndarray, depth: int) -> list[np.ndarray]:
        if depth == 3 or cols.shape[1] == 1:
            return [cols]
        M = cols.T @ mats[depth] @ cols
        w, V = np.linalg.eigh(0.5 * (M + M.T))
        out = []
        for lo, hi in _cluster_spans(w, gaps[depth]):
            out.extend(refine(cols @ V[:, lo:hi], depth + 1))
        return out

    blocks = refine(np.eye(n), 0)
    basis = np.concatenate(blocks, axis=1)
    lambdas = np.empty((n, 3))
    for s in range(3):
        lambdas[:, s] = np.einsum("ij,jk,ki->i", basis.T, mats[s], basis)
    order = np.lexsort((lambdas[:, 2], lambdas[:, 1], lambdas[:, 0]))
    basis = basis[:, order]
    lambdas = lambdas[order]
    for i in range(n):
        lead = int(np.argmax(np.abs(basis[:, i])))
        if basis[lead, i] < 0:
            basis[:, i] = -basis[:, i]
    return Spectrum(basis, lambdas)


@dataclass
class QuaternionFrame:
    """Adapted orthonormal frame of R^{4n} along the graph.

    tangent[i] spans the tangent space; normal[s-1, i] is the normal vector
    obtained from tangent[i] via the complex structure I (s=1), J (s=2),
    K (s=3).
    """

    tangent: np.ndarray  # (n, 4n)
    normal: np.ndarray   # (3, n, 4n)

    @property
    def n(self) -> int:
        return self.tangent.shape[0]

    def all_vectors(self) -> np.ndarray:
        """All 4n frame vectors stacked as rows, tangent block first."""
        return np.concatenate([self.tangent, self.normal.reshape(-1, self.tangent.shape[1])])


def build_frame(spec: Spectrum) -> QuaternionFrame:
    """Assemble the frame from the spectrum.

    Block coefficient rows (per eigendirection i, divided by A_i):

        tangent:   ( 1,   l1,  l2,  l3)
        normal s1: (-l1,  1,  -l3,  l2)
        normal s2: (-l2,  l3,  1,  -l1)
        normal s3: (-l3, -l2,  l1,  1 )
    """
    n = spec.n
    A = spec.normalizers
    tangent = np.zeros((n, 4 * n))
    normal = np.zeros((3, n, 4 * n))
    for i in range(n):
        a = spec.basis[:, i]
        l1, l2, l3 = spec.lambdas[i]
        rows = np.array(
            [
                [1.0, l1, l2, l3],
                [-l1, 1.0, -l3, l2],
                [-l2, l3, 1.0, -l1],
                [-l3, -l2, l1, 1.0],
            ]
        ) / A[i]
        for b in range(4):
            tangent[i, b * n : (b + 1) * n] = rows[0, b] * a
            for s in range(3):
                normal[s, i, b * n : (b + 1) * n] = rows[s + 1, b] * a
    return QuaternionFrame(tangent, normal)


def star_omega_spectral(spec: Spectrum) -> float:
    """Volume ratio as 1 / prod_i A_i (spectral route)."""
    return float(1.0 / np.prod(spec.normalizers))


def s_matrix(L_i, L_j) -> np.ndarray:
    """Symmetrized outer product S_ij = (L_i^T L_j + L_j^T L_i) / 2 of two
    eigenvalue triples, a symmetric 3x3 matrix."""
    L_i = np.asarray(L_i, dtype=np.float64)
    L_j = np.asarray(L_j, dtype=np.float64)
    return 0.5 * (np.outer(L_i, L_j) + np.outer(L_j, L_i))
