"""Sampled hypothesis checks for the slope-bound rigidity theorems.

Every check reports a signed margin: positive means the hypothesis holds
on the sampled set with that much room, negative measures the violation.
Margins are defined through min/max over the sample, so enlarging the
sample can only shrink them. A sample can certify a hypothesis only on the
sampled box; the K field is the sample sup of |lambda_i^(s)|, not a global
slope bound.

Theorem ids:

  thm-3.2         min eig of S_ij + S_jk + S_ki >= -3 + delta over triples
  cor-Sij         min eig of S_ij >= -3/2 + delta over pairs
  cor-LambdaNorm  |Lambda_i|^2 <= 3/2 - delta
  thm-Cn-sqrt6    single-potential shape, Hess u >= -C I with C < sqrt(6)/12
  thm-Hn-sqrt2    triple-equal shape, Hess u >= -C I with C < sqrt(2)/12
  cor-convex      triple-equal shape, Hess u >= 0

where S_ij is the symmetrized outer product of the eigenvalue triples
Lambda_i, Lambda_j.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from . import kernels
from .errors import DomainError, ShapeMismatch
from .frame import joint_diagonalize
from .geometry import PotentialTriple, triple_jets_batch

THEOREM_IDS = (
    "thm-3.2",
    "cor-Sij",
    "cor-LambdaNorm",
    "thm-Cn-sqrt6",
    "thm-Hn-sqrt2",
    "cor-convex",
)

C_BOUND_SINGLE = sqrt(6.0) / 12.0
C_BOUND_TRIPLE = sqrt(2.0) / 12.0


@dataclass
class HypothesisEntry:
    theorem_id: str
    holds: bool
    margin: float
    witness_point: np.ndarray
    K: float
    sampled_points: int
    note: str = ""


@dataclass
class HypothesisReport:
    entries: list[HypothesisEntry]

    def by_id(self, theorem_id: str) -> HypothesisEntry:
        for e in self.entries:
            if e.theorem_id == theorem_id:
                return e
        raise KeyError(theorem_id)

    @property
    def all_hold(self) -> bool:
        return all(e.holds for e in self.entries)


def spectra_over_points(pt: PotentialTriple, X: np.ndarray, tol: float = 1e-9):
    """Eigenvalue triples lams (P, n, 3) at each sample point.

    Jets are batched; the joint diagonalization runs per point because its
    eigenvalue clustering is data dependent. Raises DomainError if any
    sample point leaves a potential's domain, NotCommuting (from the
    diagonalization) if the graph is not Lagrangian there.
    """
    X = np.asarray(X, dtype=np.float64)
    _, hess, _, ok = triple_jets_batch(pt, X)
    if not ok.all():
        raise DomainError(
            "potentials undefined at %d of %d sample points" % ((~ok).sum(), ok.size)
        )
    P, n = X.shape[0], pt.n
    lams = np.empty((P, n, 3))

    def fill(lo, hi):
        for p in range(lo, hi):
            lams[p] = joint_diagonalize(hess[p, 0], hess[p, 1], hess[p, 2], tol=tol).lambdas

    kernels.map_chunks(fill, P, chunk=256)
    return lams


def _k_sup(lams: np.ndarray) -> float:
    return float(np.abs(lams).max()) if lams.size else 0.0


_SAMPLE_NOTE = "K is a sample sup; global slope boundedness is not certified"


def check_theorem_32(lams: np.ndarray, points: np.ndarray) -> HypothesisEntry:
    """margin = 3 + min over points and triples (i,j,k) of the smallest
    eigenvalue of S_ij + S_jk + S_ki."""
    per_point = kernels.min_eig_sum3_sweep(lams)
    worst = int(np.argmin(per_point))
    margin = 3.0 + float(per_point[worst])
    return HypothesisEntry(
        theorem_id="thm-3.2",
        holds=margin > 0.0,
        margin=margin,
        witness_point=np.asarray(points[worst], dtype=np.float64),
        K=_k_sup(lams),
        sampled_points=points.shape[0],
        note=_SAMPLE_NOTE,
    )


def check_corollary_sij(lams: np.ndarray, points: np.ndarray) -> HypothesisEntry:
    """margin = 3/2 + min over points and pairs (i,j) of min eig of S_ij."""
    per_point = kernels.min_eig_pair_sweep(lams)
    worst = int(np.argmin(per_point))
    margin = 1.5 + float(per_point[worst])
    return HypothesisEntry(
        theorem_id="cor-Sij",
        holds=margin > 0.0,
        margin=margin,
        witness_point=np.asarray(points[worst], dtype=np.float64),
        K=_k_sup(lams),
        sampled_points=points.shape[0],
        note=_SAMPLE_NOTE,
    )


def check_corollary_lambda_norm(lams: np.ndarray, points: np.ndarray) -> HypothesisEntry:
    """margin = 3/2 - sup over points and i of |Lambda_i|^2."""
    norms = (lams**2).sum(axis=2)  # (P, n)
    per_point = norms.max(axis=1)
    worst = int(np.argmax(per_point))
    margin = 1.5 - float(per_point[worst])
    return HypothesisEntry(
        theorem_id="cor-LambdaNorm",
        holds=margin > 0.0,
        margin=margin,
        witness_point=np.asarray(points[worst], dtype=np.float64),
        K=_k_sup(lams),
        sampled_points=points.shape[0],
        note=_SAMPLE_NOTE,
    )


def min_hessian_eigenvalues(pt: PotentialTriple, X: np.ndarray):
    """Smallest eigenvalue of Hess(u1) at each sample point."""
    X = np.asarray(X, dtype=np.float64)
    _, hess, _, ok = triple_jets_batch(pt, X)
    if not ok.all():
        raise DomainError(
            "potentials undefined at %d of %d sample points" % ((~ok).sum(), ok.size)
        )
    return np.linalg.eigvalsh(hess[:, 0])[:, 0]


def check_hessian_lower_bound(pt: PotentialTriple, X: np.ndarray) -> list[HypothesisEntry]:
    """Hessian lower-bound theorems for the two special graph shapes.

    Single-potential shape: evaluates thm-Cn-sqrt6. Triple-equal shape:
    evaluates thm-Hn-sqrt2 and cor-convex. Any other shape raises
    ShapeMismatch. The measured constant is
    C* = max(0, -min sampled eigenvalue of Hess u).
    """
    if pt.single_potential:
        ids = ["thm-Cn-sqrt6"]
    elif pt.triple_equal:
        ids = ["thm-Hn-sqrt2", "cor-convex"]
    else:
        raise ShapeMismatch(
            "Hessian lower-bound theorems need the single-potential shape "
            "(x, grad u, 0, 0) or the triple-equal shape (x, grad u, grad u, grad u)"
        )
    X = np.asarray(X, dtype=np.float64)
    mins = min_hessian_eigenvalues(pt, X)
    worst = int(np.argmin(mins))
    witness = X[worst]
    c_star = max(0.0, -float(mins[worst]))
    K = float(np.abs(mins).max())  # informational only for these checks
    out = []
    for tid in ids:
        if tid == "thm-Cn-sqrt6":
            margin = C_BOUND_SINGLE - c_star
            holds = margin > 0.0
            note = "measured C* = %.6g against strict bound sqrt(6)/12" % c_star
        elif tid == "thm-Hn-sqrt2":
            margin = C_BOUND_TRIPLE - c_star
            holds = margin > 0.0
            note = "measured C* = %.6g against strict bound sqrt(2)/12" % c_star
        else:
            # convexity is a closed condition: margin is the worst sampled
            # eigenvalue itself and zero still qualifies
            margin = float(mins[worst])
            holds = margin >= 0.0
            note = "holds iff min sampled Hessian eigenvalue >= 0"
        out.append(
            HypothesisEntry(
                theorem_id=tid,
                holds=holds,
                margin=margin,
                witness_point=np.asarray(witness, dtype=np.float64),
                K=K,
                sampled_points=X.shape[0],
                note=note,
            )
        )
    return out


def evaluate_hypotheses(pt: PotentialTriple, X: np.ndarray, tol: float = 1e-9) -> HypothesisReport:
    """Run every applicable hypothesis check over the sample points."""
    X = np.asarray(X, dtype=np.float64)
    lams = spectra_over_points(pt, X, tol=tol)
    entries = [
        check_theorem_32(lams, X),
        check_corollary_sij(lams, X),
        check_corollary_lambda_norm(lams, X),
    ]
    if pt.single_potential or pt.triple_equal:
        entries.extend(check_hessian_lower_bound(pt, X))
    return HypothesisReport(entries)


def pairwise_products_max(X: np.ndarray, Li, Lj, Lk) -> np.ndarray:
    """max of (X.Li)(X.Lj), (X.Lj)(X.Lk), (X.Lk)(X.Li), batched over rows.

    At least one of the three products is a square (two of the three dot
    products must share a sign), so the max is always >= 0.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    a = X @ np.asarray(Li, dtype=np.float64)
    b = X @ np.asarray(Lj, dtype=np.float64)
    c = X @ np.asarray(Lk, dtype=np.float64)
    return np.maximum(np.maximum(a * b, b * c), c * a)


def f_form(X: np.ndarray, Li, Lj, Lk) -> np.ndarray:
    """Quadratic form X (3I + S_ij + S_jk + S_ki) X^T, batched over rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    a = X @ np.asarray(Li, dtype=np.float64)
    b = X @ np.asarray(Lj, dtype=np.float64)
    c = X @ np.asarray(Lk, dtype=np.float64)
    return 3.0 * (X**2).sum(axis=1) + a * b + b * c + c * a
