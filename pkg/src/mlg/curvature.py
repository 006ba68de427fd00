"""Second fundamental form, mean curvature, and curvature identities.

The second fundamental form is computed frame-invariantly: second
derivatives of the embedding are projected onto the adapted normal frame,
and the two parameter indices are transformed into the tangent frame by
solving against the induced metric. Mean curvature has a second,
frame-free route (metric-trace of the embedding Hessian projected off the
tangent space) used for fast batched screens.

Two identities are verified numerically on minimal graphs:

  * the gradient formula for the volume ratio r = *Omega,
        dr/de_k = -r * sum_{s,i} lambda_i^(s) h^(s)_{iik}
  * the Bochner identity, Laplace-Beltrami of ln(1/r) against the
    quadratic form sum_{ijk} h_{ijk} (I + L_i^T L_j) h_{ijk}^T in the
    second fundamental form (L_i the eigenvalue triples).

The Laplacian side is discretized in non-divergence form with analytic
coefficients; only the second derivatives of ln(1/r) use central
differences, giving O(eta^2) truncation error with small constants.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, NotMinimal
from .frame import QuaternionFrame, Spectrum, build_frame, joint_diagonalize, star_omega_spectral
from .geometry import (
    EmbeddingJet,
    PotentialTriple,
    assemble_embedding_jet,
    induced_metric,
    metric_from_hessians,
    star_omega_from_metric,
    triple_jets_batch,
)

BOCH_OK = 0
BOCH_NOT_MINIMAL = 1
BOCH_DOMAIN_ERROR = 2
BOCH_STATUS_NAMES = ("ok", "not-minimal", "domain-error")


@dataclass
class SecondFundamentalForm:
    """Tensor h[s, i, j, k]: s picks the normal block, (i, j) are tangent
    frame indices, k the normal index inside the block. Fully symmetric in
    (i, j, k) on Lagrangian graphs (asserted by tests, not enforced)."""

    h: np.ndarray  # (3, n, n, n)

    @property
    def n(self) -> int:
        return self.h.shape[1]

    def symmetry_defect(self) -> float:
        """Max deviation of h under all permutations of (i, j, k)."""
        worst = 0.0
        for perm in ((0, 1, 3, 2), (0, 2, 1, 3), (0, 2, 3, 1), (0, 3, 1, 2), (0, 3, 2, 1)):
            worst = max(worst, float(np.abs(self.h - np.transpose(self.h, perm)).max()))
        return worst

    def norm_squared(self) -> float:
        return float((self.h**2).sum())

    def traces(self) -> np.ndarray:
        """Mean-curvature components sum_i h[s, i, i, k], shape (3, n)."""
        return np.einsum("siik->sk", self.h)


def second_fundamental_form(
    ej: EmbeddingJet, frame: QuaternionFrame, g: np.ndarray | None = None
) -> SecondFundamentalForm:
    """Project the embedding's second derivatives onto the normal frame.

    h[s, i, j, k] = sum_{a,b} P[i,a] P[j,b] <d2F/dx_a dx_b, normal[s,k]>
    where P solves P g = <tangent_frame, dF/dx_b>, i.e. P expresses the
    tangent frame vectors in the coordinate basis dF/dx_a.
    """
    if g is None:
        g = induced_metric(ej)
    # normal projections N[s, k, a, b]
    N = np.einsum("abm,skm->skab", ej.second_derivs, frame.normal)
    M = frame.tangent @ ej.tangents.T  # <e_i, dF/dx_b>
    P = np.linalg.solve(g.T, M.T).T
    h = np.einsum("ia,jb,skab->sijk", P, P, N)
    return SecondFundamentalForm(h)


def mean_curvature_norm(sff: SecondFundamentalForm, g: np.ndarray | None = None) -> float:
    """Euclidean norm of the mean curvature vector from the frame route.

    The adapted frame is orthonormal, so no metric weights remain; g is
    accepted for signature symmetry with the projection route and ignored.
    """
    return float(np.sqrt((sff.traces() ** 2).sum()))


@dataclass
class PointGeometry:
    """Everything the curvature checks need at one point."""

    x: np.ndarray
    grads: np.ndarray   # (3, n)
    hess: np.ndarray    # (3, n, n)
    third: np.ndarray   # (3, n, n, n)
    embedding: EmbeddingJet
    metric: np.ndarray  # (n, n)
    spectrum: Spectrum
    frame: QuaternionFrame
    star_omega: float             # spectral route, 1/prod(A_i)
    star_omega_determinant: float # determinant route, det(g)^{-1/2}


def point_geometry(pt: PotentialTriple, x, tol: float = 1e-9) -> PointGeometry:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    grads, hess, third, ok = triple_jets_batch(pt, x[None, :])
    if not ok[0]:
        raise DomainError("potential jets undefined at the given point")
    grads, hess, third = grads[0], hess[0], third[0]
    ej = assemble_embedding_jet(x, grads, hess, third)
    g = induced_metric(ej)
    spec = joint_diagonalize(hess[0], hess[1], hess[2], tol=tol)
    fr = build_frame(spec)
    return PointGeometry(
        x=x,
        grads=grads,
        hess=hess,
        third=third,
        embedding=ej,
        metric=g,
        spectrum=spec,
        frame=fr,
        star_omega=star_omega_spectral(spec),
        star_omega_determinant=float(star_omega_from_metric(g)),
    )


@dataclass
class SurfaceBatch:
    """Frame-free surface data over a batch of points.

    mean_curvature comes from the projection route: trace of the embedding
    Hessian against the inverse metric, projected off the tangent space.
    """

    X: np.ndarray            # (P, n)
    grads: np.ndarray        # (P, 3, n)
    hess: np.ndarray         # (P, 3, n, n)
    third: np.ndarray        # (P, 3, n, n, n)
    metric: np.ndarray       # (P, n, n)
    star_omega: np.ndarray   # (P,)
    mean_curvature: np.ndarray  # (P,)
    ok: np.ndarray           # (P,) bool


def batch_surface_data(pt: PotentialTriple, X: np.ndarray) -> SurfaceBatch:
    X = np.asarray(X, dtype=np.float64)
    P, n = X.shape
    grads, hess, third, ok = triple_jets_batch(pt, X)
    # rows with domain violations would poison the linear algebra below
    safe = np.where(ok[:, None, None, None], hess, 0.0)
    safe_t = np.where(ok[:, None, None, None, None], third, 0.0)
    tangents = np.zeros((P, n, 4 * n))
    tangents[:, :, :n] = np.eye(n)
    second = np.zeros((P, n, n, 4 * n))
    for s in range(3):
        tangents[:, :, (s + 1) * n : (s + 2) * n] = np.transpose(safe[:, s], (0, 2, 1))
        second[:, :, :, (s + 1) * n : (s + 2) * n] = np.transpose(safe_t[:, s], (0, 2, 3, 1))
    g = metric_from_hessians(safe)
    ginv = np.linalg.inv(g)
    star = star_omega_from_metric(g)
    trace2F = np.einsum("pij,pija->pa", ginv, second)
    coef = np.einsum("pa,pia->pi", trace2F, tangents)
    tangential = np.einsum("pkl,pl,pka->pa", ginv, coef, tangents)
    perp = trace2F - tangential
    meanH = np.sqrt((perp**2).sum(axis=1))
    return SurfaceBatch(X, grads, hess, third, g, star, meanH, ok)


def star_omega_values(pt: PotentialTriple, X: np.ndarray):
    """Batched determinant-route volume ratio. Returns (values, ok)."""
    X = np.asarray(X, dtype=np.float64)
    _, hess, _, ok = triple_jets_batch(pt, X)
    safe = np.where(ok[:, None, None, None], hess, 0.0)
    return star_omega_from_metric(metric_from_hessians(safe)), ok


def star_omega_gradient_check(pt: PotentialTriple, x, eta: float = 1e-3) -> float:
    """Verify the first-derivative formula for the volume ratio.

    Compares the central difference of *Omega along each tangent frame
    direction (projected to parameter coordinates) against
    -*Omega * sum_{s,i} lambda_i^(s) h^(s)_{iik}. Returns the max
    discrepancy over k.
    """
    pg = point_geometry(pt, x)
    sff = second_fundamental_form(pg.embedding, pg.frame, pg.metric)
    n = pt.n
    # rhs_k = -r * sum_{s,i} lambda_i^(s) h[s,i,i,k]
    rhs = -pg.star_omega * np.einsum("is,sik->k", pg.spectrum.lambdas, np.einsum("siik->sik", sff.h))
    # parameter-space velocities of the tangent frame directions
    V = pg.spectrum.basis / pg.spectrum.normalizers[None, :]  # column k = a_k / A_k
    steps = eta * V.T
    pts = np.concatenate(
        [
            pg.x[None, :] + steps,
            pg.x[None, :] - steps,
            pg.x[None, :] + 0.5 * steps,
            pg.x[None, :] - 0.5 * steps,
        ]
    )
    vals, ok = star_omega_values(pt, pts)
    if not ok.all():
        raise DomainError("gradient-check stencil leaves the expression domain")
    # one Richardson level over steps eta and eta/2 cancels the quadratic
    # truncation term of the central difference
    coarse = (vals[:n] - vals[n : 2 * n]) / (2.0 * eta)
    fine = (vals[2 * n : 3 * n] - vals[3 * n :]) / eta
    lhs = (4.0 * fine - coarse) / 3.0
    return float(np.abs(lhs - rhs).max())


@dataclass
class BochnerReport:
    """One point's comparison of the two sides of the curvature identity."""

    lhs: float               # Laplace-Beltrami of ln(1/r), finite differences
    rhs_quadratic: float     # sum h (I + L_i^T L_j) h^T
    rhs_symmetrized: float   # 1/3 sum h (3I + L_i^T L_j + L_j^T L_k + L_k^T L_i) h^T
    mean_curvature_norm: float
    fd_step: float

    @property
    def discrepancy(self) -> float:
        return abs(self.lhs - self.rhs_quadratic)


@dataclass
class BochnerSweep:
    """Vectorized Bochner verification over many base points."""

    centers: np.ndarray         # (P, n)
    lhs: np.ndarray             # (P,)
    rhs_quadratic: np.ndarray   # (P,)
    rhs_symmetrized: np.ndarray # (P,)
    mean_curvature: np.ndarray  # (P,) at the centers
    status: np.ndarray          # (P,) int, BOCH_* codes
    fd_step: float

    @property
    def discrepancy(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs_quadratic)


def _laplacian_stencil(n: int):
    """Integer offsets (in units of eta) for the second-derivative stencil
    of a scalar field: ax[a][sign] locates x + sign*eta*e_a and
    corner[a][b][sa][sb] locates x + sa*eta*e_a + sb*eta*e_b for a < b."""
    index: dict[tuple, int] = {}
    order: list[tuple] = []

    def at(off) -> int:
        key = tuple(off)
        if key not in index:
            index[key] = len(order)
            order.append(key)
        return index[key]

    center = at((0,) * n)
    ax = np.empty((n, 2), dtype=np.int64)
    corner = np.zeros((n, n, 2, 2), dtype=np.int64)
    for a in range(n):
        for sa, sign_a in enumerate((1, -1)):
            off = [0] * n
            off[a] = sign_a
            ax[a, sa] = at(off)
    for a in range(n):
        for b in range(a + 1, n):
            for sa, sign_a in enumerate((1, -1)):
                for sb, sign_b in enumerate((1, -1)):
                    off = [0] * n
                    off[a] = sign_a
                    off[b] = sign_b
                    corner[a, b, sa, sb] = at(off)
    return np.asarray(order, dtype=np.float64), center, ax, corner


def _rhs_forms(spec: Spectrum, sff: SecondFundamentalForm):
    """Both algebraic right-hand sides from the spectrum and the form h."""
    hv = np.transpose(sff.h, (1, 2, 3, 0))  # (i, j, k, s)
    lam = spec.lambdas                       # (i, s)
    base = float((hv**2).sum())
    di = np.einsum("ijks,is->ijk", hv, lam)
    dj = np.einsum("ijks,js->ijk", hv, lam)
    dk = np.einsum("ijks,ks->ijk", hv, lam)
    rhs_q = base + float((di * dj).sum())
    rhs_s = base + float((di * dj + dj * dk + dk * di).sum()) / 3.0
    return rhs_q, rhs_s


def bochner_sweep(
    pt: PotentialTriple,
    centers: np.ndarray,
    eta: float = 1e-3,
    minimality_tol: float = 1e-7,
) -> BochnerSweep:
    """Verify the curvature identity at each center point.

    lhs: Laplace-Beltrami of f = 0.5*ln det g in non-divergence form,
    g^{ab} d2f/dab + beta^b df/db. The coefficients g^{ab} and beta, and
    the first derivatives df/db = 0.5 tr(g^-1 dg/db), come analytically
    from the jets at the center; only the second derivatives of f use
    central differences of step eta, so the truncation error is a clean
    O(eta^2) with the bare one-dimensional stencil constants.
    Centers whose stencil hits a mean curvature above minimality_tol are
    flagged not-minimal (the identity presumes a minimal graph); domain
    violations are flagged domain-error. Flagged centers carry nan results.
    """
    centers = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    P, n = centers.shape
    offsets, c_idx, ax, corner = _laplacian_stencil(n)
    m = offsets.shape[0]
    pts = (centers[:, None, :] + eta * offsets[None, :, :]).reshape(P * m, n)
    sb = batch_surface_data(pt, pts)
    ok = sb.ok.reshape(P, m)
    meanH = sb.mean_curvature.reshape(P, m)
    f = -np.log(sb.star_omega.reshape(P, m))  # f = ln(1/r) = 0.5 ln det g

    status = np.full(P, BOCH_OK, dtype=np.int64)
    status[~ok.all(axis=1)] = BOCH_DOMAIN_ERROR
    bad_min = ok.all(axis=1) & (meanH > minimality_tol).any(axis=1)
    status[bad_min] = BOCH_NOT_MINIMAL

    grads_c = sb.grads.reshape(P, m, 3, n)[:, c_idx]
    hess_c = sb.hess.reshape(P, m, 3, n, n)[:, c_idx]
    third_c = sb.third.reshape(P, m, 3, n, n, n)[:, c_idx]
    g_c = sb.metric.reshape(P, m, n, n)[:, c_idx]
    ginv = np.linalg.inv(g_c)

    # dg/da = sum_s (dH_s/da H_s + H_s dH_s/da), exact from third derivatives
    dG = np.einsum("psjma,psmk->pajk", third_c, hess_c) + np.einsum(
        "psjm,psmka->pajk", hess_c, third_c
    )
    # df/da = d(ln sqrt(det g))/da = 0.5 tr(g^-1 dg/da)
    df = 0.5 * np.einsum("pkj,pajk->pa", ginv, dG)
    # d(g^-1)/da = -g^-1 (dg/da) g^-1; beta^b = d_a g^{ab} + g^{ab} d_a ln sqrt(g)
    dGinv = -np.einsum("pij,pajk,pkl->pail", ginv, dG, ginv)
    beta = np.einsum("paab->pb", dGinv) + np.einsum("pab,pa->pb", ginv, df)

    f0 = f[:, c_idx]
    f2 = np.empty((P, n, n))
    for a in range(n):
        f2[:, a, a] = (f[:, ax[a, 0]] - 2.0 * f0 + f[:, ax[a, 1]]) / eta**2
        for b in range(a + 1, n):
            cross = (
                f[:, corner[a, b, 0, 0]]
                - f[:, corner[a, b, 0, 1]]
                - f[:, corner[a, b, 1, 0]]
                + f[:, corner[a, b, 1, 1]]
            ) / (4.0 * eta**2)
            f2[:, a, b] = cross
            f2[:, b, a] = cross
    lhs = np.einsum("pab,pab->p", ginv, f2) + np.einsum("pb,pb->p", beta, df)
    lhs[status != BOCH_OK] = np.nan

    rhs_q = np.full(P, np.nan)
    rhs_s = np.full(P, np.nan)

    def fill(lo, hi):
        for p in range(lo, hi):
            if status[p] != BOCH_OK:
                continue
            ej = assemble_embedding_jet(centers[p], grads_c[p], hess_c[p], third_c[p])
            spec = joint_diagonalize(hess_c[p, 0], hess_c[p, 1], hess_c[p, 2])
            fr = build_frame(spec)
            sff = second_fundamental_form(ej, fr, g_c[p])
            rhs_q[p], rhs_s[p] = _rhs_forms(spec, sff)

    kernels.map_chunks(fill, P, chunk=64)
    return BochnerSweep(
        centers=centers,
        lhs=lhs,
        rhs_quadratic=rhs_q,
        rhs_symmetrized=rhs_s,
        mean_curvature=meanH[:, c_idx],
        status=status,
        fd_step=eta,
    )


def bochner_verify(
    pt: PotentialTriple, x, eta: float = 1e-3, minimality_tol: float = 1e-7
) -> BochnerReport:
    """Single-point curvature-identity verification.

    Raises NotMinimal when the mean curvature screen fails on the stencil,
    DomainError when the stencil leaves the expression domain.
    """
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    sweep = bochner_sweep(pt, x[None, :], eta=eta, minimality_tol=minimality_tol)
    code = int(sweep.status[0])
    if code == BOCH_DOMAIN_ERROR:
        raise DomainError("stencil leaves the expression domain")
    if code == BOCH_NOT_MINIMAL:
        raise NotMinimal(
            "mean curvature exceeds %.1e on the verification stencil" % minimality_tol
        )
    return BochnerReport(
        lhs=float(sweep.lhs[0]),
        rhs_quadratic=float(sweep.rhs_quadratic[0]),
        rhs_symmetrized=float(sweep.rhs_symmetrized[0]),
        mean_curvature_norm=float(sweep.mean_curvature[0]),
        fd_step=eta,
    )
