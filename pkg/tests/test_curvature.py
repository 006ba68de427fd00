"""Second fundamental form, mean curvature, and the curvature identities."""

from __future__ import annotations

import numpy as np
import pytest

from mlg.curvature import (
    BOCH_NOT_MINIMAL,
    BOCH_OK,
    batch_surface_data,
    bochner_sweep,
    bochner_verify,
    mean_curvature_norm,
    point_geometry,
    second_fundamental_form,
    star_omega_gradient_check,
    star_omega_values,
)
from mlg.errors import DomainError, NotMinimal
from mlg.geometry import PotentialTriple, triple_jets_batch

CUBIC = "x1^3 - 3*x1*x2^2"
SIGMA2 = PotentialTriple.from_strings(2, CUBIC, CUBIC, CUBIC)
CUBIC_SL = PotentialTriple.from_strings(2, CUBIC, "0", "0")


def test_one_dimensional_closed_form():
    # n = 1: the only component is u''' / (1 + 3 u''^2)^(3/2) for each normal
    pt = PotentialTriple.from_strings(1, "x1^3", "x1^3", "x1^3")
    x = np.array([0.4])
    pg = point_geometry(pt, x)
    sff = second_fundamental_form(pg.embedding, pg.frame, pg.metric)
    upp, uppp = 6 * 0.4, 6.0
    A2 = 1 + 3 * upp**2
    for s in range(3):
        assert sff.h[s, 0, 0, 0] == pytest.approx(uppp / A2**1.5, rel=1e-12)


def _fd_embedding_second_derivs(pt, x, eta=1e-4):
    """Second derivatives of the embedding by central differences of its
    first-order jets (independent of the analytic third derivatives)."""
    n = pt.n
    offs = [np.zeros(n)]
    for a in range(n):
        for sgn in (1, -1):
            o = np.zeros(n)
            o[a] = sgn
            offs.append(o)
    for a in range(n):
        for b in range(a + 1, n):
            for sa in (1, -1):
                for sb in (1, -1):
                    o = np.zeros(n)
                    o[a], o[b] = sa, sb
                    offs.append(o)
    offs = np.asarray(offs)
    pts = x[None, :] + eta * offs
    grads, _, _, ok = triple_jets_batch(pt, pts)
    assert ok.all()
    F = np.concatenate([pts, grads.reshape(len(offs), 3 * n)], axis=1)

    def find(o):
        return int(np.flatnonzero((offs == o).all(axis=1))[0])

    second = np.empty((n, n, 4 * n))
    for a in range(n):
        oa = np.zeros(n)
        oa[a] = 1
        second[a, a] = (F[find(oa)] - 2 * F[0] + F[find(-oa)]) / eta**2
        for b in range(a + 1, n):
            ob = np.zeros(n)
            ob[b] = 1
            val = (
                F[find(oa + ob)] - F[find(oa - ob)] - F[find(-oa + ob)] + F[find(-oa - ob)]
            ) / (4 * eta**2)
            second[a, b] = val
            second[b, a] = val
    return second


def test_sff_matches_fd_embedding_oracle():
    rng = np.random.default_rng(66)
    for pt in (SIGMA2, CUBIC_SL):
        for _ in range(5):
            x = rng.uniform(-0.8, 0.8, size=2)
            pg = point_geometry(pt, x)
            sff = second_fundamental_form(pg.embedding, pg.frame, pg.metric)
            second_fd = _fd_embedding_second_derivs(pt, x)
            N = np.einsum("abm,skm->skab", second_fd, pg.frame.normal)
            M = pg.frame.tangent @ pg.embedding.tangents.T
            P = np.linalg.solve(pg.metric.T, M.T).T
            h_fd = np.einsum("ia,jb,skab->sijk", P, P, N)
            assert np.abs(sff.h - h_fd).max() <= 1e-6


def test_h_symmetry_on_fixtures():
    rng = np.random.default_rng(67)
    for pt in (SIGMA2, CUBIC_SL):
        worst = 0.0
        for _ in range(20):
            x = rng.uniform(-1, 1, size=2)
            pg = point_geometry(pt, x)
            sff = second_fundamental_form(pg.embedding, pg.frame, pg.metric)
            worst = max(worst, sff.symmetry_defect())
        assert worst <= 1e-9


def test_mean_curvature_two_routes_agree():
    rng = np.random.default_rng(68)
    # a graph that is lagrangian but not minimal: routes must agree anyway
    pt = PotentialTriple.from_strings(2, "x1^4 + x2^4", "0", "0")
    X = rng.uniform(-1, 1, size=(12, 2))
    batch = batch_surface_data(pt, X)
    for p in range(X.shape[0]):
        pg = point_geometry(pt, X[p])
        sff = second_fundamental_form(pg.embedding, pg.frame, pg.metric)
        assert mean_curvature_norm(sff) == pytest.approx(batch.mean_curvature[p], abs=1e-10)
    assert batch.mean_curvature.max() > 1e-2  # genuinely non-minimal


def test_fixture_graphs_are_minimal():
    rng = np.random.default_rng(69)
    X = rng.uniform(-1, 1, size=(60, 2))
    for pt in (SIGMA2, CUBIC_SL):
        batch = batch_surface_data(pt, X)
        assert batch.ok.all()
        assert batch.mean_curvature.max() <= 1e-7


def test_star_omega_gradient_formula():
    rng = np.random.default_rng(70)
    for pt in (SIGMA2, CUBIC_SL):
        for _ in range(10):
            x = rng.uniform(-1, 1, size=2)
            assert star_omega_gradient_check(pt, x, eta=1e-3) <= 1e-5


def test_bochner_identity_flat_graph_is_exact():
    pt = PotentialTriple.from_strings(2, "0.1*(x1^2 + x2^2)", "0.2*x1*x2", "0")
    rep = bochner_verify(pt, [0.25, -0.4], eta=1e-3)
    assert abs(rep.lhs) <= 1e-9
    assert abs(rep.rhs_quadratic) <= 1e-9
    assert rep.mean_curvature_norm <= 1e-9


def test_bochner_identity_on_cubic_fixture():
    for pt in (SIGMA2, CUBIC_SL):
        rep = bochner_verify(pt, [0.3, 0.2], eta=1e-3)
        assert rep.discrepancy <= 1e-4 * (1 + abs(rep.rhs_quadratic))
        assert abs(rep.rhs_quadratic - rep.rhs_symmetrized) <= 1e-10


def test_bochner_sweep_convergence_is_second_order():
    centers = np.array([[0.0, 0.0], [0.35, -0.15]])
    sups = []
    for eta in (4e-3, 2e-3, 1e-3):
        sw = bochner_sweep(SIGMA2, centers, eta=eta)
        assert (sw.status == BOCH_OK).all()
        sups.append(sw.discrepancy.max())
    assert sups[0] / sups[1] >= 3.0
    assert sups[1] / sups[2] >= 3.0


def test_bochner_rejects_non_minimal_graph():
    pt = PotentialTriple.from_strings(2, "x1^4 + x2^4", "0", "0")
    with pytest.raises(NotMinimal):
        bochner_verify(pt, [0.5, 0.5])
    sw = bochner_sweep(pt, np.array([[0.5, 0.5], [0.2, -0.6]]))
    assert (sw.status == BOCH_NOT_MINIMAL).all()
    assert np.isnan(sw.lhs).all()


def test_bochner_domain_error_near_singularity():
    pt = PotentialTriple.from_strings(1, "log(x1)", "0", "0")
    with pytest.raises(DomainError):
        bochner_verify(pt, [5e-4], eta=1e-3)


def test_star_omega_values_batch():
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    vals, ok = star_omega_values(SIGMA2, X)
    assert ok.all()
    assert vals[0] == pytest.approx(1.0 / 109.0, rel=1e-12)
    assert vals[1] == 1.0
