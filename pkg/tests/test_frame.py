"""Joint diagonalization and the adapted orthonormal frame."""

from __future__ import annotations

import warnings

import numpy as np
import pytest

from mlg.errors import NotCommuting
from mlg.frame import build_frame, joint_diagonalize, s_matrix, star_omega_spectral
from mlg.geometry import PotentialTriple, hessians, star_omega_det, symplectic_structures


def _random_commuting(rng, n, degenerate=False):
    """Three symmetric matrices sharing one eigenbasis."""
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    lams = rng.uniform(-3, 3, size=(n, 3))
    if degenerate and n >= 2:
        lams[1] = lams[0]  # repeated eigenvalue triple forces refinement
    mats = [Q @ np.diag(lams[:, s]) @ Q.T for s in range(3)]
    return mats, Q, lams


def test_joint_diagonalize_reconstructs():
    rng = np.random.default_rng(101)
    for n in (1, 2, 4, 6):
        mats, _, _ = _random_commuting(rng, n)
        spec = joint_diagonalize(*mats)
        for s in range(3):
            rebuilt = spec.basis @ np.diag(spec.lambdas[:, s]) @ spec.basis.T
            np.testing.assert_allclose(rebuilt, mats[s], atol=1e-9)
        np.testing.assert_allclose(spec.basis.T @ spec.basis, np.eye(n), atol=1e-12)


def test_joint_diagonalize_degenerate_first_matrix():
    # a repeated eigenvalue in H1 must be split by H2/H3 refinement
    rng = np.random.default_rng(102)
    mats, _, _ = _random_commuting(rng, 4, degenerate=True)
    spec = joint_diagonalize(*mats)
    for s in range(3):
        off = spec.basis.T @ mats[s] @ spec.basis - np.diag(spec.lambdas[:, s])
        assert np.abs(off).max() <= 1e-9


def test_joint_diagonalize_deterministic_and_sorted():
    rng = np.random.default_rng(103)
    mats, _, _ = _random_commuting(rng, 5)
    a = joint_diagonalize(*mats)
    b = joint_diagonalize(*mats)
    np.testing.assert_array_equal(a.basis, b.basis)
    np.testing.assert_array_equal(a.lambdas, b.lambdas)
    order = np.lexsort((a.lambdas[:, 2], a.lambdas[:, 1], a.lambdas[:, 0]))
    np.testing.assert_array_equal(order, np.arange(5))


def test_not_commuting_raises_and_warns():
    H1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    H2 = np.array([[1.0, 0.0], [0.0, -1.0]])
    with pytest.raises(NotCommuting):
        joint_diagonalize(H1, H2, np.zeros((2, 2)))
    # a violation between tol and 10*tol downgrades to a warning; the
    # commutator of H1 with eps*H2 has max entry 2*eps
    eps = 5e-7
    H2_soft = np.eye(2) + eps * H2
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        joint_diagonalize(H1, H2_soft, np.zeros((2, 2)), tol=2e-7)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)


def test_frame_rows_one_dimensional_closed_form():
    pt = PotentialTriple.from_strings(1, "x1^3", "x1^3", "x1^3")
    x = np.array([0.5])
    H = hessians(pt, x)
    spec = joint_diagonalize(*H)
    qf = build_frame(spec)
    lam = H[0][0, 0]
    A = np.sqrt(1 + 3 * lam**2)
    np.testing.assert_allclose(qf.tangent[0], np.array([1, lam, lam, lam]) / A, rtol=1e-14)
    np.testing.assert_allclose(qf.normal[0, 0], np.array([-lam, 1, -lam, lam]) / A, rtol=1e-14)
    np.testing.assert_allclose(qf.normal[1, 0], np.array([-lam, lam, 1, -lam]) / A, rtol=1e-14)
    np.testing.assert_allclose(qf.normal[2, 0], np.array([-lam, -lam, lam, 1]) / A, rtol=1e-14)


def test_frame_orthonormal_and_structure_compatible():
    rng = np.random.default_rng(202)
    pt = PotentialTriple.from_strings(
        2, "x1^3 - 3*x1*x2^2", "x1^3 - 3*x1*x2^2", "x1^3 - 3*x1*x2^2"
    )
    I, J, K = symplectic_structures(2).triple
    for _ in range(25):
        x = rng.uniform(-1, 1, size=2)
        spec = joint_diagonalize(*hessians(pt, x))
        qf = build_frame(spec)
        vecs = qf.all_vectors()
        np.testing.assert_allclose(vecs @ vecs.T, np.eye(8), atol=1e-12)
        np.testing.assert_allclose(qf.normal[0], qf.tangent @ I.T, atol=1e-12)
        np.testing.assert_allclose(qf.normal[1], qf.tangent @ J.T, atol=1e-12)
        np.testing.assert_allclose(qf.normal[2], qf.tangent @ K.T, atol=1e-12)


def test_star_omega_spectral_equals_det_route():
    rng = np.random.default_rng(203)
    pt = PotentialTriple.from_strings(3, "x1^3 + x2^3", "0.5*x1^2 - x3^2", "x1^2 + x2^2 + x3^2")
    # separable potentials: diagonal hessians, trivially commuting
    for _ in range(25):
        x = rng.uniform(-1, 1, size=3)
        spec = joint_diagonalize(*hessians(pt, x))
        r_spec = star_omega_spectral(spec)
        r_det = star_omega_det(pt, x)
        assert r_spec == pytest.approx(r_det, rel=1e-12)
        assert np.prod(spec.normalizers) == pytest.approx(1.0 / r_spec, rel=1e-12)


def test_s_matrix_symmetrized_outer_product():
    Li = np.array([1.0, 2.0, -1.0])
    Lj = np.array([0.5, 0.0, 3.0])
    S = s_matrix(Li, Lj)
    np.testing.assert_allclose(S, 0.5 * (np.outer(Li, Lj) + np.outer(Lj, Li)), atol=1e-15)
    np.testing.assert_array_equal(S, S.T)
