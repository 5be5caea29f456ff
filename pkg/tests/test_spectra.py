from __future__ import annotations

import math

import numpy as np
import pytest

from slx.errors import OutsideResolventUnion, UncoveredPoint
from slx.spectra import (
    VIA_CLASSICAL,
    VIA_THETA,
    VIA_VARTHETA,
    CoupledBC,
    Matrix,
    Relation,
    coupled_eigenvalues,
    degenerate_parameter,
    discriminant,
    eigenvalues,
    eigenvalues_L0,
    eigenvalues_Linf,
    multiplicity,
    multiplicity_detail,
    relation_to_matrix,
)


def _lams(recs):
    return np.array([r.lam for r in recs])


def test_distinguished_free(free, free_ev):
    assert np.allclose(_lams(eigenvalues_L0(free, (-1, 20), evaluator=free_ev)), [0, 1, 4, 9, 16], atol=1e-8)
    assert np.allclose(_lams(eigenvalues_Linf(free, (-1, 20), evaluator=free_ev)), [1, 4, 9, 16], atol=1e-8)


def test_legendre_friedrichs(legendre, legendre_ev):
    got = _lams(eigenvalues_Linf(legendre, (-1, 31), evaluator=legendre_ev))
    assert np.allclose(got, [n * (n + 1) for n in range(6)], atol=1e-8)


def test_zero_matrix_is_dirichlet(free, free_ev):
    recs = eigenvalues(free, Matrix(np.zeros((2, 2))), (0, 20), evaluator=free_ev)
    assert np.allclose(_lams(recs), [1, 4, 9, 16], atol=1e-8)
    assert all(r.multiplicity == 1 for r in recs)


def test_robin_pair(free, free_ev):
    # y(0) = y'(0), y(pi) = y'(pi): e^x at -1 and then n^2
    recs = eigenvalues(free, np.diag([-1.0, 1.0]), (-2, 17), evaluator=free_ev)
    assert np.allclose(_lams(recs), [-1, 1, 4, 9, 16], atol=1e-8)


def test_mixed_relation(free, free_ev):
    # Dirichlet at 0 and Neumann at pi: (n + 1/2)^2
    rel = Relation(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
    assert rel.mul_dim == 1
    recs = eigenvalues(free, rel, (0, 13), evaluator=free_ev)
    assert np.allclose(_lams(recs), [0.25, 2.25, 6.25, 12.25], atol=1e-8)


def test_l0_relation(free, free_ev):
    rel = Relation(np.zeros((2, 2)), np.eye(2))
    assert rel.mul_dim == 2
    assert np.allclose(_lams(eigenvalues(free, rel, (-1, 10), evaluator=free_ev)), [0, 1, 4, 9], atol=1e-8)


def test_periodic(free, free_ev):
    bc = CoupledBC(0.0, np.eye(2))
    recs = coupled_eigenvalues(free, bc, (-1, 20), evaluator=free_ev)
    assert np.allclose(_lams(recs), [0, 4, 16], atol=1e-7)
    assert [r.multiplicity for r in recs] == [1, 2, 2]
    via_rel = eigenvalues(free, bc, (-1, 20), evaluator=free_ev)
    assert np.allclose(_lams(via_rel), [0, 4, 16], atol=1e-7)
    assert [r.multiplicity for r in via_rel] == [1, 2, 2]


def test_antiperiodic(free, free_ev):
    recs = eigenvalues(free, CoupledBC(math.pi, np.eye(2)), (0, 26), evaluator=free_ev)
    assert np.allclose(_lams(recs), [1, 9, 25], atol=1e-7)
    assert all(r.multiplicity == 2 for r in recs)


def test_discriminant_free(free, free_ev):
    lams = np.linspace(0, 25, 51)
    D = discriminant(free, np.eye(2), lams, evaluator=free_ev)
    assert np.max(np.abs(D - 2 * np.cos(np.sqrt(lams) * np.pi))) < 1e-8


def test_degenerate_quarter(free, free_ev):
    dp = degenerate_parameter(free, 0.25, evaluator=free_ev)
    assert np.allclose(dp.theta, [[0, 2], [2, 0]], atol=1e-9)
    assert np.allclose(dp.vartheta, [[0, -0.5], [-0.5, 0]], atol=1e-9)
    m, via = multiplicity_detail(free, dp.theta, 0.25, evaluator=free_ev)
    assert (m, via) == (2, VIA_THETA)
    recs = eigenvalues(free, dp.theta, (0, 1), evaluator=free_ev)
    assert any(abs(r.lam - 0.25) < 1e-8 and r.multiplicity == 2 and r.degenerate for r in recs)


def test_degenerate_outside_union(free, free_ev):
    with pytest.raises(OutsideResolventUnion):
        degenerate_parameter(free, 4.0, evaluator=free_ev)
    with pytest.raises(ValueError):
        degenerate_parameter(free, -1.0, evaluator=free_ev)


def test_vartheta_path(free, free_ev):
    # 0 is in sigma(L0) but not sigma(Linf)
    m, via = multiplicity_detail(free, CoupledBC(0.0, np.eye(2)), 0.0, evaluator=free_ev)
    assert (m, via) == (1, VIA_VARTHETA)


def test_classical_fallback(free, free_ev):
    theta = np.zeros((2, 2))
    assert multiplicity_detail(free, theta, 4.0, evaluator=free_ev) == (1, VIA_CLASSICAL)
    with pytest.raises(UncoveredPoint):
        multiplicity(free, np.diag([1.0, 2.0]), 4.0, evaluator=free_ev, allow_classical=False)


def test_relation_reduction_reproduces(free, free_ev):
    rel = Relation.from_parts(0.7, np.array([1.0, 1.0j]) / np.sqrt(2))
    assert rel.mul_dim == 1
    for r in eigenvalues(free, rel, (0, 15), evaluator=free_ev):
        red = relation_to_matrix(free, rel, r.lam, evaluator=free_ev)
        assert red.case in ("K3", "K4", "matrix")
        assert multiplicity(free, red.matrix, r.lam, evaluator=free_ev) >= 1


def test_complex_theta_simple(free, free_ev):
    theta = np.array([[0.7, 0.4 + 0.9j], [0.4 - 0.9j, -1.2]])
    recs = eigenvalues(free, theta, (-5, 30), evaluator=free_ev)
    assert recs
    assert all(r.multiplicity == 1 for r in recs)


def test_bessel_friedrichs_zeros(bessel):
    mp = pytest.importorskip("mpmath")
    # principal branch sqrt(x) J_nu(k x) at 0 and y(1) = 0 at the regular end
    want = [float(mp.besseljzero(0.25, n)) ** 2 for n in (1, 2, 3)]
    got = _lams(eigenvalues_Linf(bessel, (0, want[-1] + 1)))
    assert np.allclose(got, want, rtol=1e-8)
