from __future__ import annotations

import numpy as np
import pytest

from slx.errors import AtPole, InadmissiblePair
from slx.weyl import check_admissible, herglotz_min_eig, m0, m_inf, m_relation, m_theta


def _m0_free(lam):
    k = np.sqrt(complex(lam))
    c, s = np.cos(k * np.pi), np.sin(k * np.pi)
    return np.array([[-c, 1], [1, -c]]) / (k * s)


@pytest.mark.parametrize("lam", [-2.0, 0.25, 2.5, 1 + 1j, 10 + 0.5j])
def test_m0_closed_form(free, free_ev, lam):
    M = m0(free, lam, evaluator=free_ev).matrix
    assert np.allclose(M, _m0_free(lam), rtol=1e-9, atol=1e-12)


@pytest.mark.parametrize("lam", [-1.3, 0.7, 3 + 2j])
def test_minf_is_minus_inverse(legendre, legendre_ev, lam):
    A = m0(legendre, lam, evaluator=legendre_ev).matrix
    B = m_inf(legendre, lam, evaluator=legendre_ev).matrix
    assert np.allclose(B, -np.linalg.inv(A), rtol=1e-10)


def test_poles(free, free_ev):
    with pytest.raises(AtPole):
        m0(free, 4.0, evaluator=free_ev)
    with pytest.raises(AtPole):
        m_inf(free, 9.0, evaluator=free_ev)


def test_herglotz(legendre, legendre_ev):
    lams = np.linspace(-3, 30, 40) + 0.1j
    assert np.min(herglotz_min_eig(legendre, lams, evaluator=legendre_ev)) > -1e-10


def test_mtheta_pole_at_eigenvalue(free, free_ev):
    # theta = diag(-1, 1) has the eigenfunction e^x at lambda = -1
    with pytest.raises(AtPole):
        m_theta(free, np.diag([-1.0, 1.0]), -1.0, evaluator=free_ev)
    v = m_theta(free, np.diag([-1.0, 1.0]), -0.5 + 0.2j, evaluator=free_ev)
    im = (v.matrix - v.matrix.conj().T) / 2j
    assert np.min(np.linalg.eigvalsh(im)) > 0


def test_relation_identity_is_minf(free, free_ev):
    lam = 2.2 + 0.3j
    A, B = np.eye(2), np.zeros((2, 2))
    r = m_relation(free, A, B, lam, evaluator=free_ev).matrix
    assert np.allclose(r, m_inf(free, lam, evaluator=free_ev).matrix, rtol=1e-10)


def test_inadmissible():
    with pytest.raises(InadmissiblePair):
        check_admissible(np.eye(2), np.eye(2))
