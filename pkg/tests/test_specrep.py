from __future__ import annotations

import numpy as np
import pytest

from slx.errors import AtPole, NotAnEigenvalue
from slx.specrep import DERIVATIVE, angle, eigenvector_rep, point_mass_L0, point_mass_theta


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_free_weights(free, free_ev, n):
    pm = point_mass_L0(free, n * n, evaluator=free_ev)
    want = 2 / np.pi if n == 0 else 4 / np.pi
    assert pm.trace == pytest.approx(want, abs=1e-6)
    assert pm.rank == 1
    assert pm.method == DERIVATIVE
    assert np.linalg.norm(pm.weight - pm.alt_weight) <= pm.error_estimate + pm.alt_error + 1e-9
    rep = eigenvector_rep(free, None, n * n, evaluator=free_ev)
    assert angle(pm.direction(), rep.unit()) < 1e-6


def test_not_an_eigenvalue(free, free_ev):
    with pytest.raises(NotAnEigenvalue):
        point_mass_L0(free, 2.0, evaluator=free_ev)


def test_theta_side_at_linf_pole(free, free_ev):
    with pytest.raises(AtPole):
        point_mass_theta(free, np.zeros((2, 2)), 4.0, evaluator=free_ev)


def test_vartheta_zero_matches_l0(free, free_ev):
    # 0 is in sigma(L0) and rho(Linf): both routes describe the same extension
    a = point_mass_L0(free, 0.0, evaluator=free_ev)
    b = point_mass_theta(free, np.zeros((2, 2)), 0.0, evaluator=free_ev)
    assert np.allclose(a.weight, b.weight, atol=1e-6)


def test_robin_weight(free, free_ev):
    # theta = diag(-1, 1) so vartheta = diag(1, -1); eigenvalue -1
    vt = np.diag([1.0, -1.0])
    pm = point_mass_theta(free, vt, -1.0, evaluator=free_ev)
    assert pm.rank == 1
    assert pm.trace > 0
    rep = eigenvector_rep(free, vt, -1.0, evaluator=free_ev)
    assert not rep.degenerate
    assert angle(pm.direction(), rep.unit()) < 1e-6


def test_degenerate_rep(free, free_ev):
    vt = np.array([[0.0, -0.5], [-0.5, 0.0]])
    rep = eigenvector_rep(free, vt, 0.25, evaluator=free_ev)
    assert rep.degenerate
    pm = point_mass_theta(free, vt, 0.25, evaluator=free_ev)
    assert pm.rank == 2
