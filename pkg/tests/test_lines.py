from __future__ import annotations

import numpy as np
import pytest

from slx.errors import AtPoleOfMinf, HypothesisViolated, ZeroParameter
from slx.lines import (
    ALL_OR_NONE,
    AllT,
    LineFamily,
    certify_root,
    disjoint_pair,
    t_diag,
    t_double,
    t_roots,
    vartheta_parameter,
)
from slx.spectra import eigenvalues


def test_quarter_diag(free, free_ev):
    assert np.allclose(t_diag(free, 1, 1, 0.25, evaluator=free_ev), [-0.5, 0.5], atol=1e-10)


def test_diag_matches_general(legendre, legendre_ev):
    fam = LineFamily(np.zeros((2, 2)), np.diag([1.5, -0.7]))
    for lam in (0.4, 3.3, 9.1):
        a = t_diag(legendre, 1.5, -0.7, lam, evaluator=legendre_ev)
        b = t_roots(legendre, fam, lam, evaluator=legendre_ev).roots
        assert np.allclose(sorted(a), sorted(b), atol=1e-9)


def test_roots_certified(free, free_ev):
    fam = LineFamily(np.array([[0.2, 0.1], [0.1, -0.4]]), np.array([[1.0, 0.3], [0.3, 2.0]]))
    sol = t_roots(free, fam, 2.0, evaluator=free_ev)
    assert len(sol.roots) <= 2
    for t in sol.roots:
        assert certify_root(free, fam, 2.0, t, evaluator=free_ev) >= 1
        lams = [r.lam for r in eigenvalues(free, vartheta_parameter(fam.at(t)), (1.9, 2.1), evaluator=free_ev)]
        assert any(abs(x - 2.0) < 1e-8 for x in lams)


def test_double_t(free, free_ev):
    # a zero diagonal entry in vartheta breaks the hypotheses
    fam = LineFamily(np.diag([0.3, 0.3]), np.array([[0.0, -0.5], [-0.5, 0.0]]))
    with pytest.raises(HypothesisViolated):
        t_double(free, fam, 0.25, evaluator=free_ev)
    # vartheta~ + vartheta = Minf(1/4), so t = 1 gives a double eigenvalue
    full = np.array([[0.2, -0.5], [-0.5, 0.1]])
    fam = LineFamily(np.array([[-0.2, 0.0], [0.0, -0.1]]), full)
    assert t_double(free, fam, 0.25, evaluator=free_ev) == pytest.approx(1.0, abs=1e-9)
    assert certify_root(free, fam, 0.25, 1.0, evaluator=free_ev) == 2


def test_singular_family_all_or_none(free, free_ev):
    fam = LineFamily(np.zeros((2, 2)), np.diag([1.0, 0.0]))
    sol = t_roots(free, fam, 0.25, evaluator=free_ev)
    assert sol.case == ALL_OR_NONE
    assert sol.c == pytest.approx(0.0, abs=1e-10)
    assert sol.d == pytest.approx(0.5, abs=1e-10)
    assert sol.roots == []
    assert AllT is not sol.roots


def test_errors(free, free_ev):
    with pytest.raises(ZeroParameter):
        t_diag(free, 0, 1, 0.25, evaluator=free_ev)
    fam = LineFamily(np.zeros((2, 2)), np.eye(2))
    with pytest.raises(AtPoleOfMinf):
        t_roots(free, fam, 4.0, evaluator=free_ev)


def test_disjoint_pair(free, free_ev):
    pair = disjoint_pair(free, np.diag([0.5, -0.5]), (0, 20), evaluator=free_ev)
    assert pair.separation > 1e-6
    assert not set(np.round(pair.spectrum0, 6)) & set(np.round(pair.spectrum1, 6))
