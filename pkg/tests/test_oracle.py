from __future__ import annotations

import numpy as np
import pytest

from slx.oracle import count_below, discretize, oracle_eigenvalues, oracle_spectrum, tolerance
from slx.spectra import CoupledBC, Relation


def test_robin_free(free):
    got = oracle_eigenvalues(free, np.diag([-1.0, 1.0]), (-2, 17), N=2000)
    m = discretize(free, np.diag([-1.0, 1.0]), N=2000)
    assert np.allclose(got, [-1, 1, 4, 9, 16], atol=tolerance(m))


@pytest.mark.parametrize("param, want", [
    ("L0", [0, 1, 4, 9]),
    ("Linf", [1, 4, 9]),
    (Relation(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), [0.25, 2.25, 6.25]),
    (CoupledBC(0.0, np.eye(2)), [0, 4, 4]),
])
def test_parameter_kinds(free, param, want):
    got = oracle_eigenvalues(free, param, (-0.5, 10), N=2000)
    assert len(got) == len(want)
    assert np.allclose(got, want, atol=1e-3)


def test_second_order(free):
    errs = []
    for N in (250, 500, 1000):
        m = discretize(free, np.zeros((2, 2)), N=N)
        ev = oracle_spectrum(m, k=3).eigenvalues
        errs.append(abs(ev[2] - 9.0))
    rate = np.log2(errs[0] / errs[1]), np.log2(errs[1] / errs[2])
    assert min(rate) > 1.8


def test_inertia(free):
    m = discretize(free, np.zeros((2, 2)), N=1000)
    assert count_below(m, 0.5) == 0
    assert count_below(m, 5.0) == 2
    assert count_below(m, 10.0) == 3


def test_legendre(legendre):
    got = oracle_eigenvalues(legendre, "Linf", (-1, 31), N=4000)
    assert np.allclose(got, [0, 2, 6, 12, 20, 30], atol=1e-2)
