from __future__ import annotations

import numpy as np
import pytest

from slx.odecore import BRACKET_SIGN, CONVENTION, green_identity_residual


def _free_closed(lam):
    k = np.sqrt(complex(lam))
    c, s = np.cos(k * np.pi), np.sin(k * np.pi)
    sk = np.pi if abs(k) == 0 else s / k
    return c, -sk, k * s, c  # u10, u11, u20, u21


@pytest.mark.parametrize("lam", [-3.0, 0.0, 0.25, 2.0, 9.5, 30.0, 2 + 1j, -1 + 0.1j])
def test_free_boundary_data(free_ev, lam):
    b = free_ev.one(lam)
    want = _free_closed(lam)
    got = (b.u10, b.u11, b.u20, b.u21)
    for g, w in zip(got, want):
        assert abs(g - w) < 1e-9 * max(1.0, abs(w))


def test_quarter_values(free_ev):
    b = free_ev.one(0.25)
    assert np.allclose([b.u10, b.u11, b.u20, b.u21], [0.0, -2.0, 0.5, 0.0], atol=1e-10)


def test_unit_determinant_legendre(legendre_ev):
    lams = np.linspace(-5, 40, 23)
    b = legendre_ev(lams)
    det = b.u10 * b.u21 - b.u11 * b.u20
    assert np.max(np.abs(det - 1)) < 1e-8


def test_batch_matches_single(legendre_ev):
    lams = np.array([0.3, 5.5, 12.0])
    b = legendre_ev(lams)
    for i, lam in enumerate(lams):
        one = legendre_ev.one(lam)
        assert abs(one.u20 - b.u20[i]) < 1e-12 * max(1, abs(one.u20))


def test_green_identity(free, legendre):
    assert green_identity_residual(free, 3.3) < 1e-8
    assert green_identity_residual(legendre, 2.1) < 1e-6


def test_convention_block():
    assert BRACKET_SIGN == -1
    assert CONVENTION["bracket_sign"] == -1
