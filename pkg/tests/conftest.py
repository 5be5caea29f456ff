from __future__ import annotations

import pytest

from slx.odecore import BoundaryEvaluator
from slx.problem import builtin


@pytest.fixture(scope="session")
def free():
    return builtin("free")


@pytest.fixture(scope="session")
def free_ev(free):
    return BoundaryEvaluator(free)


@pytest.fixture(scope="session")
def legendre():
    return builtin("legendre")


@pytest.fixture(scope="session")
def legendre_ev(legendre):
    return BoundaryEvaluator(legendre)


@pytest.fixture(scope="session")
def bessel():
    return builtin("bessel", nu=0.25)
