"""Weyl functions of the boundary triple and of its self-adjoint extensions.

For ``f = c1 u_1 + c2 u_2`` in the defect space the boundary maps are

    Gamma0 f = (f^[0](a), f^[0](b)),    Gamma1 f = (f^[1](a), -f^[1](b))

and ``M0`` is defined by ``Gamma1 f = M0 Gamma0 f``. In terms of the boundary
data ``(u10, u11, u20, u21)`` at ``b``::

    M0   = [[-u10, 1], [1, -u21]] / u20
    Minf = [[u21, 1], [1, u10]] / u11 = -M0^{-1}
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AtPole, InadmissiblePair
from .odecore import as_evaluator

KINDS = ("M0", "Minf", "Mtheta", "Mrelation")


@dataclass(frozen=True)
class WeylValue:
    lam: complex
    matrix: np.ndarray
    kind: str
    condition_estimate: float

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


# ---------------------------------------------------------------------------
# 2x2 helpers


def det2(m):
    m = np.asarray(m)
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def adj2(m):
    m = np.asarray(m)
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1]
    out[..., 1, 1] = m[..., 0, 0]
    out[..., 0, 1] = -m[..., 0, 1]
    out[..., 1, 0] = -m[..., 1, 0]
    return out


def inv2(m, guard=0.0, which="matrix"):
    """Inverse by the adjugate formula; raises :class:`AtPole` if ``|det| <= guard``."""
    m = np.asarray(m, dtype=complex)
    d = det2(m)
    if np.any(np.abs(d) <= guard):
        raise AtPole(f"{which} is singular", nullity=nullity(m), which=which)
    return adj2(m) / d[..., None, None]


def nullity(m, rel=1e-7):
    """Numerical nullity: singular values below ``rel * (s_max + 1)``."""
    s = np.linalg.svd(np.asarray(m, dtype=complex), compute_uv=False)
    return int(np.sum(s < rel * (s[..., 0] + 1.0)))


def is_hermitian(m, tol=1e-10):
    m = np.asarray(m, dtype=complex)
    return bool(np.max(np.abs(m - m.conj().T)) <= tol * max(1.0, np.max(np.abs(m))))


def _pole_guard(bd, rel=1e-10):
    return rel * max(1.0, bd.scale)


# ---------------------------------------------------------------------------
# vectorised assembly from boundary data


def m0_matrices(bd):
    n = len(bd)
    N = np.empty((n, 2, 2), dtype=complex)
    N[:, 0, 0] = -bd.u10
    N[:, 0, 1] = N[:, 1, 0] = 1.0
    N[:, 1, 1] = -bd.u21
    return N / bd.u20[:, None, None]


def minf_matrices(bd):
    n = len(bd)
    N = np.empty((n, 2, 2), dtype=complex)
    N[:, 0, 0] = bd.u21
    N[:, 0, 1] = N[:, 1, 0] = 1.0
    N[:, 1, 1] = bd.u10
    return N / bd.u11[:, None, None]


def _m0_from(bd):
    return np.array([[-bd.u10, 1.0], [1.0, -bd.u21]], dtype=complex) / bd.u20


def _minf_from(bd):
    return np.array([[bd.u21, 1.0], [1.0, bd.u10]], dtype=complex) / bd.u11


# ---------------------------------------------------------------------------
# public operations


def m0(problem, lam, config=None, evaluator=None, bd=None):
    """``M0(lam)``; raises :class:`AtPole` when ``lam`` is in the spectrum of ``L0``."""
    bd = bd or as_evaluator(problem, config, evaluator).one(lam)
    if abs(bd.u20) <= _pole_guard(bd):
        raise AtPole(f"lambda={lam} is a pole of M0 (u20={bd.u20:.3e})", nullity=None, which="M0")
    return WeylValue(complex(lam), _m0_from(bd), "M0", 1.0 / abs(bd.u20))


def m_inf(problem, lam, config=None, evaluator=None, bd=None):
    """``Minf(lam)``; raises :class:`AtPole` when ``lam`` is in the spectrum of ``Linf``."""
    bd = bd or as_evaluator(problem, config, evaluator).one(lam)
    if abs(bd.u11) <= _pole_guard(bd):
        raise AtPole(f"lambda={lam} is a pole of Minf (u11={bd.u11:.3e})", which="Minf")
    return WeylValue(complex(lam), _minf_from(bd), "Minf", 1.0 / abs(bd.u11))


def _condition(m, d):
    return float(np.linalg.norm(m) ** 2 / abs(d)) if d != 0 else float("inf")


def m_theta(problem, theta, lam, config=None, evaluator=None, bd=None):
    """``M(theta, lam) = (theta - M0(lam))^{-1}`` for a Hermitian matrix ``theta``."""
    theta = np.asarray(theta, dtype=complex)
    if not is_hermitian(theta):
        raise ValueError("theta must be Hermitian")
    M = m0(problem, lam, config, evaluator, bd).matrix
    A = theta - M
    d = det2(A)
    if abs(d) <= 1e-12 * (np.linalg.norm(A) ** 2 + 1.0):
        raise AtPole(
            f"lambda={lam} is an eigenvalue of L(theta)", nullity=nullity(A), which="theta"
        )
    return WeylValue(complex(lam), adj2(A) / d, "Mtheta", _condition(A, d))


def check_admissible(A, B, tol=1e-9):
    """Verify ``A*B = B*A`` and ``AA* + BB* = I = A*A + B*B``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    I = np.eye(2)
    r1 = np.max(np.abs(A.conj().T @ B - B.conj().T @ A))
    r2 = np.max(np.abs(A @ A.conj().T + B @ B.conj().T - I))
    r3 = np.max(np.abs(A.conj().T @ A + B.conj().T @ B - I))
    res = max(r1, r2, r3)
    if res > tol:
        raise InadmissiblePair(f"(A, B) is not an admissible pair (residual {res:.2e})")
    return res


def m_relation(problem, A, B, lam, config=None, evaluator=None, bd=None):
    """``(A* + B* M0)(B* - A* M0)^{-1}`` for an admissible pair ``(A, B)``."""
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    check_admissible(A, B)
    M = m0(problem, lam, config, evaluator, bd).matrix
    As, Bs = A.conj().T, B.conj().T
    D = Bs - As @ M
    d = det2(D)
    if abs(d) <= 1e-12 * (np.linalg.norm(D) ** 2 + 1.0):
        raise AtPole(f"lambda={lam} is an eigenvalue of the extension", nullity=nullity(D), which="relation")
    out = (As + Bs @ M) @ (adj2(D) / d)
    return WeylValue(complex(lam), out, "Mrelation", _condition(D, d))


def herglotz_min_eig(problem, lams, config=None, evaluator=None):
    """Smallest eigenvalue of ``Im M0`` at each (non-real) point of ``lams``."""
    ev = as_evaluator(problem, config, evaluator)
    bd = ev(np.asarray(lams, dtype=complex))
    M = m0_matrices(bd)
    im = (M - np.conj(np.swapaxes(M, -1, -2))) / 2j
    return np.linalg.eigvalsh(im)[:, 0]
