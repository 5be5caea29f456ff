"""Point masses of the matrix spectral measures and eigenvector coordinates.

For ``L0`` the measure comes from ``M0 = N / u20`` with
``N = [[-u10, 1], [1, -u21]]``; near a zero of ``u20`` the Herglotz
function behaves like ``-mu / (lam - lam_n)``, so ``mu = -N / u20'``.

For the extension with ``Gamma1' = vartheta Gamma0'`` the function is
``(vartheta - Minf)^{-1} = adj(X) / E`` with
``X = u11 vartheta - [[u21, 1], [1, u10]]`` and ``E = det(X) / u11``, so
``mu = -adj(X) / E'``.

Every weight is computed twice: from the derivative of the scalar
denominator (central differences with Richardson extrapolation) and from
``-i eps M(lam + i eps)`` extrapolated in ``eps^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import AtPole, NotAnEigenvalue, ResidueMismatch
from .odecore import as_evaluator
from .spectra import e_vartheta, in_rho_linf
from .weyl import adj2, nullity

EPSILONS = (1e-4, 1e-5, 1e-6)
DERIVATIVE = "derivative-residue"
EPSILON = "epsilon-extrapolation"
ROUNDING = 1e-13


@dataclass(frozen=True)
class PointMass:
    lam: float
    weight: np.ndarray
    rank: int
    method: str
    error_estimate: float
    alt_weight: Optional[np.ndarray] = None
    alt_error: Optional[float] = None

    @property
    def trace(self):
        return float(np.real(np.trace(self.weight)))

    def direction(self):
        """Unit vector spanning the range of a rank-one weight."""
        w, V = np.linalg.eigh(self.weight)
        return V[:, -1]

    def as_dict(self):
        W = np.asarray(self.weight)
        return {
            "lambda": self.lam,
            "weight": [[_num(x) for x in row] for row in W],
            "rank": self.rank,
            "trace": self.trace,
            "method": self.method,
            "error": self.error_estimate,
        }


def _num(x):
    x = complex(x)
    return x.real if x.imag == 0 else [x.real, x.imag]


@dataclass(frozen=True)
class EigenvectorRep:
    lam: float
    coefficients: tuple

    def unit(self):
        v = np.asarray(self.coefficients[0], dtype=complex)
        return v / np.linalg.norm(v)

    @property
    def degenerate(self):
        return len(self.coefficients) == 2


def _rank(W, rel=1e-6):
    ev = np.linalg.eigvalsh(W)
    tr = max(float(np.sum(np.abs(ev))), 1e-300)
    return int(np.sum(ev > rel * tr))


def _hermitian_part(A):
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def _central(fun, lam, h):
    """Central difference derivative with two Richardson levels."""
    pts = np.array([lam + h, lam - h, lam + h / 2, lam - h / 2, lam + h / 4, lam - h / 4])
    v = fun(pts)
    d1 = (v[0] - v[1]) / (2 * h)
    d2 = (v[2] - v[3]) / h
    d4 = (v[4] - v[5]) / (h / 2)
    r1 = (4 * d2 - d1) / 3
    r2 = (4 * d4 - d2) / 3
    best = (16 * r2 - r1) / 15
    scale = np.max(np.abs(v))
    err = abs(best - r2) + ROUNDING * max(scale, 1.0) / (h / 4)
    return best, err


def _eps_extrapolate(mfun, lam):
    """``mu`` from ``Herm(-i eps M(lam + i eps))`` with Richardson in ``eps^2``."""
    eps = np.array(EPSILONS)
    M = mfun(lam + 1j * eps)
    vals = _hermitian_part(-1j * eps[:, None, None] * M)
    r1 = (100 * vals[1] - vals[0]) / 99
    r2 = (100 * vals[2] - vals[1]) / 99
    scale = max(np.linalg.norm(r1), 1e-300)
    err = float(np.linalg.norm(r1 - r2)) + ROUNDING / eps[1] * max(scale, 1.0)
    return r1, err


def _check_agreement(wd, ed, we, ee):
    gap = float(np.linalg.norm(wd - we))
    if gap > ed + ee + 1e-10 * (1.0 + np.linalg.norm(wd)):
        raise ResidueMismatch(f"residue methods disagree by {gap:.3e} (bars {ed:.1e} + {ee:.1e})")


def point_mass_L0(problem, lam, config=None, evaluator=None, check=True):
    """Weight of the matrix measure of ``M0`` at an eigenvalue of ``L0``."""
    ev = as_evaluator(problem, config, evaluator)
    lam = float(lam)
    bd = ev.one(lam)
    if abs(bd.u20) > 1e-7 * max(1.0, bd.scale):
        raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue of L0 (u20={abs(bd.u20):.3e})")
    N = np.array([[-bd.u10, 1.0], [1.0, -bd.u21]]).real
    h = max(1e-5, 1e-5 * abs(lam))
    d, derr = _central(lambda x: ev(x).u20.real, lam, h)
    W = -N / d
    W = _hermitian_part(W)
    err_d = float(np.linalg.norm(W) * derr / abs(d))

    def mfun(z):
        b = ev(z)
        out = np.empty((len(z), 2, 2), dtype=complex)
        out[:, 0, 0] = -b.u10
        out[:, 0, 1] = out[:, 1, 0] = 1.0
        out[:, 1, 1] = -b.u21
        return out / b.u20[:, None, None]

    We, err_e = _eps_extrapolate(mfun, lam)
    if check:
        _check_agreement(W, err_d, We, err_e)
    return PointMass(lam, W.real, _rank(W.real), DERIVATIVE, err_d, We.real, err_e)


def _xhat(vt, u10, u11, u21):
    vt = np.asarray(vt, dtype=complex)
    X = u11[..., None, None] * vt - np.stack(
        [np.stack([u21, np.ones_like(u21)], -1), np.stack([np.ones_like(u10), u10], -1)], -2
    )
    return X


def point_mass_theta(problem, vt, lam, config=None, evaluator=None, check=True):
    """Weight of the measure of ``(vartheta - Minf)^{-1}`` at an eigenvalue."""
    ev = as_evaluator(problem, config, evaluator)
    vt = np.asarray(vt, dtype=complex)
    lam = float(lam)
    bd = ev.one(lam)
    if not in_rho_linf(bd):
        raise AtPole(f"lambda={lam} lies in the spectrum of Linf", which="Minf")
    E0, S0 = e_vartheta(vt, ev([lam]))
    if abs(E0[0]) > 1e-7 * S0[0]:
        raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue (|E|={abs(E0[0]):.3e})")

    def mfun(z):
        b = ev(z)
        X = _xhat(vt, b.u10, b.u11, b.u21)
        E, _ = e_vartheta(vt, b)
        return adj2(X) / E[:, None, None]

    We, err_e = _eps_extrapolate(mfun, lam)
    X0 = _xhat(vt, np.array([bd.u10.real]), np.array([bd.u11.real]), np.array([bd.u21.real]))[0]
    if nullity(X0, rel=1e-6) == 2:
        return PointMass(lam, We, _rank(We), EPSILON, err_e)
    h = max(1e-5, 1e-5 * abs(lam))
    d, derr = _central(lambda x: np.real(e_vartheta(vt, ev(x))[0]), lam, h)
    W = _hermitian_part(-adj2(X0) / d)
    err_d = float(np.linalg.norm(W) * derr / abs(d))
    if check:
        _check_agreement(W, err_d, We, err_e)
    W = W.real if np.all(np.abs(W.imag) < 1e-15) else W
    return PointMass(lam, W, _rank(W), DERIVATIVE, err_d, We, err_e)


def eigenvector_rep(problem, vt, lam, config=None, evaluator=None, tol=1e-8):
    """Coordinates of the eigenvector at ``lam`` in the spectral representation.

    ``vt=None`` (or the zero matrix) is ``L0`` and gives ``(1, -u21)``.
    Otherwise the vector spans the kernel of ``X = u11 vartheta - [[u21, 1], [1, u10]]``.
    A degenerate eigenvalue returns the two canonical basis vectors.
    """
    ev = as_evaluator(problem, config, evaluator)
    lam = float(lam)
    bd = ev.one(lam)
    u10, u11, u21 = bd.u10.real, bd.u11.real, bd.u21.real
    if vt is None or not np.any(np.asarray(vt)):
        if abs(bd.u20) > 1e-7 * max(1.0, bd.scale):
            raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue of L0")
        return EigenvectorRep(lam, (np.array([1.0, -u21]),))
    vt = np.asarray(vt, dtype=complex)
    E, S = e_vartheta(vt, ev([lam]))
    if abs(E[0]) > 1e-7 * S[0]:
        raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue (|E|={abs(E[0]):.3e})")
    v1 = np.array([1 - vt[0, 1] * u11, vt[0, 0] * u11 - u21])
    v2 = np.array([vt[1, 1] * u11 - u10, 1 - vt[1, 0] * u11])
    scale = 1.0 + abs(u11) * np.max(np.abs(vt)) + abs(u10) + abs(u21)
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    if np.linalg.norm(v) <= tol * scale:
        return EigenvectorRep(lam, (np.array([1.0, 0.0]), np.array([0.0, 1.0])))
    if np.all(np.abs(v.imag) == 0):
        v = v.real
    return EigenvectorRep(lam, (v,))


def angle(u, v):
    """Angle between the complex lines spanned by ``u`` and ``v``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    u = u / np.linalg.norm(u)
    v = v / np.linalg.norm(v)
    proj = np.vdot(u, v)
    return float(np.arctan2(np.linalg.norm(v - proj * u), abs(proj)))
