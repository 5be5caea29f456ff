"""One-parameter families ``vartheta~ + t vartheta`` on the ``Minf`` side.

With ``N = [[u21, 1], [1, u10]]`` (so ``Minf = N / u11``) put::

    X(t) = u11 (vartheta~ + t vartheta) - N

``lam`` is an eigenvalue of the extension with parameter ``vartheta~ + t
vartheta`` iff ``det X(t) = 0`` and it is double iff ``X(t) = 0``. Dividing
by ``u11``, ``det X(t) / u11 = a t^2 + c t + d`` with ``a = u11 det vartheta``
and ``d = E_vartheta~``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AtPoleOfMinf, HypothesisViolated, SearchExhausted, ZeroParameter
from .odecore import as_evaluator
from .spectra import TOL_ROOT, Relation, _real_bd, as_parameter, eigenvalues, in_rho_linf, multiplicity
from .weyl import is_hermitian

QUADRATIC = "quadratic"
LINEAR = "linear"
ALL_OR_NONE = "all-or-none"


class _AllT:
    def __repr__(self):
        return "AllT"

    def __len__(self):
        return 0


AllT = _AllT()


@dataclass(frozen=True, eq=False)
class LineFamily:
    vt_tilde: np.ndarray
    vt: np.ndarray
    t_range: tuple = (-math.inf, math.inf)
    det_vt: complex = field(init=False)

    def __post_init__(self):
        a = np.asarray(self.vt_tilde, dtype=complex).reshape(2, 2)
        b = np.asarray(self.vt, dtype=complex).reshape(2, 2)
        if not (is_hermitian(a, 1e-9) and is_hermitian(b, 1e-9)):
            raise ValueError("line family matrices must be Hermitian")
        object.__setattr__(self, "vt_tilde", 0.5 * (a + a.conj().T))
        object.__setattr__(self, "vt", 0.5 * (b + b.conj().T))
        object.__setattr__(self, "det_vt", complex(np.linalg.det(self.vt)))

    def at(self, t):
        return self.vt_tilde + t * self.vt

    @property
    def singular(self):
        return abs(self.det_vt) < 1e-10 * max(np.linalg.norm(self.vt) ** 2, 1e-300)


@dataclass(frozen=True)
class TSolution:
    lam: float
    roots: object  # list of floats or AllT
    case: str
    c: float
    d: float
    a: float = 0.0
    double_t: Optional[float] = None
    leftover: Optional[float] = None


def vartheta_parameter(vt):
    """Extension with ``Gamma1' = vt Gamma0'`` as a boundary parameter.

    On the original triple this is the relation ``vt Gamma1 = -Gamma0``,
    i.e. the matrix ``-vt^{-1}`` when ``vt`` is invertible.
    """
    vt = np.asarray(vt, dtype=complex)
    return as_parameter(Relation(vt, -np.eye(2)))


def _bd(problem, lam, config, evaluator):
    bd = _real_bd(as_evaluator(problem, config, evaluator).one(float(lam)))
    if not in_rho_linf(bd):
        raise AtPoleOfMinf(f"lambda={lam} lies in the spectrum of Linf (u11={bd.u11:.3e})")
    return bd


def _coefficients(family, bd):
    u10, u11, u21 = bd.u10.real, bd.u11.real, bd.u21.real
    N = np.array([[u21, 1.0], [1.0, u10]])
    P = u11 * family.vt_tilde - N
    Q = u11 * family.vt
    a = float(np.real(np.linalg.det(Q))) / u11
    c = float(np.real(P[0, 0] * Q[1, 1] + P[1, 1] * Q[0, 0] - P[0, 1] * Q[1, 0] - P[1, 0] * Q[0, 1])) / u11
    d = float(np.real(np.linalg.det(P))) / u11
    nt, nv = np.linalg.norm(family.vt_tilde), np.linalg.norm(family.vt)
    scale = (abs(u11) * (nt + nv + 1) ** 2 + abs(u10) + abs(u21) + 2) * (nv + nt + 1)
    return a, c, d, scale


def solve_quadratic(a, b, c):
    """Real roots of ``a t^2 + b t + c`` (``a != 0``) by the stable formula."""
    disc = b * b - 4 * a * c
    if disc < -1e-14 * (b * b + abs(4 * a * c)):
        return []
    disc = max(disc, 0.0)
    if disc == 0.0:
        return [-b / (2 * a)]
    q = -0.5 * (b + math.copysign(math.sqrt(disc), b))
    r1 = q / a
    r2 = c / q if q != 0 else -r1
    return sorted([r1, r2])


def t_roots(problem, family, lam, config=None, evaluator=None, tol=1e-10):
    """Values of ``t`` for which ``lam`` is an eigenvalue of ``vartheta~ + t vartheta``."""
    bd = _bd(problem, lam, config, evaluator)
    a, c, d, scale = _coefficients(family, bd)
    if not family.singular:
        roots = solve_quadratic(a, c, d)
        case = QUADRATIC
    elif abs(c) > tol * scale:
        roots = [-d / c]
        case = LINEAR
    else:
        roots = AllT if abs(d) <= tol * scale else []
        case = ALL_OR_NONE
    dt = None
    left = None
    try:
        dt, left = _double(family, bd, tol)
    except HypothesisViolated:
        pass
    return TSolution(float(lam), roots, case, c, d, a, dt, left)


def t_diag(problem, zeta, eta, lam, config=None, evaluator=None):
    """Closed-form roots for the family ``t diag(zeta, eta)``."""
    if zeta == 0 or eta == 0:
        raise ZeroParameter("zeta and eta must be non-zero")
    bd = _bd(problem, lam, config, evaluator)
    u10, u11, u21 = bd.u10.real, bd.u11.real, bd.u21.real
    disc = (zeta * u10 - eta * u21) ** 2 + 4 * zeta * eta
    if disc < 0:
        return []
    s = math.sqrt(disc)
    base = zeta * u10 + eta * u21
    den = 2 * zeta * eta * u11
    if s == 0:
        return [base / den]
    return sorted([(base + s) / den, (base - s) / den])


def leftover_residual(family, bd):
    """Residual of the scalar side condition accompanying the four t-equations."""
    u10, u11, u21 = bd.u10.real, bd.u11.real, bd.u21.real
    vt, vtt = family.vt, family.vt_tilde
    val = (u11 - 1) * (vtt[0, 1] + vtt[1, 0] + u21 * u10 - vtt[1, 1] * u21 - vtt[0, 0] * u10) + u11 * (
        2 * np.linalg.det(vt) + 1
    )
    return float(abs(val))


def _double(family, bd, tol):
    vt, vtt = family.vt, family.vt_tilde
    failed = []
    for name, val in (("vartheta11", vt[0, 0]), ("vartheta12", vt[0, 1]), ("vartheta22", vt[1, 1])):
        if abs(val) <= 1e-14 * max(1.0, np.linalg.norm(vt)):
            failed.append(name)
    if family.singular:
        failed.append("det vartheta")
    if failed:
        raise HypothesisViolated("hypotheses fail: " + ", ".join(failed), failed)
    u10, u11, u21 = bd.u10.real, bd.u11.real, bd.u21.real
    ts = np.array([
        (u21 - vtt[0, 0] * u11) / (vt[0, 0] * u11),
        (1 - vtt[0, 1] * u11) / (vt[0, 1] * u11),
        (1 - vtt[1, 0] * u11) / (vt[1, 0] * u11),
        (u10 - vtt[1, 1] * u11) / (vt[1, 1] * u11),
    ])
    spread = float(np.max(np.abs(ts - ts[0])))
    t = complex(np.mean(ts))
    if spread > tol * max(1.0, abs(t)) or abs(t.imag) > tol * max(1.0, abs(t)):
        return None, None
    return float(t.real), leftover_residual(family, bd)


def t_double(problem, family, lam, config=None, evaluator=None, tol=1e-8):
    """The unique ``t`` (if any) giving ``lam`` multiplicity two.

    Checks that the four entrywise equations for ``X(t) = 0`` share one
    solution. The side condition residual is reported through
    :func:`leftover_residual` but not used as a gate.
    """
    bd = _bd(problem, lam, config, evaluator)
    t, _ = _double(family, bd, tol)
    return t


@dataclass(frozen=True)
class DisjointPair:
    theta1: np.ndarray
    t: float
    spectrum0: list
    spectrum1: list
    separation: float


def _t_sequence(max_tries):
    seq = []
    k = 0
    while len(seq) < max_tries:
        for base in (1.0, 2.0, 0.5, 3.0, 1.0 / 3.0):
            s = base * (1.7 ** k)
            seq.extend([s, -s])
        k += 1
    return seq[:max_tries]


def disjoint_pair(problem, theta0, lam_range, config=None, evaluator=None, max_tries=30, tol=TOL_ROOT):
    """A parameter whose spectrum on ``lam_range`` avoids that of ``theta0``.

    Walks ``vartheta = t I`` from ``vartheta~ = 0`` and returns
    ``theta1 = -(t I)^{-1}`` for the first admissible ``t``.
    """
    ev = as_evaluator(problem, config, evaluator)
    s0 = [r.lam for r in eigenvalues(problem, theta0, lam_range, evaluator=ev)]
    tried = []
    for t in _t_sequence(max_tries):
        theta1 = -np.eye(2) / t
        s1 = [r.lam for r in eigenvalues(problem, theta1, lam_range, evaluator=ev)]
        tried.append(t)
        sep = min((abs(x - y) for x in s0 for y in s1), default=math.inf)
        if sep > 2 * tol * max(1.0, max(abs(lam_range[0]), abs(lam_range[1]))):
            return DisjointPair(theta1, t, s0, s1, sep)
    raise SearchExhausted("no disjoint partner found on the range", tried)


def certify_root(problem, family, lam, t, config=None, evaluator=None):
    """Multiplicity of ``lam`` for the extension ``vartheta~ + t vartheta``."""
    return multiplicity(problem, vartheta_parameter(family.at(t)), lam, config, evaluator)


__all__ = [
    "AllT",
    "LineFamily",
    "TSolution",
    "t_roots",
    "t_diag",
    "t_double",
    "disjoint_pair",
    "vartheta_parameter",
    "certify_root",
    "leftover_residual",
    "solve_quadratic",
    "DisjointPair",
]
