"""Eigenvalues and multiplicities of the self-adjoint extensions.

A self-adjoint extension is described by a boundary parameter: a Hermitian
matrix ``theta`` (boundary condition ``Gamma1 f = theta Gamma0 f``) or a
self-adjoint relation given in kernel form ``A* Gamma1 f = B* Gamma0 f``.

For a solution ``f = c1 u_1 + c2 u_2`` one has ``Gamma0 f = G0 c`` and
``Gamma1 f = G1 c`` with::

    G0 = [[1, 0], [u10, u20]],     G1 = [[0, 1], [-u11, -u21]]

so the eigenvalues are the zeros of ``det(A* G1 - B* G0)`` and the
multiplicity is the nullity of that characteristic matrix. For a matrix
``theta`` the determinant reduces to the entire function::

    E_theta = det(theta) u20 + theta11 u21 + theta22 u10 + 2 Re theta12 + u11
            = u20 det(theta - M0)

which has no poles, so no switching of parametrisation is needed to locate
roots; multiplicities are still certified through ``theta - M0`` or
``vartheta - Minf`` where those are defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (
    AtPole,
    GridTooCoarse,
    NotAnEigenvalue,
    OutsideResolventUnion,
    UncoveredPoint,
)
from .odecore import as_evaluator
from .weyl import adj2, check_admissible, det2, is_hermitian, nullity

TOL_ROOT = 1e-10
DENSITY = 400.0
MAX_GRID = 60_000
POLE_GUARD = 1e-10
COMPLEX_STEP = 1e-20

VIA_THETA = "Gamma0-triple"
VIA_VARTHETA = "Gamma0'-triple"
VIA_CLASSICAL = "classical"


# ---------------------------------------------------------------------------
# boundary parameters


def _sqrtm_inv_h(S):
    w, V = np.linalg.eigh(S)
    return (V / np.sqrt(w)) @ V.conj().T


@dataclass(frozen=True, eq=False)
class Matrix:
    """Hermitian boundary matrix ``theta``."""

    theta: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=complex).reshape(2, 2)
        if not is_hermitian(t, 1e-9):
            raise ValueError("theta must be Hermitian")
        object.__setattr__(self, "theta", 0.5 * (t + t.conj().T))

    mul_dim = 0

    @property
    def is_real(self):
        return bool(np.all(np.abs(self.theta.imag) < 1e-14))

    def pair(self):
        c = _sqrtm_inv_h(np.eye(2) + self.theta @ self.theta)
        return c, self.theta @ c

    def to_relation(self):
        A, B = self.pair()
        return Relation(A, B)


@dataclass(frozen=True, eq=False)
class Relation:
    """Self-adjoint relation ``{(x, y) : A* y = B* x}`` in ``C^2``.

    The pair is normalised on construction so that ``A*A + B*B = I``.
    """

    A: np.ndarray
    B: np.ndarray
    mul_dim: int = field(init=False)
    theta_op: Optional[float] = field(init=False, default=None)
    op_direction: Optional[np.ndarray] = field(init=False, default=None)
    mul_direction: Optional[np.ndarray] = field(init=False, default=None)

    def __post_init__(self):
        A = np.asarray(self.A, dtype=complex).reshape(2, 2)
        B = np.asarray(self.B, dtype=complex).reshape(2, 2)
        G = _sqrtm_inv_h(A.conj().T @ A + B.conj().T @ B)
        # left-multiplying the kernel equation by G keeps the relation
        A, B = A @ G.conj().T, B @ G.conj().T
        check_admissible(A, B, tol=1e-8)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        U, s, _ = np.linalg.svd(A)
        rank = int(np.sum(s > 1e-10))
        object.__setattr__(self, "mul_dim", 2 - rank)
        if self.mul_dim == 1:
            o, m = U[:, 0], U[:, 1]
            # any y with A* y = B* o; its component along o is theta_op
            y, *_ = np.linalg.lstsq(A.conj().T, B.conj().T @ o, rcond=None)
            object.__setattr__(self, "op_direction", o)
            object.__setattr__(self, "mul_direction", m)
            object.__setattr__(self, "theta_op", float(np.real(np.vdot(o, y))))

    @classmethod
    def from_kernel(cls, C0, C1):
        """Relation ``{(x, y) : C0 x + C1 y = 0}``."""
        C0 = np.asarray(C0, dtype=complex)
        C1 = np.asarray(C1, dtype=complex)
        return cls(C1.conj().T, -C0.conj().T)

    @classmethod
    def from_parts(cls, theta_op, op_direction):
        """Relation with one-dimensional operator part along ``op_direction``."""
        o = np.asarray(op_direction, dtype=complex)
        o = o / np.linalg.norm(o)
        m = np.array([-np.conj(o[1]), np.conj(o[0])])
        A = np.column_stack([o, np.zeros(2)])
        B = np.column_stack([theta_op * o, m])
        return cls(A, B)

    @classmethod
    def l0(cls):
        return cls(np.zeros((2, 2)), np.eye(2))

    def matrix(self):
        """Equivalent Hermitian matrix when ``mul_dim == 0``."""
        if self.mul_dim != 0:
            raise ValueError("relation is multivalued")
        t = np.linalg.solve(self.A.conj().T, self.B.conj().T)
        return 0.5 * (t + t.conj().T)

    def dual(self):
        """The same extension seen from the triple ``(Gamma1, -Gamma0)``."""
        return Relation(-self.B, self.A)


@dataclass(frozen=True)
class CoupledBC:
    """Coupled conditions ``Y(b) = e^{i alpha} R Y(a)`` with ``Y = (y^[0], y^[1])``."""

    alpha: float
    R: np.ndarray

    def __post_init__(self):
        R = np.asarray(self.R, dtype=float).reshape(2, 2)
        if abs(np.linalg.det(R) - 1.0) > 1e-10:
            raise ValueError("det R must equal 1")
        if not -math.pi < self.alpha <= math.pi:
            raise ValueError("alpha must lie in (-pi, pi]")
        object.__setattr__(self, "R", R)

    def to_relation(self):
        e = np.exp(1j * self.alpha)
        r = self.R
        # Gamma0 = (y0a, y0b), Gamma1 = (y1a, -y1b)
        C0 = np.array([[-e * r[0, 0], 1.0], [-e * r[1, 0], 0.0]])
        C1 = np.array([[-e * r[0, 1], 0.0], [-e * r[1, 1], -1.0]])
        return Relation.from_kernel(C0, C1)


def as_parameter(param):
    """Normalise user input to :class:`Matrix` or :class:`Relation`."""
    if isinstance(param, CoupledBC):
        param = param.to_relation()
    if isinstance(param, Relation):
        if param.mul_dim == 0:
            return Matrix(param.matrix())
        return param
    if isinstance(param, Matrix):
        return param
    return Matrix(np.asarray(param, dtype=complex))


@dataclass(frozen=True)
class EigenvalueRecord:
    lam: float
    multiplicity: int
    degenerate: bool
    residual: float
    via: str

    def as_dict(self):
        return {
            "lambda": self.lam,
            "multiplicity": self.multiplicity,
            "degenerate": self.degenerate,
            "residual": self.residual,
            "via": self.via,
        }


# ---------------------------------------------------------------------------
# characteristic functions (all analytic in lambda, real on the real axis)


def G_matrices(bd):
    n = len(bd)
    G0 = np.zeros((n, 2, 2), dtype=complex)
    G1 = np.zeros((n, 2, 2), dtype=complex)
    G0[:, 0, 0] = 1.0
    G0[:, 1, 0] = bd.u10
    G0[:, 1, 1] = bd.u20
    G1[:, 0, 1] = 1.0
    G1[:, 1, 0] = -bd.u11
    G1[:, 1, 1] = -bd.u21
    return G0, G1


def characteristic(A, B, bd):
    """``A* G1 - B* G0`` for every entry of a :class:`BoundaryArray`."""
    G0, G1 = G_matrices(bd)
    return A.conj().T[None] @ G1 - B.conj().T[None] @ G0


def _scale(dt, t11, t22, s12, bd):
    # size of the terms, floored so that it does not vanish with the value
    size = np.abs(bd.u10) + np.abs(bd.u11) + np.abs(bd.u20) + np.abs(bd.u21)
    return (1.0 + abs(dt) + abs(t11) + abs(t22) + abs(s12)) * (1.0 + size)


def e_theta(theta, bd):
    """Pole-free eigenvalue function of ``L(theta)`` and its natural scale."""
    t = np.asarray(theta, dtype=complex)
    dt = float(np.real(det2(t)))
    t11, t22 = float(t[0, 0].real), float(t[1, 1].real)
    s12 = float(2 * t[0, 1].real)
    val = dt * bd.u20 + t11 * bd.u21 + t22 * bd.u10 + s12 + bd.u11
    return val, _scale(dt, t11, t22, s12, bd)


def e_vartheta(vt, bd):
    """Pole-free eigenvalue function on the ``Minf`` side: ``u11 det(vartheta - Minf)``."""
    t = np.asarray(vt, dtype=complex)
    dt = float(np.real(det2(t)))
    t11, t22 = float(t[0, 0].real), float(t[1, 1].real)
    s12 = float(2 * t[0, 1].real)
    val = dt * bd.u11 - t11 * bd.u10 - t22 * bd.u21 + s12 + bd.u20
    return val, _scale(dt, t11, t22, s12, bd)


class _RelationFunction:
    def __init__(self, rel):
        self.rel = rel
        self.phase = None

    def __call__(self, bd):
        C = characteristic(self.rel.A, self.rel.B, bd)
        d = det2(C)
        if self.phase is None:
            k = int(np.argmax(np.abs(d)))
            self.phase = np.exp(-1j * np.angle(d[k])) if abs(d[k]) > 0 else 1.0
        # normalised pair: entries of C are bounded by those of G0, G1
        scale = (1.0 + np.abs(bd.u10) + np.abs(bd.u11) + np.abs(bd.u20) + np.abs(bd.u21)) ** 2
        return d * self.phase, scale


def eigen_function(param):
    """Callable mapping boundary data to ``(value, scale)`` of the eigenvalue function."""
    param = as_parameter(param)
    if isinstance(param, Matrix):
        return lambda bd: e_theta(param.theta, bd)
    if param.mul_dim == 2:
        return lambda bd: (bd.u20, np.abs(bd.u20) + 1.0)
    return _RelationFunction(param)


# ---------------------------------------------------------------------------
# root finding


def _illinois(fun, a, b, fa, fb, xtol, maxiter=200):
    """Vectorised Illinois regula falsi on brackets with ``fa * fb < 0``.

    ``fun(c, idx)`` evaluates the function of bracket ``idx[j]`` at ``c[j]``.
    """
    a, b, fa, fb = (np.array(v, dtype=float) for v in (a, b, fa, fb))
    xtol = np.broadcast_to(np.asarray(xtol, dtype=float), a.shape)
    side = np.zeros_like(a)
    width0 = np.abs(b - a)
    stall = np.zeros(a.shape, dtype=int)
    done = (fa == 0) | (fb == 0) | (np.abs(b - a) <= xtol)
    for _ in range(maxiter):
        act = np.flatnonzero(~done)
        if act.size == 0:
            break
        A, Bv, FA, FB = a[act], b[act], fa[act], fb[act]
        c = (A * FB - Bv * FA) / (FB - FA)
        bis = (stall[act] >= 3) | ~np.isfinite(c) | (c <= np.minimum(A, Bv)) | (c >= np.maximum(A, Bv))
        c = np.where(bis, 0.5 * (A + Bv), c)
        fc = fun(c, act)
        same_b = np.sign(fc) == np.sign(FB)
        nb = np.where(same_b, c, Bv)
        nfb = np.where(same_b, fc, FB)
        na = np.where(same_b, A, c)
        nfa = np.where(same_b, FA, fc)
        s = side[act]
        nfa = np.where(same_b & (s == 1), nfa / 2, nfa)
        nfb = np.where(~same_b & (s == -1), nfb / 2, nfb)
        side[act] = np.where(same_b, 1, -1)
        new_w = np.abs(nb - na)
        stall[act] = np.where(new_w > 0.5 * width0[act], stall[act] + 1, 0)
        width0[act] = np.where(stall[act] == 0, new_w, width0[act])
        a[act], b[act], fa[act], fb[act] = na, nb, nfa, nfb
        zero = fc == 0
        a[act[zero]] = b[act[zero]] = c[zero]
        done[act] = zero | (new_w <= xtol[act])
    if not np.all(done):
        raise GridTooCoarse("root refinement did not converge")
    pick_a = np.abs(fa) < np.abs(fb)
    return np.where(pick_a, a, b)


class _Scan:
    """Evaluates several real eigenvalue functions through one boundary evaluator."""

    def __init__(self, ev, funcs):
        self.ev = ev
        self.funcs = funcs

    def values(self, lams, owners):
        lams = np.asarray(lams, dtype=float)
        owners = np.asarray(owners)
        bd = self.ev(lams)
        val = np.empty(lams.size)
        scale = np.empty(lams.size)
        for j in np.unique(owners):
            sel = owners == j
            v, s = self.funcs[j](bd[sel])
            val[sel] = np.real(v)
            scale[sel] = s
        return val, scale

    def derivative(self, lams, owners):
        """Complex-step derivative (the functions are real-analytic)."""
        lams = np.asarray(lams, dtype=float)
        owners = np.asarray(owners)
        h = COMPLEX_STEP * np.maximum(1.0, np.abs(lams))
        bdz = self.ev(lams + 1j * h)
        bd0 = self.ev(lams)
        out = np.empty(lams.size)
        for j in np.unique(owners):
            sel = owners == j
            vz, _ = self.funcs[j](bdz[sel])
            v0, _ = self.funcs[j](bd0[sel])
            # subtracting the on-axis value removes rounding in phase factors
            out[sel] = np.imag(vz - v0) / h[sel]
        return out


def find_roots_many(ev, funcs, lo, hi, density=DENSITY, tol=TOL_ROOT):
    """Real zeros of each function in ``funcs`` on ``[lo, hi]``.

    All functions share one grid of boundary data and one batched
    refinement. Returns, per function, a list of ``(lam, order, residual)``
    with ``order`` 1 for sign changes and 2 for touching zeros (certified
    later by a nullity test).
    """
    nf = len(funcs)
    if hi <= lo or nf == 0:
        return [[] for _ in range(nf)]
    scan = _Scan(ev, funcs)
    n = int(min(MAX_GRID, max(64, math.ceil(density * (hi - lo))))) + 1
    grid = np.linspace(lo, hi, n)
    bd = ev(grid)
    found = [[] for _ in range(nf)]
    brackets = []  # (owner, a, b, fa, fb)
    touch = []  # (owner, i, a, b, F_i)
    for j, func in enumerate(funcs):
        v, _ = func(bd)
        F = np.real(v)
        for i in np.flatnonzero(F == 0.0):
            found[j].append((float(grid[i]), 1))
        sgn = np.sign(F)
        for i in np.flatnonzero(sgn[:-1] * sgn[1:] < 0):
            brackets.append((j, grid[i], grid[i + 1], F[i], F[i + 1]))
        absF = np.abs(F)
        cand = np.arange(1, n - 1)[
            (absF[1:-1] <= absF[:-2]) & (absF[1:-1] <= absF[2:])
            & (sgn[:-2] == sgn[1:-1]) & (sgn[1:-1] == sgn[2:]) & (sgn[1:-1] != 0)
        ]
        if cand.size:
            f0, f1, f2 = F[cand - 1], F[cand], F[cand + 1]
            curv = f0 - 2 * f1 + f2
            ok = curv != 0
            off = np.clip(np.where(ok, 0.5 * (f0 - f2) / np.where(ok, curv, 1.0), 0.0), -1.0, 1.0)
            fvert = f1 - 0.25 * (f0 - f2) * off
            # keep minima whose parabola reaches (or nearly reaches) zero
            keep = (np.abs(fvert) <= 0.05 * np.abs(f1)) | (np.sign(fvert) != np.sign(f1))
            for i in cand[keep]:
                touch.append((j, i, grid[i - 1], grid[i + 1], F))
    if touch:
        own = np.array([t[0] for t in touch])
        a = np.array([t[2] for t in touch])
        b = np.array([t[3] for t in touch])
        da = scan.derivative(a, own)
        db = scan.derivative(b, own)
        good = np.flatnonzero(np.sign(da) != np.sign(db))
        if good.size:
            sub_own = own[good]
            xt = tol * 1e-3 * np.maximum(1.0, np.abs(a[good]))
            crit = _illinois(lambda c, idx: scan.derivative(c, sub_own[idx]), a[good], b[good], da[good], db[good], xt)
            Fc, Sc = scan.values(crit, sub_own)
            for g, lc, fc, sc in zip(good, crit, Fc, Sc):
                j, i, _, _, F = touch[g]
                if abs(fc) <= 1e-9 * sc:
                    found[j].append((float(lc), 2))
                elif np.sign(fc) != np.sign(F[i]):
                    brackets.append((j, grid[i - 1], lc, F[i - 1], fc))
                    brackets.append((j, lc, grid[i + 1], fc, F[i + 1]))
    if brackets:
        own = np.array([br[0] for br in brackets])
        a, b, fa, fb = (np.array([br[k] for br in brackets], dtype=float) for k in (1, 2, 3, 4))
        xt = tol * 1e-3 * np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
        roots = _illinois(lambda c, idx: scan.values(c, own[idx])[0], a, b, fa, fb, xt)
        for j, r in zip(own, roots):
            found[j].append((float(r), 1))

    out = []
    for j in range(nf):
        merged = []
        for lam, order in sorted(found[j]):
            if merged and abs(lam - merged[-1][0]) <= 2 * tol * max(1.0, abs(lam)):
                if order > merged[-1][1]:
                    merged[-1] = (lam, order)
                continue
            merged.append((lam, order))
        out.append(merged)
    lams = np.array([m[0] for ms in out for m in ms])
    owners = np.array([j for j, ms in enumerate(out) for _ in ms], dtype=int)
    if lams.size == 0:
        return [[] for _ in range(nf)]
    Fv, Sv = scan.values(lams, owners)
    res = (np.abs(Fv) / np.maximum(Sv, 1e-300)).tolist()
    k = 0
    final = []
    for ms in out:
        final.append([(lam, order, res[k + t]) for t, (lam, order) in enumerate(ms)])
        k += len(ms)
    return final


def find_roots(ev, func, lo, hi, density=DENSITY, tol=TOL_ROOT):
    """Real zeros of a single eigenvalue function; see :func:`find_roots_many`."""
    return find_roots_many(ev, [func], lo, hi, density, tol)[0]


# ---------------------------------------------------------------------------
# location helpers


def in_rho_l0(bd, guard=POLE_GUARD):
    return abs(bd.u20) > guard * max(1.0, bd.scale)


def in_rho_linf(bd, guard=POLE_GUARD):
    return abs(bd.u11) > guard * max(1.0, bd.scale)


def basic_certificate(bd):
    """Residual ``|u10 u21 - 1|``, which vanishes on the spectra of ``L0`` and ``Linf``."""
    return float(abs(bd.u10 * bd.u21 - 1.0))


def _via(bd):
    if in_rho_l0(bd):
        return VIA_THETA
    if in_rho_linf(bd):
        return VIA_VARTHETA
    return VIA_CLASSICAL


def _real_bd(bd):
    return type(bd)(bd.lam.real if hasattr(bd.lam, "real") else bd.lam, bd.u10.real, bd.u11.real,
                    bd.u20.real, bd.u21.real, bd.wronskian_residual, bd.error_estimate)


def _m0(bd):
    return np.array([[-bd.u10, 1.0], [1.0, -bd.u21]], dtype=complex) / bd.u20


def _minf(bd):
    return np.array([[bd.u21, 1.0], [1.0, bd.u10]], dtype=complex) / bd.u11


# ---------------------------------------------------------------------------
# distinguished extensions


def _records_simple(roots, ev):
    out = []
    if not roots:
        return out
    bds = ev(np.array([r[0] for r in roots]))
    for (lam, order, res), i in zip(roots, range(len(roots))):
        out.append(EigenvalueRecord(lam, 1, False, res, _via(bds[i])))
    return out


def eigenvalues_L0(problem, lam_range, config=None, evaluator=None, density=DENSITY):
    """Eigenvalues of ``L0`` (zeros of ``u20``) on ``lam_range``."""
    ev = as_evaluator(problem, config, evaluator)
    lo, hi = lam_range
    roots = find_roots(ev, lambda bd: (bd.u20, np.abs(bd.u20) + np.abs(bd.u10) + np.abs(bd.u21) + 1.0), lo, hi, density)
    return _records_simple(roots, ev)


def eigenvalues_Linf(problem, lam_range, config=None, evaluator=None, density=DENSITY):
    """Eigenvalues of ``Linf`` (zeros of ``u11``) on ``lam_range``."""
    ev = as_evaluator(problem, config, evaluator)
    lo, hi = lam_range
    roots = find_roots(ev, lambda bd: (bd.u11, np.abs(bd.u11) + np.abs(bd.u10) + np.abs(bd.u21) + 1.0), lo, hi, density)
    return _records_simple(roots, ev)


# ---------------------------------------------------------------------------
# multiplicity


def _is_l0(param):
    return isinstance(param, Relation) and param.mul_dim == 2


def _is_linf(param):
    return isinstance(param, Matrix) and np.max(np.abs(param.theta)) == 0.0


def multiplicity_detail(problem, param, lam, config=None, evaluator=None, bd=None, allow_classical=True):
    """``(multiplicity, via)`` of ``lam`` for the extension ``param``."""
    param = as_parameter(param)
    bd = bd or as_evaluator(problem, config, evaluator).one(float(lam))
    bd = _real_bd(bd)
    l0_ok, linf_ok = in_rho_l0(bd), in_rho_linf(bd)
    if l0_ok:
        M = _m0(bd)
        if isinstance(param, Matrix):
            return nullity(param.theta - M), VIA_THETA
        if param.mul_dim == 2:
            return 0, VIA_THETA
        try:
            red = relation_to_matrix(problem, param, lam, bd=bd, side="theta")
        except NotAnEigenvalue:
            return 0, VIA_THETA
        return nullity(red.matrix - M), VIA_THETA
    if linf_ok:
        Mi = _minf(bd)
        if _is_l0(param):
            return 1, VIA_VARTHETA
        if isinstance(param, Matrix) and abs(np.linalg.det(param.theta)) > 1e-12 * (1 + np.linalg.norm(param.theta) ** 2):
            vt = -np.linalg.inv(param.theta)
            return nullity(vt - Mi), VIA_VARTHETA
        rel = param.to_relation() if isinstance(param, Matrix) else param
        dual = rel.dual()
        if dual.mul_dim == 0:
            return nullity(dual.matrix() - Mi), VIA_VARTHETA
        try:
            red = relation_to_matrix(problem, rel, lam, bd=bd, side="vartheta")
        except NotAnEigenvalue:
            return 0, VIA_VARTHETA
        return nullity(red.matrix - Mi), VIA_VARTHETA
    cert = basic_certificate(bd)
    if _is_l0(param) or _is_linf(param):
        return (1 if abs(bd.u20 if _is_l0(param) else bd.u11) <= POLE_GUARD * max(1, bd.scale) else 0), VIA_CLASSICAL
    if not allow_classical:
        raise UncoveredPoint(
            f"lambda={lam} lies in the spectra of both L0 and Linf", lam=lam, certificate=cert
        )
    rel = param.to_relation() if isinstance(param, Matrix) else param
    C = characteristic(rel.A, rel.B, _wrap(bd))[0]
    return nullity(C), VIA_CLASSICAL


def _wrap(bd):
    from .odecore import BoundaryArray

    return BoundaryArray(
        np.array([bd.lam]), np.array([bd.u10]), np.array([bd.u11]), np.array([bd.u20]),
        np.array([bd.u21]), np.array([bd.wronskian_residual]), np.array([bd.error_estimate]),
    )


def multiplicity(problem, param, lam, config=None, evaluator=None, bd=None, allow_classical=True):
    """Dimension of ``ker(L(param) - lam)`` (0, 1 or 2)."""
    return multiplicity_detail(problem, param, lam, config, evaluator, bd, allow_classical)[0]


# ---------------------------------------------------------------------------
# general extensions


def eigenvalues_many(problem, params, lam_range, config=None, evaluator=None, density=DENSITY, allow_classical=True):
    """Eigenvalues of several extensions at once; one list of records per parameter."""
    params = [as_parameter(p) for p in params]
    ev = as_evaluator(problem, config, evaluator)
    lo, hi = lam_range
    roots = find_roots_many(ev, [eigen_function(p) for p in params], lo, hi, density)
    out = []
    for param, rs in zip(params, roots):
        if not rs:
            out.append([])
            continue
        bds = ev(np.array([r[0] for r in rs]))
        recs = []
        for i, (lam, order, res) in enumerate(rs):
            m, via = multiplicity_detail(problem, param, lam, bd=bds[i], allow_classical=allow_classical)
            if m == 0:
                # a zero of the determinant always carries a kernel; fall back to its order
                m = order
            recs.append(EigenvalueRecord(lam, m, m == 2 and via != VIA_CLASSICAL, res, via))
        out.append(recs)
    return out


def eigenvalues(problem, param, lam_range, config=None, evaluator=None, density=DENSITY, allow_classical=True):
    """Eigenvalues of the extension ``param`` on ``lam_range`` with multiplicities."""
    param = as_parameter(param)
    if _is_l0(param):
        return eigenvalues_L0(problem, lam_range, config, evaluator, density)
    return eigenvalues_many(problem, [param], lam_range, config, evaluator, density, allow_classical)[0]


# ---------------------------------------------------------------------------
# degeneracy


@dataclass(frozen=True)
class DegenerateParameter:
    lam: float
    theta: Optional[np.ndarray]
    vartheta: Optional[np.ndarray]
    certificate: float


def degenerate_parameter(problem, lam, config=None, evaluator=None):
    """Matrices making ``lam`` an eigenvalue of multiplicity two.

    ``theta = M0(lam)`` when ``lam`` is in the resolvent set of ``L0`` and
    ``vartheta = Minf(lam) = -theta^{-1}`` when ``lam`` is in that of ``Linf``.
    """
    lam = float(lam)
    if problem.K is not None and lam < problem.K:
        raise ValueError(f"lambda={lam} lies below the lower bound K={problem.K}")
    bd = _real_bd(as_evaluator(problem, config, evaluator).one(lam))
    theta = _m0(bd).real if in_rho_l0(bd) else None
    vartheta = _minf(bd).real if in_rho_linf(bd) else None
    if theta is None and vartheta is None:
        raise OutsideResolventUnion(
            f"lambda={lam} lies in the spectra of both L0 and Linf",
            certificate=basic_certificate(bd),
        )
    return DegenerateParameter(lam, theta, vartheta, basic_certificate(bd))


# ---------------------------------------------------------------------------
# relation -> matrix reduction


@dataclass(frozen=True)
class ReducedMatrix:
    matrix: Optional[np.ndarray]
    case: str
    side: str = "theta"
    marker: Optional[str] = None


def relation_to_matrix(problem, param, lam, config=None, evaluator=None, bd=None, side="auto"):
    """Hermitian matrix with the same eigenvalue behaviour as ``param`` at ``lam``.

    For a relation with one-dimensional multivalued part, ``lam`` is an
    eigenvalue iff ``o* M o = theta_op`` where ``o`` spans the operator part
    and ``M`` is ``M0`` (``side="theta"``) or ``Minf`` (``side="vartheta"``,
    using the dual relation). The returned matrix ``U [[theta_op, conj(beta)],
    [beta, 0]] U*`` with ``beta = m* M o`` has ``lam`` as an eigenvalue.
    ``case`` reports whether ``beta`` vanished ("K4") or not ("K3").
    A relation with two-dimensional multivalued part is the extension ``L0``.
    """
    param = as_parameter(param)
    if isinstance(param, Matrix):
        return ReducedMatrix(param.theta, "matrix")
    if param.mul_dim == 2:
        return ReducedMatrix(None, "L0", marker="L0")
    bd = _real_bd(bd or as_evaluator(problem, config, evaluator).one(float(lam)))
    if side == "auto":
        side = "theta" if in_rho_l0(bd) else "vartheta"
    if side == "theta":
        if not in_rho_l0(bd):
            raise AtPole(f"lambda={lam} is a pole of M0", which="M0")
        M = _m0(bd)
        rel = param
    else:
        if not in_rho_linf(bd):
            raise AtPole(f"lambda={lam} is a pole of Minf", which="Minf")
        M = _minf(bd)
        rel = param.dual()
        if rel.mul_dim == 0:
            return ReducedMatrix(rel.matrix(), "matrix", side)
        if rel.mul_dim == 2:
            return ReducedMatrix(None, "Linf-dual", side, marker="L0")
    o, m = rel.op_direction, rel.mul_direction
    gap = np.vdot(o, M @ o).real - rel.theta_op
    if abs(gap) > 1e-7 * (abs(rel.theta_op) + np.linalg.norm(M) + 1.0):
        raise NotAnEigenvalue(f"lambda={lam} is not an eigenvalue (gap {gap:.3e})")
    beta = np.vdot(m, M @ o)
    U = np.column_stack([o, m])
    if abs(beta) <= 1e-12 * (np.linalg.norm(M) + 1.0):
        core = np.diag([rel.theta_op, 0.0]).astype(complex)
        case = "K4"
    else:
        core = np.array([[rel.theta_op, np.conj(beta)], [beta, 0.0]], dtype=complex)
        case = "K3"
    T = U @ core @ U.conj().T
    return ReducedMatrix(0.5 * (T + T.conj().T), case, side)


# ---------------------------------------------------------------------------
# coupled conditions: discriminant


def discriminant(problem, R, lam, config=None, evaluator=None, bd=None):
    """``D(R, lam)`` for coupled conditions ``Y(b) = e^{i alpha} R Y(a)``.

    Uses the boundary bases ``f = v_a, g = -u_a, h = v_b, k = -u_b`` so that
    ``[y, f](a) = y^[0](a)`` and so on. ``lam`` may be an array.
    """
    R = np.asarray(R, dtype=float)
    if bd is None:
        bd = as_evaluator(problem, config, evaluator)(np.atleast_1d(np.asarray(lam, dtype=float)))
    D = R[0, 0] * bd.u21 + R[1, 1] * bd.u10 - R[0, 1] * bd.u11 - R[1, 0] * bd.u20
    D = np.real(D)
    return float(D[0]) if np.ndim(lam) == 0 and np.size(D) == 1 else D


def coupled_eigentest(problem, bc, lam, tol=1e-7, config=None, evaluator=None):
    """True iff ``|D(R, lam) - 2 cos(alpha)| < tol``."""
    D = discriminant(problem, bc.R, lam, config, evaluator)
    return bool(abs(D - 2 * math.cos(bc.alpha)) < tol)


def double_conditions(problem, bc, lam, config=None, evaluator=None):
    """Residuals of the four multiplicity-two conditions for coupled conditions.

    ``lam`` is a double eigenvalue iff the boundary-value matrix
    ``[[u10, u20], [u11, u21]]`` equals ``e^{i alpha} R``.
    """
    bd = _real_bd(as_evaluator(problem, config, evaluator).one(float(lam)))
    e = np.exp(1j * bc.alpha)
    Phi = np.array([[bd.u10, bd.u20], [bd.u11, bd.u21]])
    return np.abs(Phi - e * bc.R)


def coupled_eigenvalues(problem, bc, lam_range, config=None, evaluator=None, density=DENSITY):
    """Eigenvalues of coupled conditions from the level set ``D = 2 cos alpha``."""
    ev = as_evaluator(problem, config, evaluator)
    target = 2 * math.cos(bc.alpha)
    R = bc.R

    def func(bd):
        D = R[0, 0] * bd.u21 + R[1, 1] * bd.u10 - R[0, 1] * bd.u11 - R[1, 0] * bd.u20
        scale = np.abs(bd.u21) + np.abs(bd.u10) + np.abs(bd.u11) + np.abs(bd.u20) + 2.0
        return D - target, scale

    roots = find_roots(ev, func, lam_range[0], lam_range[1], density)
    out = []
    for lam, order, res in roots:
        Phi = double_conditions(problem, bc, lam, evaluator=ev)
        m = 2 if np.max(Phi) < 1e-6 else 1
        out.append(EigenvalueRecord(lam, m, False, res, VIA_CLASSICAL))
    return out
