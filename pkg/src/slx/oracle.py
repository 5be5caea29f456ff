"""Brute-force eigenvalue oracle: finite volumes on a truncated interval.

The interval is cut to ``[a + delta_a, b - delta_b]`` and covered by nodes
``x_0 < ... < x_N``. Fluxes use the exact cell conductance
``1 / int dx / p`` and masses are lumped over dual cells, which keeps the
scheme second order even when ``1/p`` has a logarithmic singularity near an
end. At the truncation points the solution is expanded in the endpoint
frame, ``f ~ f^[0] u + f^[1] v``, so the boundary parameter acts on the end
values and end fluxes through two 2x2 matrices::

    (f_0, f_N) = P phi,      (F_0, -F_N) = Q phi

where ``(Gamma0, Gamma1) = (A phi, B phi)`` is the range form of the
parameter. Summation by parts turns the boundary terms into ``phi* P*Q phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import FrameInaccurate, SolverFailure
from .problem import REGULAR
from .spectra import CoupledBC, Matrix, as_parameter

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def _pair(param):
    """Range-form pair ``(A, B)`` of a boundary parameter (also "L0"/"Linf")."""
    if isinstance(param, str):
        if param.upper() == "L0":
            return np.zeros((2, 2), complex), np.eye(2, dtype=complex)
        if param.lower() in ("linf", "friedrichs"):
            return np.eye(2, dtype=complex), np.zeros((2, 2), complex)
        raise ValueError(f"unknown parameter marker {param!r}")
    if isinstance(param, CoupledBC):
        param = param.to_relation()
    param = as_parameter(param)
    if isinstance(param, Matrix):
        return param.pair()
    return param.A, param.B


@dataclass
class DiscreteModel:
    grid: np.ndarray
    offsets_a: np.ndarray
    offsets_b: np.ndarray
    stiffness: sp.csr_matrix
    mass: sp.csr_matrix
    bc_rows: dict
    kept: int
    h: float

    @property
    def size(self):
        return self.stiffness.shape[0]


@dataclass(frozen=True)
class OracleResult:
    eigenvalues: np.ndarray
    residuals: np.ndarray
    count_below: int


# ---------------------------------------------------------------------------
# quadrature near the ends


def _cell_integrals(fun_near, s1, s2):
    """``int_{s1}^{s2} g(s) ds`` for arrays of offset intervals.

    Cells whose offsets span more than a factor of two are integrated in the
    variable ``log s`` (composite Gauss), which handles the logarithmic and
    power-type endpoint behaviour of the coefficients.
    """
    s1 = np.asarray(s1, float)
    s2 = np.asarray(s2, float)
    out = np.zeros_like(s1)
    graded = (s1 <= 0) | (s2 > 2 * s1)
    lin = ~graded
    if np.any(lin):
        c = 0.5 * (s1[lin] + s2[lin])
        r = 0.5 * (s2[lin] - s1[lin])
        pts = c[:, None] + r[:, None] * _GL_X[None, :]
        out[lin] = r * (fun_near(pts) @ _GL_W)
    for i in np.flatnonzero(graded):
        lo = math.log(s1[i]) if s1[i] > 0 else math.log(s2[i]) - 700.0
        hi = math.log(s2[i])
        m = max(1, int(math.ceil((hi - lo) / 1.0)))
        edges = np.linspace(lo, hi, m + 1)
        c = 0.5 * (edges[:-1] + edges[1:])
        r = 0.5 * (edges[1:] - edges[:-1])
        sig = (c[:, None] + r[:, None] * _GL_X[None, :]).ravel()
        s = np.exp(sig)
        vals = fun_near(s) * s
        out[i] = float(np.sum(vals.reshape(m, -1) @ _GL_W * r))
    return out


def _split_integral(field_fn, problem, sa1, sa2):
    """Integrate over intervals given by offsets from ``a`` in the near-end variable."""
    L = problem.length
    mid = 0.5 * L
    out = np.zeros_like(sa1)
    left = 0.5 * (sa1 + sa2) <= mid
    if np.any(left):
        out[left] = _cell_integrals(lambda s: field_fn("a", s), sa1[left], sa2[left])
    right = ~left
    if np.any(right):
        out[right] = _cell_integrals(lambda s: field_fn("b", s), L - sa2[right], L - sa1[right])
    return out


# ---------------------------------------------------------------------------
# frames


def frame_residual(problem, which, s):
    """Relative residual of the frame at offset ``s``: bracket, ``u' = pu/p`` and the ODE."""
    fr = problem.frame(which)
    lam0 = problem.lambda0
    sign = 1.0 if which == "a" else -1.0
    h = max(1e-3 * s, 1e-9 * problem.length) if s > 0 else 1e-7 * problem.length
    s0 = max(s, 2 * h)
    pts = np.array([s0 - h, s0, s0 + h])
    u, v, pu, pv = fr.at(pts)
    p = problem.p.near(which, pts)
    q = problem.q.near(which, pts)
    w = problem.w.near(which, pts)
    worst = abs(u[1] * pv[1] - pu[1] * v[1] - 1.0)
    for f, pf in ((u, pu), (v, pv)):
        df = sign * (f[2] - f[0]) / (2 * h)
        dpf = sign * (pf[2] - pf[0]) / (2 * h)
        scale = abs(pf[1]) + abs(f[1]) * (abs(q[1]) + abs(lam0 * w[1])) + 1e-300
        worst = max(worst, abs(p[1] * df - pf[1]) / (abs(pf[1]) + abs(p[1] * df) + 1e-300))
        worst = max(worst, abs(dpf - (q[1] - lam0 * w[1]) * f[1]) / (scale + abs(dpf)) * min(1.0, s0 / h))
    return float(worst)


def default_delta(problem, which):
    fr = problem.frame(which)
    return 0.0 if fr.classification == REGULAR else 1e-6 * problem.length


# ---------------------------------------------------------------------------
# assembly


def discretize(problem, param, N=2000, delta=None, grading="uniform", frame_tol=1e-3):
    """Finite-volume model of the extension ``param`` with ``N`` cells."""
    if N < 64:
        raise ValueError("N must be at least 64")
    if delta is None:
        da, db = default_delta(problem, "a"), default_delta(problem, "b")
    elif np.ndim(delta) == 0:
        da = db = float(delta)
    else:
        da, db = (float(d) for d in delta)
    L = problem.length
    Lc = L - da - db
    if Lc <= 0:
        raise ValueError("truncation removes the whole interval")
    for which, d in (("a", da), ("b", db)):
        if d > 0 or problem.frame(which).classification != REGULAR:
            res = frame_residual(problem, which, max(d, 1e-12 * L))
            if not np.isfinite(res) or res > frame_tol:
                raise FrameInaccurate(f"frame at {which} is inaccurate at offset {d:g} (residual {res:.2e})")

    i = np.arange(N + 1)
    if grading == "uniform":
        t = Lc * i / N
    elif grading == "cosine":
        t = Lc * 0.5 * (1 - np.cos(np.pi * i / N))
    else:
        raise ValueError(f"unknown grading {grading!r}")
    sa = da + t  # offsets from a
    sb = db + (Lc - t)  # offsets from b
    grid = problem.a + sa
    h = float(np.max(np.diff(t)))

    p, q, w = problem.p, problem.q, problem.w
    inv_p = _split_integral(lambda e, s: 1.0 / p.near(e, s), problem, sa[:-1], sa[1:])
    kappa = 1.0 / inv_p
    mid = 0.5 * (sa[:-1] + sa[1:])
    wl = _split_integral(lambda e, s: w.near(e, s), problem, sa[:-1], mid)
    wr = _split_integral(lambda e, s: w.near(e, s), problem, mid, sa[1:])
    ql = _split_integral(lambda e, s: q.near(e, s), problem, sa[:-1], mid)
    qr = _split_integral(lambda e, s: q.near(e, s), problem, mid, sa[1:])
    wbar = np.zeros(N + 1)
    qbar = np.zeros(N + 1)
    wbar[:-1] += wl
    wbar[1:] += wr
    qbar[:-1] += ql
    qbar[1:] += qr

    diag = qbar.astype(complex)
    diag[:-1] += kappa
    diag[1:] += kappa
    Kfull = sp.diags([-kappa, diag, -kappa], [-1, 0, 1], format="csr", dtype=complex)
    Wfull = sp.diags(wbar.astype(complex), 0, format="csr")

    A, B = _pair(param)
    ua, va, pua, pva = problem.frame_a.at(np.array([da]))
    ub, vb, pub, pvb = problem.frame_b.at(np.array([db]))
    P = np.array([
        ua[0] * A[0] + va[0] * B[0],
        ub[0] * A[1] - vb[0] * B[1],
    ])
    Q = np.array([
        pua[0] * A[0] + pva[0] * B[0],
        -pub[0] * A[1] + pvb[0] * B[1],
    ])
    H = P.conj().T @ Q
    U, S, Vh = np.linalg.svd(P)
    keep = S > 1e-12 * max(S[0], 1e-300)
    k = int(np.sum(keep))
    Uk = U[:, keep]
    Vk = Vh.conj().T[:, keep]
    Dinv = np.diag(1.0 / S[keep])
    Hpsi = Dinv @ Vk.conj().T @ H @ Vk @ Dinv
    Hpsi = 0.5 * (Hpsi + Hpsi.conj().T)

    # unknowns: (psi_1..psi_k, f_1..f_{N-1}); end values f_0, f_N = Uk psi
    n = k + N - 1
    rows, cols, vals = [], [], []
    for j in range(k):
        rows += [0, N]
        cols += [j, j]
        vals += [Uk[0, j], Uk[1, j]]
    rows += list(range(1, N))
    cols += list(range(k, n))
    vals += [1.0] * (N - 1)
    T = sp.csr_matrix((np.array(vals, complex), (rows, cols)), shape=(N + 1, n))
    K = (T.conj().T @ Kfull @ T).tolil()
    K[:k, :k] = K[:k, :k].toarray() + Hpsi
    K = K.tocsr()
    M = (T.conj().T @ Wfull @ T).tocsr()
    bc = {"P": P, "Q": Q, "H": H, "singular_values": S, "delta": (da, db)}
    return DiscreteModel(grid, sa, sb, K, M, bc, k, h)


# ---------------------------------------------------------------------------
# eigensolve


def _blocks(model):
    k = model.kept
    K, M = model.stiffness, model.mass
    return k, K, M


def count_below(model, sigma):
    """Number of eigenvalues below ``sigma`` (inertia of ``K - sigma M``)."""
    k, K, M = _blocks(model)
    A = (K - sigma * M).tocsr()
    Aff = A[k:, k:]
    d = Aff.diagonal().real
    off = Aff.diagonal(1)
    n = d.size
    # LDL* of the tridiagonal block (Sturm recurrence)
    piv = np.empty(n)
    piv[0] = d[0]
    tiny = 1e-300
    for i in range(1, n):
        prev = piv[i - 1] if piv[i - 1] != 0 else tiny
        piv[i] = d[i] - abs(off[i - 1]) ** 2 / prev
    neg = int(np.sum(piv < 0))
    if k == 0:
        return neg
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = off
    ab[1] = d
    ab[2, :-1] = np.conj(off)
    C = A[k:, :k].toarray()
    try:
        X = sla.solve_banded((1, 1), ab, C)
    except np.linalg.LinAlgError:
        X = sla.lstsq(Aff.toarray(), C)[0]
    Sc = A[:k, :k].toarray() - A[:k, k:].toarray() @ X
    Sc = 0.5 * (Sc + Sc.conj().T)
    return neg + int(np.sum(np.linalg.eigvalsh(Sc) < 0))


def _lower_shift(model, guess):
    s = guess
    step = max(1.0, abs(guess))
    for _ in range(200):
        if count_below(model, s) == 0:
            return s
        s -= step
        step *= 2
    raise SolverFailure("could not find a lower bound for the discrete spectrum")


def oracle_spectrum(model, k=None, lam_range=None):
    """Lowest ``k`` eigenvalues, or all eigenvalues in ``lam_range``."""
    if (k is None) == (lam_range is None):
        raise ValueError("give exactly one of k and lam_range")
    n = model.size
    K, M = model.stiffness, model.mass
    lo_guess = lam_range[0] - 1.0 if lam_range is not None else -1.0
    sigma = _lower_shift(model, lo_guess)
    if lam_range is not None:
        want = count_below(model, lam_range[1])
    else:
        want = int(k)
    if want == 0:
        return OracleResult(np.zeros(0), np.zeros(0), 0)
    if want >= n - 1:
        raise SolverFailure("requested more eigenvalues than the model resolves")
    try:
        if n <= 600:
            vals, vecs = sla.eigh(K.toarray(), M.toarray())
            vals, vecs = vals[:want], vecs[:, :want]
        else:
            vals, vecs = spla.eigsh(K, k=want, M=M, sigma=sigma, which="LM")
    except Exception as exc:  # ARPACK and LAPACK raise a variety of types
        raise SolverFailure(f"eigensolver failed: {exc}") from exc
    order = np.argsort(vals.real)
    vals = vals.real[order]
    vecs = vecs[:, order]
    R = K @ vecs - (M @ vecs) * vals[None, :]
    res = np.linalg.norm(R, axis=0) / np.maximum(np.linalg.norm(M @ vecs, axis=0), 1e-300)
    if lam_range is not None:
        sel = vals >= lam_range[0]
        vals, res = vals[sel], res[sel]
    return OracleResult(vals, res, want)


def oracle_eigenvalues(problem, param, lam_range, N=2000, delta=None, grading="uniform"):
    """Convenience wrapper: discretize and return eigenvalues on ``lam_range``."""
    model = discretize(problem, param, N, delta, grading)
    return oracle_spectrum(model, lam_range=lam_range).eigenvalues


def tolerance(model, floor=1e-3):
    """Agreement tolerance ``max(floor, 5 h^2)`` used for oracle comparisons."""
    return max(floor, 5 * model.h ** 2)


__all__ = [
    "DiscreteModel",
    "OracleResult",
    "discretize",
    "oracle_spectrum",
    "oracle_eigenvalues",
    "count_below",
    "frame_residual",
    "tolerance",
]
