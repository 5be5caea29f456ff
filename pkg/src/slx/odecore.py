"""Fundamental system, brackets and boundary quasi-derivatives.

Conventions used throughout the package:

* bracket ``[f, g](x) = p(x) (f(x) g'(x) - f'(x) g(x))``
* quasi-derivatives at an endpoint with frame ``(u, v)``:
  ``f^[0] = [f, v]`` and ``f^[1] = -[f, u]``, so that ``f ~ f^[0] u + f^[1] v``
* ``u_1`` and ``u_2`` satisfy ``u_1^[0](a) = 1, u_1^[1](a) = 0`` and
  ``u_2^[0](a) = 0, u_2^[1](a) = 1``

With these choices ``u_1^[0] u_2^[1] - u_1^[1] u_2^[0] = 1`` at ``b`` and the
Weyl function ``M_0`` is a Herglotz function.

Near an endpoint a solution is written ``f = c0 u + c1 v`` with
``c0 u' + c1 v' ...`` chosen by variation of parameters; in these coordinates
``c0 = f^[0]`` and ``c1 = f^[1]`` exactly, and the equations

    c0' = (lam - lam0) w v f,     c1' = -(lam - lam0) w u f

are integrated in the logarithmic variable ``log s`` (``s`` = distance to the
endpoint). Away from the endpoints the system for ``(y, p y')`` is used.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DerivativeUnavailable, IntegrationDiverged, WronskianDrift

BRACKET_SIGN = -1
CONVENTION = {
    "bracket": "[f,g] = p (f g' - f' g)",
    "bracket_sign": BRACKET_SIGN,
    "quasi_derivatives": "f^[0] = [f, v], f^[1] = -[f, u]",
    "expansion": "f ~ f^[0] u + f^[1] v",
    "gamma": "Gamma0 = (f^[0](a), f^[0](b)), Gamma1 = (f^[1](a), -f^[1](b))",
    "operator": "-(p y')' + q y = lambda w y",
}


@dataclass(frozen=True)
class IntegratorConfig:
    """Integration settings.

    ``delta_a``/``delta_b`` are the endpoint offsets where integration starts
    and stops (``None`` picks the smallest safe offset). ``window`` is the
    fraction of the interval handled in frame coordinates at each end.
    """

    delta_a: float | None = None
    delta_b: float | None = None
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    max_steps: int = 200_000
    richardson_levels: int = 2
    window: float = 0.1
    wronskian_tol: float = 1e-7
    method: str = "DOP853"

    def __post_init__(self):
        for name in ("rel_tol", "abs_tol"):
            v = getattr(self, name)
            if not 0 < v <= 1e-3:
                raise ValueError(f"{name} must lie in (0, 1e-3]")
        for name in ("delta_a", "delta_b"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 < self.window < 0.5:
            raise ValueError("window must lie in (0, 0.5)")


DEFAULT_CONFIG = IntegratorConfig()


@dataclass(frozen=True)
class BoundaryData:
    lam: complex
    u10: complex
    u11: complex
    u20: complex
    u21: complex
    wronskian_residual: float = 0.0
    error_estimate: float = 0.0

    def as_tuple(self):
        return (self.u10, self.u11, self.u20, self.u21)

    @property
    def scale(self):
        return max(abs(self.u10), abs(self.u11), abs(self.u20), abs(self.u21))


@dataclass
class BoundaryArray:
    """Boundary data for an array of spectral parameters."""

    lam: np.ndarray
    u10: np.ndarray
    u11: np.ndarray
    u20: np.ndarray
    u21: np.ndarray
    wronskian_residual: np.ndarray
    error_estimate: np.ndarray

    def __len__(self):
        return len(self.lam)

    def __getitem__(self, i):
        if isinstance(i, (int, np.integer)):
            return BoundaryData(
                complex(self.lam[i]), complex(self.u10[i]), complex(self.u11[i]),
                complex(self.u20[i]), complex(self.u21[i]),
                float(self.wronskian_residual[i]), float(self.error_estimate[i]),
            )
        return BoundaryArray(
            self.lam[i], self.u10[i], self.u11[i], self.u20[i], self.u21[i],
            self.wronskian_residual[i], self.error_estimate[i],
        )

    @property
    def scale(self):
        return np.max(np.abs(np.stack([self.u10, self.u11, self.u20, self.u21])), axis=0)

    def real(self):
        """Copy with the imaginary parts dropped (valid for real lambda)."""
        return BoundaryArray(
            self.lam.real, self.u10.real, self.u11.real, self.u20.real, self.u21.real,
            self.wronskian_residual, self.error_estimate,
        )


# ---------------------------------------------------------------------------
# brackets


def bracket(f, g, x, p=None, df=None, dg=None, h=None):
    """``[f, g](x) = p (f g' - f' g)``.

    ``f`` and ``g`` are callables; their derivatives are taken from ``df``/``dg``
    when supplied, otherwise by central differences.
    """
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-5 * np.maximum(1.0, np.abs(x))

    def deriv(fun, d):
        if d is not None:
            return np.asarray(d(x))
        with np.errstate(all="ignore"):
            out = (np.asarray(fun(x + h)) - np.asarray(fun(x - h))) / (2 * h)
        if not np.all(np.isfinite(out)):
            raise DerivativeUnavailable("finite-difference derivative is not finite")
        return out

    pv = 1.0 if p is None else np.asarray(p(x))
    return pv * (np.asarray(f(x)) * deriv(g, dg) - deriv(f, df) * np.asarray(g(x)))


def frame_bracket(frame, s):
    """``[u, v]`` of an endpoint frame at offset ``s`` (should be 1)."""
    u, v, pu, pv = frame.at(s)
    return u * pv - pu * v


# ---------------------------------------------------------------------------
# integration


class _Budget:
    def __init__(self, fun, max_evals):
        self.fun = fun
        self.max_evals = max_evals
        self.n = 0

    def __call__(self, t, y):
        self.n += 1
        if self.n > self.max_evals:
            raise IntegrationDiverged("step budget exhausted")
        return self.fun(t, y)


def _solve(fun, span, y0, cfg, t_eval=None):
    budget = _Budget(fun, cfg.max_steps * 13)
    sol = solve_ivp(
        budget, span, y0, method=cfg.method, rtol=cfg.rel_tol, atol=cfg.abs_tol,
        t_eval=t_eval,
    )
    if not sol.success:
        raise IntegrationDiverged(sol.message)
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationDiverged("solution is not finite")
    return sol


def _offsets(problem, cfg):
    out = []
    for which, given in (("a", cfg.delta_a), ("b", cfg.delta_b)):
        if given is not None:
            out.append(float(given))
            continue
        loc = problem.a if which == "a" else problem.b
        if problem.local_at(which):
            out.append(1e-250 * max(1.0, problem.length))
        else:
            out.append(max(1e-250, 16 * np.finfo(float).eps * abs(loc)))
    return out


def _frame_rhs(frame, w_field, mu, direction):
    which = frame.which

    def rhs(sig, y):
        s = math.exp(sig)
        u, v, _, _ = frame.at(s)
        ww = float(w_field.near(which, s))
        c = y.reshape(2, 2, -1)
        f = c[:, 0] * float(u) + c[:, 1] * float(v)
        k = direction * s * ww * mu[None, :] * f
        out = np.empty_like(c)
        out[:, 0] = k * float(v)
        out[:, 1] = -k * float(u)
        return out.ravel()

    return rhs


def _interior_rhs(problem, lam):
    p, q, w = problem.p, problem.q, problem.w

    def rhs(x, y):
        z = y.reshape(2, 2, -1)
        pp = float(p(x))
        qq = float(q(x))
        ww = float(w(x))
        out = np.empty_like(z)
        out[:, 0] = z[:, 1] / pp
        out[:, 1] = (qq - lam[None, :] * ww) * z[:, 0]
        return out.ravel()

    return rhs


def _wronskian_c(c):
    # rows: solution index, then coefficient index
    return c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]


def _integrate(problem, lam, cfg, with_green=False):
    lam = np.asarray(lam, dtype=complex).ravel()
    n = lam.size
    mu = lam - problem.lambda0
    L = problem.length
    eta = cfg.window * L
    da, db = _offsets(problem, cfg)
    levels = max(1, int(cfg.richardson_levels))

    # segment a: s from da to eta
    y0 = np.zeros((2, 2, n), dtype=complex)
    y0[0, 0] = 1.0
    y0[1, 1] = 1.0
    sig_a = (math.log(da), math.log(eta))
    t_eval_a = None
    if levels > 1:
        t_eval_a = [sig_a[0] + math.log(2.0) * j for j in range(levels)][::-1]
        t_eval_a = sorted(t_eval_a) + [sig_a[1]]
    sol = _solve(_frame_rhs(problem.frame_a, problem.w, mu, +1.0), sig_a, y0.ravel(), cfg, t_eval_a)
    ya = sol.y[:, -1].reshape(2, 2, n)
    tail_a = 0.0
    if levels > 1:
        first = sol.y[:, 0].reshape(2, 2, n)
        second = sol.y[:, 1].reshape(2, 2, n)
        tail_a = np.max(np.abs(second - first).reshape(4, n), axis=0)
    drift = np.abs(_wronskian_c(ya) - 1.0)

    # to (y, p y') at a + eta
    u, v, pu, pv = (float(t) for t in problem.frame_a.at(eta))
    z = np.empty_like(ya)
    z[:, 0] = ya[:, 0] * u + ya[:, 1] * v
    z[:, 1] = ya[:, 0] * pu + ya[:, 1] * pv
    x1 = problem.a + eta
    x2 = problem.b - eta
    sol = _solve(_interior_rhs(problem, lam), (x1, x2), z.ravel(), cfg)
    z = sol.y[:, -1].reshape(2, 2, n)
    wz = z[0, 0] * z[1, 1] - z[0, 1] * z[1, 0]
    drift = np.maximum(drift, np.abs(wz - 1.0))

    # to frame coordinates at b - eta
    u, v, pu, pv = (float(t) for t in problem.frame_b.at(eta))
    yb = np.empty_like(z)
    yb[:, 0] = z[:, 0] * pv - z[:, 1] * v
    yb[:, 1] = -(z[:, 0] * pu - z[:, 1] * u)
    sig_b = (math.log(eta), math.log(db))
    t_eval_b = None
    if levels > 1:
        t_eval_b = [sig_b[1] + math.log(2.0) * j for j in range(levels)][::-1]
    sol = _solve(_frame_rhs(problem.frame_b, problem.w, mu, -1.0), sig_b, yb.ravel(), cfg, t_eval_b)
    yb = sol.y[:, -1].reshape(2, 2, n)
    tail_b = 0.0
    if levels > 1:
        prev = sol.y[:, -2].reshape(2, 2, n)
        tail_b = np.max(np.abs(yb - prev).reshape(4, n), axis=0)
    W = _wronskian_c(yb)
    drift = np.maximum(drift, np.abs(W - 1.0))
    scale = np.maximum(1.0, np.abs(yb[0, 0] * yb[1, 1]) + np.abs(yb[0, 1] * yb[1, 0]))
    rel_drift = drift / scale
    if np.any(~np.isfinite(W)) or np.any(W == 0):
        raise IntegrationDiverged("degenerate Wronskian at b")
    bad = rel_drift > cfg.wronskian_tol
    if np.any(bad):
        i = int(np.argmax(rel_drift))
        raise WronskianDrift(
            f"Wronskian drifted by {rel_drift[i]:.3e} at lambda={lam[i]}", drift=float(rel_drift[i])
        )
    # rescale u2 so that the Wronskian at b equals one
    yb[1] = yb[1] / W[None, :]
    err = np.maximum(tail_a, tail_b) + cfg.rel_tol * np.max(np.abs(yb).reshape(4, n), axis=0)
    return BoundaryArray(
        lam, yb[0, 0], yb[0, 1], yb[1, 0], yb[1, 1], np.abs(W - 1.0), err
    )


def boundary_array(problem, lams, config=None, chunk=4096):
    """Boundary data for every value in ``lams`` (vectorised integration)."""
    cfg = config or DEFAULT_CONFIG
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    parts = [_integrate(problem, lams[i : i + chunk], cfg) for i in range(0, lams.size, chunk)]
    if not parts:
        empty = np.zeros(0, dtype=complex)
        return BoundaryArray(empty, empty, empty, empty, empty, np.zeros(0), np.zeros(0))
    cat = lambda name: np.concatenate([getattr(p, name) for p in parts])  # noqa: E731
    return BoundaryArray(*(cat(k) for k in ("lam", "u10", "u11", "u20", "u21", "wronskian_residual", "error_estimate")))


def fundamental_at_b(problem, lam, config=None):
    """Quasi-derivatives of ``u_1, u_2`` at ``b`` for a single ``lam``."""
    return boundary_array(problem, [lam], config)[0]


class BoundaryEvaluator:
    """Memoising front end to :func:`boundary_array`.

    Values are cached by the exact spectral parameter, so scans that share
    grid points (different boundary parameters on one problem) integrate
    each point once.
    """

    def __init__(self, problem, config=None, max_cache=2_000_000):
        self.problem = problem
        self.config = config or DEFAULT_CONFIG
        self._cache = {}
        self.max_cache = max_cache

    def __call__(self, lams):
        lams = np.atleast_1d(np.asarray(lams, dtype=complex))
        keys = lams.tolist()
        missing = list(dict.fromkeys(k for k in keys if k not in self._cache))
        if missing:
            arr = boundary_array(self.problem, missing, self.config)
            if len(self._cache) + len(missing) > self.max_cache:
                self._cache.clear()
            for i, k in enumerate(missing):
                self._cache[k] = (
                    arr.u10[i], arr.u11[i], arr.u20[i], arr.u21[i],
                    arr.wronskian_residual[i], arr.error_estimate[i],
                )
        rows = np.array([self._cache[k] for k in keys], dtype=complex).reshape(-1, 6)
        return BoundaryArray(
            lams, rows[:, 0], rows[:, 1], rows[:, 2], rows[:, 3], rows[:, 4].real, rows[:, 5].real
        )

    def one(self, lam):
        return self([lam])[0]


@functools.lru_cache(maxsize=64)
def evaluator_for(problem, config=None):
    """Shared evaluator per (problem, config) pair."""
    return BoundaryEvaluator(problem, config)


def as_evaluator(problem, config=None, evaluator=None):
    if evaluator is not None:
        return evaluator
    return evaluator_for(problem, config or DEFAULT_CONFIG)


# ---------------------------------------------------------------------------
# Green identity


def _blend(x, xl, xr):
    t = np.clip((x - xl) / (xr - xl), 0.0, 1.0)
    chi = 0.5 * (1.0 - np.cos(np.pi * t))
    dchi = np.where((x > xl) & (x < xr), 0.5 * np.pi * np.sin(np.pi * t) / (xr - xl), 0.0)
    return chi, dchi


def green_identity_residual(problem, lam, config=None, blend=(0.35, 0.65)):
    """Residual of the Green identity for ``u_2`` against a blended ``v``.

    With ``v~ = (1 - chi) v_a + chi v_b`` the identity reads

        (lam - lam0) int u_2 v~ w dx + int chi' ([u_2, v_b] - [u_2, v_a]) dx
            = u_2^[0](b) - u_2^[0](a)

    ``blend`` gives the window (as fractions of the interval) where ``chi``
    rises from 0 to 1. Returns the absolute residual.
    """
    cfg = config or DEFAULT_CONFIG
    lam = complex(lam)
    mu = lam - problem.lambda0
    L = problem.length
    eta = cfg.window * L
    da, db = _offsets(problem, cfg)
    fa, fb = problem.frame_a, problem.frame_b
    xl, xr = problem.a + blend[0] * L, problem.a + blend[1] * L

    # near a: y = (c0, c1, I) with I' = mu w f v_a dx
    def rhs_a(sig, y):
        s = math.exp(sig)
        u, v, _, _ = (float(t) for t in fa.at(s))
        ww = float(problem.w.near("a", s))
        f = y[0] * u + y[1] * v
        k = s * ww * mu * f
        return np.array([k * v, -k * u, k * v], dtype=complex)

    sol = _solve(rhs_a, (math.log(da), math.log(eta)), np.array([0, 1, 0], dtype=complex), cfg)
    c0, c1, acc = sol.y[:, -1]
    u, v, pu, pv = (float(t) for t in fa.at(eta))
    y, py = c0 * u + c1 * v, c0 * pu + c1 * pv

    def rhs_i(x, z):
        pp, qq, ww = float(problem.p(x)), float(problem.q(x)), float(problem.w(x))
        va, pva = float(fa.v(x)), float(fa.pv(x))
        vb, pvb = float(fb.v(x)), float(fb.pv(x))
        chi, dchi = _blend(x, xl, xr)
        vt = (1 - chi) * va + chi * vb
        br_b = z[0] * pvb - z[1] * vb
        br_a = z[0] * pva - z[1] * va
        return np.array(
            [z[1] / pp, (qq - lam * ww) * z[0], mu * ww * z[0] * vt + dchi * (br_b - br_a)],
            dtype=complex,
        )

    sol = _solve(rhs_i, (problem.a + eta, problem.b - eta), np.array([y, py, acc], dtype=complex), cfg)
    y, py, acc = sol.y[:, -1]
    u, v, pu, pv = (float(t) for t in fb.at(eta))
    c0 = y * pv - py * v
    c1 = -(y * pu - py * u)

    def rhs_b(sig, z):
        s = math.exp(sig)
        u, v, _, _ = (float(t) for t in fb.at(s))
        ww = float(problem.w.near("b", s))
        f = z[0] * u + z[1] * v
        k = -s * ww * mu * f
        # the accumulated integral runs in +x, i.e. against sig here
        return np.array([k * v, -k * u, k * v], dtype=complex)

    sol = _solve(rhs_b, (math.log(eta), math.log(db)), np.array([c0, c1, acc], dtype=complex), cfg)
    c0_b, _, acc = sol.y[:, -1]
    # u_2^[0](a) = 0 by the initial conditions
    return float(abs(acc - c0_b))


# ---------------------------------------------------------------------------
# diagnostics


def dump_trajectory(problem, lam, path, config=None, points=400):
    """Write ``x, Re/Im u1, p u1', u2, p u2', wronskian`` along the interior to CSV."""
    cfg = config or DEFAULT_CONFIG
    lam = complex(lam)
    bd_a = _integrate_to(problem, lam, cfg)
    x1, x2, z0 = bd_a
    xs = np.linspace(x1, x2, points)
    sol = solve_ivp(
        _interior_rhs(problem, np.array([lam])), (x1, x2), z0.ravel(), method=cfg.method,
        rtol=cfg.rel_tol, atol=cfg.abs_tol, t_eval=xs,
    )
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow([
            "x", "re_u1", "im_u1", "re_pu1", "im_pu1", "re_u2", "im_u2", "re_pu2", "im_pu2", "wronskian",
        ])
        for j, x in enumerate(sol.t):
            y1, py1, y2, py2 = sol.y[:, j]
            W = y1 * py2 - py1 * y2
            wr.writerow([
                x, y1.real, y1.imag, py1.real, py1.imag, y2.real, y2.imag, py2.real, py2.imag, abs(W),
            ])
    return path


def _integrate_to(problem, lam, cfg):
    mu = np.array([lam - problem.lambda0])
    eta = cfg.window * problem.length
    da, _ = _offsets(problem, cfg)
    y0 = np.zeros((2, 2, 1), dtype=complex)
    y0[0, 0] = y0[1, 1] = 1.0
    sol = _solve(_frame_rhs(problem.frame_a, problem.w, mu, 1.0), (math.log(da), math.log(eta)), y0.ravel(), cfg)
    ya = sol.y[:, -1].reshape(2, 2, 1)
    u, v, pu, pv = (float(t) for t in problem.frame_a.at(eta))
    z = np.empty_like(ya)
    z[:, 0] = ya[:, 0] * u + ya[:, 1] * v
    z[:, 1] = ya[:, 0] * pu + ya[:, 1] * pv
    return problem.a + eta, problem.b - eta, z
