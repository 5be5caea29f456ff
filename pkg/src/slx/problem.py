"""Sturm-Liouville problem definitions, endpoint classification and frames.

The differential expression is ``l[y] = (-(p y')' + q y) / w`` on ``(a, b)``.
Near each endpoint a *frame* ``(u, v)`` of real solutions of ``(l - lambda0) y = 0``
is fixed, with ``u`` principal and ``v`` non-principal, normalised so that
``[u, v] = 1`` for the bracket ``[f, g] = p (f g' - f' g)``.

Every scalar function is wrapped in a :class:`Field`, which can optionally
evaluate itself at a tiny offset ``s`` from an endpoint without forming
``a + s`` in floating point. The built-in catalog supplies such local
evaluators, which lets the integrator start extremely close to singular
endpoints.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import (
    InvalidProblem,
    NonOscillationUndetermined,
    PrincipalVanishes,
    ProblemFormatError,
    QuadratureInconclusive,
)

REGULAR = "regular"
LCNO = "limit-circle-nonoscillatory"
LIMIT_POINT = "limit-point"

_EPS = np.finfo(float).eps
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(20)


class Field:
    """A real function on an interval with optional endpoint-local evaluators.

    ``near(end, s)`` returns the value at ``a + s`` (``end == "a"``) or
    ``b - s`` (``end == "b"``). When a local evaluator is present it is used
    directly, otherwise the absolute point is formed and passed to ``func``.
    """

    def __init__(self, func, interval, near_a=None, near_b=None, label=""):
        self.func = func
        self.a, self.b = float(interval[0]), float(interval[1])
        self.near_a = near_a
        self.near_b = near_b
        self.label = label

    @staticmethod
    def _shape(out, x):
        out = np.asarray(out, dtype=float)
        if out.shape != np.shape(x):
            out = np.broadcast_to(out, np.shape(x)).copy()
        return out

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self._shape(self.func(x), x)

    def has_local(self, end):
        return (self.near_a if end == "a" else self.near_b) is not None

    def near(self, end, s):
        s = np.asarray(s, dtype=float)
        if end == "a":
            if self.near_a is not None:
                return self._shape(self.near_a(s), s)
            return self(self.a + s)
        if self.near_b is not None:
            return self._shape(self.near_b(s), s)
        return self(self.b - s)

    def __repr__(self):
        return f"Field({self.label or self.func!r})"


def constant(value, interval, label=None):
    value = float(value)
    f = lambda x: np.full(np.shape(x), value)  # noqa: E731
    return Field(f, interval, f, f, label=label or repr(value))


@dataclass(frozen=True, eq=False)
class CoefficientTriple:
    """Coefficients ``p, q, w`` on ``(a, b)``.

    ``integrable`` records the user's assertion that ``1/p``, ``q`` and ``w``
    are locally integrable inside the interval; it is not verified.
    """

    p: Field
    q: Field
    w: Field
    integrable: dict = field(default_factory=lambda: {"1/p": True, "q": True, "w": True})

    @property
    def interval(self):
        return (self.p.a, self.p.b)


@dataclass(frozen=True, eq=False)
class EndpointFrame:
    """Principal/non-principal pair at one endpoint.

    ``pu`` and ``pv`` are the products ``p u'`` and ``p v'``.
    """

    which: str
    location: float
    anchor: float
    u: Field
    v: Field
    pu: Field
    pv: Field
    classification: str = LCNO

    def at(self, s):
        """Return ``(u, v, pu, pv)`` at offset ``s`` from the endpoint."""
        e = self.which
        return self.u.near(e, s), self.v.near(e, s), self.pu.near(e, s), self.pv.near(e, s)

    def at_x(self, x):
        return self.u(x), self.v(x), self.pu(x), self.pv(x)


@dataclass(frozen=True, eq=False)
class SLProblem:
    a: float
    b: float
    coefficients: CoefficientTriple
    frame_a: EndpointFrame
    frame_b: EndpointFrame
    K: Optional[float] = 0.0
    name: str = "custom"
    meta: dict = field(default_factory=dict)

    @property
    def lambda0(self):
        return self.frame_a.anchor

    @property
    def length(self):
        return self.b - self.a

    @property
    def p(self):
        return self.coefficients.p

    @property
    def q(self):
        return self.coefficients.q

    @property
    def w(self):
        return self.coefficients.w

    def frame(self, which):
        return self.frame_a if which == "a" else self.frame_b

    def local_at(self, which):
        """True when every coefficient and frame function evaluates locally at ``which``."""
        fr = self.frame(which)
        fields = (self.p, self.q, self.w, fr.u, fr.v, fr.pu, fr.pv)
        return all(f.has_local(which) for f in fields)

    def with_frame(self, which, frame):
        return replace(self, **{f"frame_{which}": frame})


# ---------------------------------------------------------------------------
# built-in catalog


def free_problem(length=math.pi):
    """``-y'' = lambda y`` on ``(0, length)`` with frames ``(x, -1)`` and ``(x - length, -1)``."""
    iv = (0.0, float(length))
    L = float(length)
    one, zero = constant(1.0, iv), constant(0.0, iv)
    minus_one = constant(-1.0, iv)
    coeffs = CoefficientTriple(p=one, q=zero, w=one)
    ua = Field(lambda x: x, iv, lambda s: s, lambda s: L - s, label="x")
    ub = Field(lambda x: x - L, iv, lambda s: s - L, lambda s: -s, label="x-L")
    fa = EndpointFrame("a", 0.0, 0.0, ua, minus_one, one, zero, REGULAR)
    fb = EndpointFrame("b", L, 0.0, ub, minus_one, one, zero, REGULAR)
    return SLProblem(0.0, L, coeffs, fa, fb, K=0.0, name="free")


def _q0(x):
    return 0.5 * np.log((1.0 + x) / (1.0 - x))


def legendre_problem():
    """Legendre operator ``-((1 - x^2) y')'`` on ``(-1, 1)``.

    Both endpoints use ``u = 1`` and ``v = Q_0(x) = artanh(x)``.
    """
    iv = (-1.0, 1.0)
    p = Field(
        lambda x: 1.0 - x * x, iv, lambda s: s * (2.0 - s), lambda s: s * (2.0 - s), label="1-x^2"
    )
    one, zero = constant(1.0, iv), constant(0.0, iv)
    coeffs = CoefficientTriple(p=p, q=zero, w=one)
    v = Field(
        _q0,
        iv,
        lambda s: 0.5 * np.log(s / (2.0 - s)),
        lambda s: 0.5 * np.log((2.0 - s) / s),
        label="Q0",
    )
    fa = EndpointFrame("a", -1.0, 0.0, one, v, zero, one, LCNO)
    fb = EndpointFrame("b", 1.0, 0.0, one, v, zero, one, LCNO)
    return SLProblem(-1.0, 1.0, coeffs, fa, fb, K=0.0, name="legendre")


def bessel_problem(nu=0.25):
    """``-y'' + (nu^2 - 1/4) y / x^2`` on ``(0, 1)`` for ``0 < nu < 1``."""
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise ValueError("nu must lie in (0, 1)")
    iv = (0.0, 1.0)
    c = nu * nu - 0.25
    one = constant(1.0, iv)
    q = Field(lambda x: c / (x * x), iv, lambda s: c / (s * s), lambda s: c / (1.0 - s) ** 2)
    coeffs = CoefficientTriple(p=one, q=q, w=one)
    hp, hm = 0.5 + nu, 0.5 - nu

    def ua(x):
        return x**hp

    def pua(x):
        return hp * x ** (nu - 0.5)

    def va(x):
        return -(x**hm) / (2 * nu)

    def pva(x):
        return -hm * x ** (-nu - 0.5) / (2 * nu)

    def ub_local(s):
        # (1-s)^{1/2+nu} - (1-s)^{1/2-nu} without cancellation
        return (1.0 - s) ** hm * np.expm1(2 * nu * np.log1p(-s))

    def pub_local(s):
        return hp * (1.0 - s) ** (nu - 0.5) - hm * (1.0 - s) ** (-nu - 0.5)

    fa = EndpointFrame(
        "a",
        0.0,
        0.0,
        Field(ua, iv, ua, lambda s: ua(1.0 - s), label="x^(1/2+nu)"),
        Field(va, iv, va, lambda s: va(1.0 - s)),
        Field(pua, iv, pua, lambda s: pua(1.0 - s)),
        Field(pva, iv, pva, lambda s: pva(1.0 - s)),
        LCNO,
    )
    fb = EndpointFrame(
        "b",
        1.0,
        0.0,
        Field(lambda x: ua(x) - x**hm, iv, lambda s: ua(s) - s**hm, ub_local),
        Field(va, iv, va, lambda s: va(1.0 - s)),
        Field(lambda x: pua(x) - hm * x ** (-nu - 0.5), iv, None, pub_local),
        Field(pva, iv, pva, lambda s: pva(1.0 - s)),
        REGULAR,
    )
    return SLProblem(0.0, 1.0, coeffs, fa, fb, K=0.0, name=f"bessel(nu={nu:g})", meta={"nu": nu})


BUILTINS = {"free": free_problem, "legendre": legendre_problem, "bessel": bessel_problem}


def builtin(name, **kwargs):
    try:
        factory = BUILTINS[name]
    except KeyError:
        raise ProblemFormatError(f"unknown builtin problem {name!r}") from None
    return factory(**kwargs)


# ---------------------------------------------------------------------------
# endpoint quadrature


def _panel_offsets(length, which, endpoint, depth, local):
    """Dyadic panels ``[d 2^-(k+1), d 2^-k]`` in offset coordinates."""
    d = 0.25 * min(1.0, length)
    if not local:
        floor = 16 * _EPS * max(abs(endpoint), 1.0)
        depth = min(depth, int(math.log2(d / floor)))
    ks = np.arange(depth)
    return d * 2.0 ** (-(ks + 1)), d * 2.0 ** (-ks)


def _panel_integrals(g, lo, hi):
    mid = 0.5 * (lo + hi)[:, None]
    half = 0.5 * (hi - lo)[:, None]
    nodes = mid + half * _GL_NODES[None, :]
    vals = g(nodes)
    return (np.abs(vals) * _GL_WEIGHTS[None, :] * half).sum(axis=1), nodes, vals


def _judge_panels(I, tail=8):
    """Classify a sequence of dyadic panel integrals as convergent or divergent."""
    I = np.asarray(I, dtype=float)
    if not np.all(np.isfinite(I)):
        return "divergent"
    if np.all(I == 0.0):
        return "convergent"
    S = np.cumsum(I)
    if I[0] > 0 and S[-1] > 1e6 * I[0]:
        return "divergent"
    t = I[-tail:]
    if np.any(t == 0.0):
        return "convergent" if np.all(I[-3:] == 0.0) else "inconclusive"
    ratios = t[1:] / t[:-1]
    if np.all(ratios < 0.95):
        return "convergent"
    if np.median(ratios) > 1.02:
        return "divergent"
    # slowly varying panels: Raabe's test on I_k ~ k^-r
    k = np.arange(len(I) - len(t) + 1, len(I))
    r = np.median(k * (t[:-1] / t[1:] - 1.0))
    if r > 1.4:
        return "convergent"
    if r < 1.15:
        return "divergent"
    return "inconclusive"


def endpoint_integrability(func_near, length, which, endpoint, depth=60, local=True):
    """Decide whether ``func`` is integrable at a finite endpoint.

    ``func_near(s)`` evaluates the integrand at offset ``s``. Returns
    ``"convergent"``, ``"divergent"`` or ``"inconclusive"``.
    """
    lo, hi = _panel_offsets(length, which, endpoint, depth, local)
    with np.errstate(all="ignore"):
        I, _, _ = _panel_integrals(func_near, lo, hi)
    return _judge_panels(I)


def _infinite_panels(start, depth):
    ks = np.arange(depth)
    return start * 2.0**ks, start * 2.0 ** (ks + 1)


def _numeric_pair(coeffs, which, lambda0, points):
    """Two lambda0-solutions integrated from the interval midpoint to ``points``."""
    a, b = coeffs.interval
    if math.isfinite(a) and math.isfinite(b):
        x0 = 0.5 * (a + b)
    elif math.isfinite(a):
        x0 = a + 1.0
    elif math.isfinite(b):
        x0 = b - 1.0
    else:
        x0 = 0.0
    pts = np.sort(np.asarray(points, dtype=float).ravel())
    if which == "a":
        pts = pts[::-1]

    def rhs(x, y):
        p = float(coeffs.p(x))
        k = float(coeffs.q(x)) - lambda0 * float(coeffs.w(x))
        return [y[1] / p, k * y[0], y[3] / p, k * y[2]]

    sol = integrate.solve_ivp(
        rhs, (x0, pts[-1]), [1.0, 0.0, 0.0, 1.0], t_eval=pts, method="LSODA", rtol=1e-10, atol=1e-14
    )
    if not sol.success:
        raise QuadratureInconclusive(f"could not integrate trial solutions: {sol.message}")
    order = np.argsort(sol.t)
    return sol.t[order], sol.y[0][order], sol.y[2][order]


def classify_endpoint(problem, which, lambda0=None, pair=None, depth=60):
    """Classify endpoint ``which`` ("a" or "b") of a problem candidate.

    ``problem`` is an :class:`SLProblem` or a :class:`CoefficientTriple`.
    ``pair`` is an optional ``(u, v)`` of :class:`Field` solving
    ``(l - lambda0) y = 0``; frames of an :class:`SLProblem` are used when
    omitted, otherwise trial solutions are integrated numerically.
    """
    if isinstance(problem, SLProblem):
        coeffs = problem.coefficients
        if pair is None:
            fr = problem.frame(which)
            pair = (fr.u, fr.v)
        if lambda0 is None:
            lambda0 = problem.lambda0
    else:
        coeffs = problem
    lambda0 = 0.0 if lambda0 is None else float(lambda0)
    a, b = coeffs.interval
    endpoint = a if which == "a" else b
    length = b - a

    if math.isfinite(endpoint):
        local = all(f.has_local(which) for f in (coeffs.p, coeffs.q, coeffs.w))
        verdicts = [
            endpoint_integrability(
                lambda s, f=f: f(coeffs, s), length, which, endpoint, depth, local
            )
            for f in (
                lambda c, s: 1.0 / c.p.near(which, s),
                lambda c, s: c.q.near(which, s),
                lambda c, s: c.w.near(which, s),
            )
        ]
        if all(v == "convergent" for v in verdicts):
            return REGULAR
        lo, hi = _panel_offsets(length, which, endpoint, depth, local)
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        nodes = mid + half * _GL_NODES[None, :]
        if pair is not None:
            uv = [f.near(which, nodes) for f in pair]
        else:
            xs = endpoint + nodes if which == "a" else endpoint - nodes
            t, y1, y2 = _numeric_pair(coeffs, which, lambda0, xs)
            idx = np.searchsorted(t, xs.ravel())
            uv = [y1[idx].reshape(nodes.shape), y2[idx].reshape(nodes.shape)]
        w = coeffs.w.near(which, nodes)
    else:
        other = a if which == "b" else b
        start = abs(other) + 1.0 if math.isfinite(other) else 1.0
        lo, hi = _infinite_panels(start, min(depth, 40))
        mid = 0.5 * (lo + hi)[:, None]
        half = 0.5 * (hi - lo)[:, None]
        nodes = mid + half * _GL_NODES[None, :]
        xs = nodes if which == "b" else -nodes
        if pair is None:
            raise QuadratureInconclusive("infinite endpoints need an explicit solution pair")
        uv = [f(xs) for f in pair]
        w = coeffs.w(xs)

    with np.errstate(all="ignore"):
        judged = []
        for y in uv:
            I = (np.abs(w * y * y) * _GL_WEIGHTS[None, :] * half).sum(axis=1)
            judged.append(_judge_panels(I))
    if any(j == "divergent" for j in judged):
        return LIMIT_POINT
    if any(j == "inconclusive" for j in judged):
        raise QuadratureInconclusive(f"square-integrability at {which} undecided: {judged}")
    # sign changes accumulating near the endpoint mean oscillation
    for y in uv:
        changes = np.sum(np.diff(np.sign(y[-10:]), axis=1) != 0, axis=1)
        if np.count_nonzero(changes) >= 5:
            raise NonOscillationUndetermined(f"trial solution oscillates near endpoint {which}")
    return LCNO


# ---------------------------------------------------------------------------
# non-principal construction


@dataclass(frozen=True)
class NonPrincipal:
    v: Field
    pv: Field


def make_nonprincipal(coefficients, u, pu, alpha, beta, which):
    """Build ``v(x) = -u(x) (beta + int_x^alpha ds / (p u^2))``.

    ``u`` is the principal solution at endpoint ``which`` and ``pu`` its
    quasi-derivative ``p u'``. The returned pair satisfies ``[u, v] = 1``.
    """
    a, b = coefficients.interval
    endpoint = a if which == "a" else b
    alpha, beta = float(alpha), float(beta)
    if not (a < alpha < b):
        raise ValueError("alpha must lie inside the interval")
    p = coefficients.p
    # scan for zeros of u between the endpoint and alpha
    span = abs(alpha - endpoint) if math.isfinite(endpoint) else None
    if span is not None:
        offs = np.concatenate([span * np.logspace(-12, 0, 400), np.linspace(0, span, 401)[1:]])
        xs = endpoint + offs if which == "a" else endpoint - offs
    else:
        xs = alpha + np.sign(endpoint) * np.logspace(-6, 6, 800)
    uvals = u(xs)
    if np.any(uvals == 0.0) or np.any(np.diff(np.sign(uvals)) != 0):
        raise PrincipalVanishes("principal solution vanishes between the endpoint and alpha")

    g = lambda s: 1.0 / (float(p(s)) * float(u(s)) ** 2)  # noqa: E731

    def tail(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        for i, xi in enumerate(x.ravel()):
            val, _ = integrate.quad(g, xi, alpha, limit=200, epsabs=0.0, epsrel=1e-12)
            out.flat[i] = val
        return out

    def v(x):
        x = np.asarray(x, dtype=float)
        return (-u(x) * (beta + tail(x).reshape(x.shape))).reshape(x.shape)

    def pv(x):
        x = np.asarray(x, dtype=float)
        ux = u(x)
        return (-pu(x) * (beta + tail(x).reshape(x.shape)) + 1.0 / ux).reshape(x.shape)

    iv = coefficients.interval
    return NonPrincipal(Field(v, iv, label="nonprincipal"), Field(pv, iv, label="p*nonprincipal'"))


# ---------------------------------------------------------------------------
# validation


@dataclass
class Check:
    name: str
    passed: Optional[bool]
    residual: float = 0.0
    detail: str = ""


@dataclass
class ValidationReport:
    checks: list
    deficiency: tuple = (2, 2)
    classifications: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(c.passed is not False for c in self.checks)

    def failed(self):
        return [c for c in self.checks if c.passed is False]

    def as_dict(self):
        return {
            "passed": self.passed,
            "deficiency": list(self.deficiency),
            "classifications": dict(self.classifications),
            "checks": [
                {"name": c.name, "passed": c.passed, "residual": c.residual, "detail": c.detail}
                for c in self.checks
            ],
        }


def _bracket_near(frame, s):
    u, v, pu, pv = frame.at(s)
    return u * pv - pu * v


def validate_problem(problem, tol_bracket=1e-8, raise_on_fail=True):
    """Check the invariants of ``problem`` and return a :class:`ValidationReport`."""
    checks = []
    a, b = problem.a, problem.b
    L = b - a
    xs = a + L * np.linspace(1e-3, 1 - 1e-3, 201)
    with np.errstate(all="ignore"):
        p, q, w = problem.p(xs), problem.q(xs), problem.w(xs)
    finite = np.all(np.isfinite(p)) and np.all(np.isfinite(q)) and np.all(np.isfinite(w))
    checks.append(Check("coefficients finite", bool(finite)))
    checks.append(Check("p > 0", bool(np.all(p > 0)), float(np.min(p)) if finite else math.nan))
    checks.append(Check("w > 0", bool(np.all(w > 0)), float(np.min(w)) if finite else math.nan))
    da = problem.frame_a.anchor - problem.frame_b.anchor
    checks.append(Check("common anchor", abs(da) < 1e-14, abs(da)))

    classifications = {}
    for which in ("a", "b"):
        fr = problem.frame(which)
        local = problem.local_at(which)
        floor = 1e-12 if local else max(16 * _EPS * max(abs(fr.location), 1.0), 1e-12 * L)
        offs = np.geomspace(1e-3 * L, floor * (1 if local else 10), 6)
        with np.errstate(all="ignore"):
            br = _bracket_near(fr, offs)
        res = float(np.max(np.abs(br - 1.0)))
        checks.append(Check(f"[u,v]({which}) = 1", res < tol_bracket, res))

        deep = np.geomspace(1e-2 * L, 1e-200 if local else floor * 10, 12)
        with np.errstate(all="ignore"):
            ratio = np.abs(fr.u.near(which, deep) / fr.v.near(which, deep))
        ok = bool(np.all(np.isfinite(ratio)) and ratio[-1] < 0.5 * ratio[0] and np.all(np.diff(ratio) <= 1e-12 * ratio[0]))
        checks.append(Check(f"u/v -> 0 at {which}", ok, float(ratio[-1])))

        with np.errstate(all="ignore"):
            pu_int = endpoint_integrability(
                lambda s: 1.0 / (problem.p.near(which, s) * fr.u.near(which, s) ** 2),
                L, which, fr.location, local=local,
            )
            pv_int = endpoint_integrability(
                lambda s: 1.0 / (problem.p.near(which, s) * fr.v.near(which, s) ** 2),
                L, which, fr.location, local=local,
            )
        checks.append(
            Check(
                f"1/(p u^2) non-integrable at {which}",
                None if pu_int == "inconclusive" else pu_int == "divergent",
                detail=pu_int,
            )
        )
        checks.append(
            Check(
                f"1/(p v^2) integrable at {which}",
                None if pv_int == "inconclusive" else pv_int == "convergent",
                detail=pv_int,
            )
        )
        try:
            cls = classify_endpoint(problem, which)
        except (QuadratureInconclusive, NonOscillationUndetermined) as exc:
            cls = None
            checks.append(Check(f"classification at {which}", None, detail=str(exc)))
        else:
            checks.append(Check(f"classification at {which}", cls != LIMIT_POINT, detail=cls))
        classifications[which] = cls

        # frame functions solve (l - lambda0) y = 0 at interior sample points
        xi = a + L * np.linspace(0.1, 0.9, 9)
        h = 1e-4 * L
        worst = 0.0
        for f, pf in ((fr.u, fr.pu), (fr.v, fr.pv)):
            with np.errstate(all="ignore"):
                dpf = (pf(xi + h) - pf(xi - h)) / (2 * h)
                rhs = (problem.q(xi) - problem.lambda0 * problem.w(xi)) * f(xi)
                scale = np.abs(dpf) + np.abs(rhs) + np.abs(pf(xi)) + 1.0
                worst = max(worst, float(np.max(np.abs(dpf - rhs) / scale)))
        checks.append(Check(f"frame residual at {which}", worst < 1e-5, worst))

    report = ValidationReport(checks, (2, 2), classifications)
    if raise_on_fail and not report.passed:
        names = ", ".join(c.name for c in report.failed())
        raise InvalidProblem(f"problem failed validation: {names}", report)
    return report


# ---------------------------------------------------------------------------
# problem files


def _sym():
    import sympy

    return sympy


def _parse(expr, symbols):
    sp = _sym()
    from sympy.parsing.sympy_parser import parse_expr, standard_transformations

    if isinstance(expr, (int, float)):
        return sp.nsimplify(expr)
    try:
        return parse_expr(str(expr), local_dict=symbols, transformations=standard_transformations)
    except Exception as exc:  # sympy raises a zoo of exception types here
        raise ProblemFormatError(f"cannot parse expression {expr!r}: {exc}") from None


def _as_number(v):
    sp = _sym()
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("inf", "+inf", "infinity", "oo"):
            return sp.oo
        if s in ("-inf", "-infinity", "-oo"):
            return -sp.oo
        return sp.sympify(v)
    if isinstance(v, float) and math.isinf(v):
        return sp.oo if v > 0 else -sp.oo
    return sp.nsimplify(v)


def _symbolic_field(expr, x, a, b, interval):
    sp = _sym()
    s = sp.Symbol("s", positive=True)
    f = sp.lambdify(x, expr, "numpy")
    locs = []
    for end, sub in (("a", a + s if a.is_finite else None), ("b", b - s if b.is_finite else None)):
        if sub is None:
            locs.append(None)
            continue
        try:
            e = sp.expand(expr.subs(x, sub))
        except Exception:
            e = expr.subs(x, sub)
        locs.append(sp.lambdify(s, e, "numpy"))
    return Field(f, interval, locs[0], locs[1], label=str(expr))


def load_problem(source):
    """Build an :class:`SLProblem` from a JSON file path, JSON string or dict.

    Expected keys: ``interval``, ``coefficients`` (``p``, ``q``, ``w``
    expressions in ``x`` or ``{"builtin": name, ...}``), ``lambda0``,
    ``frames`` (``"auto-builtin"`` or ``{"a": {"u": .., "v": ..}, "b": ..}``)
    and ``K``. A frame may replace ``v`` by ``{"nonprincipal": {"alpha": ..,
    "beta": ..}}``. An optional ``transform`` ``{"x": expr_in_t, "interval":
    [t0, t1]}`` maps an infinite interval to a finite one.
    """
    if isinstance(source, dict):
        spec = source
    else:
        text = str(source)
        if text.lstrip().startswith("{"):
            spec = json.loads(text)
        else:
            spec = json.loads(Path(text).read_text())
    coeff_spec = spec.get("coefficients", {})
    if isinstance(coeff_spec, str):
        coeff_spec = {"builtin": coeff_spec}
    if "builtin" in coeff_spec:
        kwargs = {k: v for k, v in coeff_spec.items() if k != "builtin"}
        prob = builtin(coeff_spec["builtin"], **kwargs)
        frames = spec.get("frames", "auto-builtin")
        if frames != "auto-builtin":
            raise ProblemFormatError("builtin coefficients only support frames='auto-builtin'")
        if "K" in spec:
            prob = replace(prob, K=spec["K"])
        return prob

    sp = _sym()
    x = sp.Symbol("x", real=True)
    t = sp.Symbol("t", real=True)
    try:
        a_x, b_x = (_as_number(v) for v in spec["interval"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ProblemFormatError(f"bad interval: {exc}") from None
    names = {"x": x, "pi": sp.pi, "E": sp.E}
    p, q, w = (_parse(coeff_spec.get(k, d), names) for k, d in (("p", 1), ("q", 0), ("w", 1)))
    lam0 = float(spec.get("lambda0", 0.0))
    frames = spec.get("frames")
    if not isinstance(frames, dict) or "a" not in frames or "b" not in frames:
        raise ProblemFormatError("custom problems need frames for both endpoints")

    transform = spec.get("transform")
    var, a_s, b_s = x, a_x, b_x
    phi = None
    if transform is not None:
        phi = _parse(transform["x"], {"t": t, "pi": sp.pi, "E": sp.E})
        a_s, b_s = (_as_number(v) for v in transform["interval"])
        dphi = sp.diff(phi, t)
        p, q, w = p.subs(x, phi) / dphi, q.subs(x, phi) * dphi, w.subs(x, phi) * dphi
        var = t
    if not (a_s.is_finite and b_s.is_finite):
        raise ProblemFormatError("infinite endpoints need a compactifying transform")
    iv = (float(a_s), float(b_s))
    fp, fq, fw = (_symbolic_field(e, var, a_s, b_s, iv) for e in (p, q, w))
    coeffs = CoefficientTriple(fp, fq, fw)

    built = {}
    for which in ("a", "b"):
        fs = frames[which]
        u_x = _parse(fs["u"], names)
        pu_x = sp.expand(_parse(coeff_spec.get("p", 1), names) * sp.diff(u_x, x))
        u_t = u_x.subs(x, phi) if phi is not None else u_x
        pu_t = pu_x.subs(x, phi) if phi is not None else pu_x
        u = _symbolic_field(u_t, var, a_s, b_s, iv)
        pu = _symbolic_field(pu_t, var, a_s, b_s, iv)
        if "v" in fs:
            v_x = _parse(fs["v"], names)
            pv_x = sp.expand(_parse(coeff_spec.get("p", 1), names) * sp.diff(v_x, x))
            v_t = v_x.subs(x, phi) if phi is not None else v_x
            pv_t = pv_x.subs(x, phi) if phi is not None else pv_x
            v = _symbolic_field(v_t, var, a_s, b_s, iv)
            pv = _symbolic_field(pv_t, var, a_s, b_s, iv)
        elif "nonprincipal" in fs:
            npc = fs["nonprincipal"]
            built_np = make_nonprincipal(coeffs, u, pu, npc.get("alpha", 0.5 * (iv[0] + iv[1])), npc.get("beta", 0.0), which)
            v, pv = built_np.v, built_np.pv
        else:
            raise ProblemFormatError(f"frame {which} needs 'v' or 'nonprincipal'")
        loc = iv[0] if which == "a" else iv[1]
        built[which] = EndpointFrame(which, loc, lam0, u, v, pu, pv, fs.get("classification", LCNO))
    K = spec.get("K")
    return SLProblem(
        iv[0], iv[1], coeffs, built["a"], built["b"],
        K=None if K is None else float(K),
        name=spec.get("name", "custom"),
        meta={"source": "json", "transform": transform},
    )


def problem_to_dict(problem):
    """Summary of a problem suitable for JSON output."""
    return {
        "name": problem.name,
        "interval": [problem.a, problem.b],
        "lambda0": problem.lambda0,
        "K": problem.K,
    }
