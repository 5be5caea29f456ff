"""Reproducibility battery: the twelve acceptance checks as plain functions.

Each check returns a :class:`CheckResult`. Sample counts default to the
full sizes; ``quick=True`` shrinks them for smoke runs from the command line.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import lines, oracle, specrep, spectra, weyl
from .errors import SLXError
from .odecore import BoundaryEvaluator
from .problem import bessel_problem, free_problem, legendre_problem


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:2d} {self.name} ({self.seconds:.1f}s) {_short(self.detail)}"

    def as_dict(self, timings=False):
        """Timings are left out by default so reports are reproducible byte for byte."""
        detail = self.detail if timings else {k: v for k, v in self.detail.items() if k != "runtime"}
        out = {"number": self.number, "name": self.name, "passed": bool(self.passed), "detail": detail}
        if timings:
            out["seconds"] = round(self.seconds, 3)
        return out


def _short(detail):
    items = []
    for k, v in detail.items():
        if isinstance(v, float):
            items.append(f"{k}={v:.3g}")
        elif isinstance(v, (int, str, bool)):
            items.append(f"{k}={v}")
    return " ".join(items)


def _timed(number, name, fn):
    t0 = time.perf_counter()
    try:
        passed, detail = fn()
    except SLXError as exc:
        passed, detail = False, {"error": f"{type(exc).__name__}: {exc}"}
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t0)


def _match(found, expected):
    """Max distance after pairing sorted lists of equal length; inf otherwise."""
    found = sorted(found)
    expected = sorted(expected)
    if len(found) != len(expected):
        return math.inf
    return max((abs(x - y) for x, y in zip(found, expected)), default=0.0)


def random_complex_hermitian(rng, scale=2.0):
    a, d = rng.normal(0, scale, 2)
    r = rng.uniform(0.2, 3.0)
    phase = rng.uniform(0.2, math.pi - 0.2) * rng.choice([-1, 1])
    z = r * np.exp(1j * phase)
    return np.array([[a, z], [np.conj(z), d]])


def random_real_symmetric(rng, scale=2.0):
    a, d, c = rng.normal(0, scale, 3)
    return np.array([[a, c], [c, d]])


def random_hermitian(rng, scale=1.0):
    X = rng.normal(0, scale, (2, 2)) + 1j * rng.normal(0, scale, (2, 2))
    return 0.5 * (X + X.conj().T)


def _avoiding(rng, n, lo, hi, bad, gap):
    out = []
    while len(out) < n:
        x = rng.uniform(lo, hi)
        if all(abs(x - b) > gap for b in bad):
            out.append(x)
    return np.array(out)


# ---------------------------------------------------------------------------
# the checks


def closed_form_spectra(limit=10.0):
    p = free_problem()
    ev = BoundaryEvaluator(p)
    t0 = time.perf_counter()
    s0 = [r.lam for r in spectra.eigenvalues_L0(p, (-1, 20), evaluator=ev)]
    si = [r.lam for r in spectra.eigenvalues_Linf(p, (-1, 20), evaluator=ev)]
    elapsed = time.perf_counter() - t0
    e0 = _match(s0, [0, 1, 4, 9, 16])
    ei = _match(si, [1, 4, 9, 16])
    ok = e0 < 1e-8 and ei < 1e-8 and elapsed < limit
    return ok, {"err_L0": e0, "err_Linf": ei, "runtime": elapsed}


def legendre_friedrichs(N=4000, limit=60.0):
    p = legendre_problem()
    t0 = time.perf_counter()
    s = [r.lam for r in spectra.eigenvalues_Linf(p, (-1, 35), evaluator=BoundaryEvaluator(p))]
    exact = [n * (n + 1) for n in range(6)]
    e_cont = _match(s, exact)
    model = oracle.discretize(p, "Linf", N=N, delta=1e-6)
    so = oracle.oracle_spectrum(model, lam_range=(-1, 35)).eigenvalues
    e_or = _match(so, exact)
    elapsed = time.perf_counter() - t0
    ok = e_cont < 1e-6 and e_or < 1e-2 and elapsed < limit
    return ok, {"err_continuum": e_cont, "err_oracle": e_or, "runtime": elapsed}


def minf_identity(rng, n=100):
    worst = 0.0
    for p, bad in (
        (free_problem(), [k * k for k in range(7)]),
        (legendre_problem(), None),
    ):
        ev = BoundaryEvaluator(p)
        if bad is None:
            bad = [r.lam for r in spectra.eigenvalues_L0(p, (-5, 32), evaluator=ev)]
            bad += [r.lam for r in spectra.eigenvalues_Linf(p, (-5, 32), evaluator=ev)]
        lams = _avoiding(rng, n, -1.0, 30.0, bad, 1e-3)
        bd = ev(lams)
        M0 = weyl.m0_matrices(bd)
        Mi = weyl.minf_matrices(bd)
        err = np.linalg.norm(Mi + np.linalg.inv(M0), axis=(1, 2)) / np.linalg.norm(Mi, axis=(1, 2))
        worst = max(worst, float(np.max(err)))
    return worst < 1e-10, {"max_rel_err": worst}


def herglotz(rng, n=100):
    worst = math.inf
    for p in (free_problem(), legendre_problem(), bessel_problem()):
        ev = BoundaryEvaluator(p)
        re = rng.uniform(-1.0, 30.0, n)
        for im in (1e-2, 1e-1, 1.0):
            m = weyl.herglotz_min_eig(p, re + 1j * im, evaluator=ev)
            worst = min(worst, float(np.min(m)))
    return worst >= -1e-10, {"min_eig": worst}


def degeneracy_round_trip(rng, n=50, step=1e-3):
    p = free_problem()
    ev = BoundaryEvaluator(p)
    bad = [k * k for k in range(8)]
    lams = _avoiding(rng, n, max(p.K or 0.0, 0.0), 30.0, bad, 0.05)
    fails = []
    for lam in lams:
        dp = spectra.degenerate_parameter(p, lam, evaluator=ev)
        th = dp.theta
        shape_ok = (
            np.all(np.isreal(th))
            and abs(np.linalg.det(th)) > 1e-12
            and abs(th[0, 1]) > 1e-12
            and np.allclose(dp.vartheta, -np.linalg.inv(th), rtol=1e-8, atol=1e-10)
        )
        m = spectra.multiplicity(p, th, lam, evaluator=ev)
        drops = []
        for pert in ("11", "22", "12"):
            t2 = th.astype(float).copy()
            if pert == "11":
                t2[0, 0] += step
            elif pert == "22":
                t2[1, 1] += step
            else:
                t2[0, 1] += step
                t2[1, 0] += step
            drops.append(spectra.multiplicity(p, t2, lam, evaluator=ev) <= 1)
        if not (shape_ok and m == 2 and all(drops)):
            fails.append(float(lam))
    return not fails, {"samples": n, "failures": len(fails), "failed_at": fails[:5]}


def simplicity(rng, n=200, span=30.0):
    p = free_problem()
    K = p.K or 0.0
    thetas = [random_complex_hermitian(rng) for _ in range(n)]
    recs = spectra.eigenvalues_many(p, thetas, (K, K + span), evaluator=BoundaryEvaluator(p))
    checked = 0
    violations = 0
    for rs in recs:
        for r in rs:
            if r.via == spectra.VIA_CLASSICAL:
                continue
            checked += 1
            violations += r.multiplicity != 1
    return violations == 0 and checked > 0, {"eigenvalues": checked, "violations": violations}


def basic_intersection():
    worst = 0.0
    count = 0
    for p, rng_ in ((free_problem(), (-1, 30)), (legendre_problem(), (-1, 35)), (bessel_problem(), (-1, 40))):
        ev = BoundaryEvaluator(p)
        pts = [r.lam for r in spectra.eigenvalues_L0(p, rng_, evaluator=ev)]
        pts += [r.lam for r in spectra.eigenvalues_Linf(p, rng_, evaluator=ev)]
        bd = ev(np.array(pts))
        res = np.abs(bd.u10 * bd.u21 - 1.0)
        worst = max(worst, float(np.max(res)))
        count += len(pts)
    return worst < 1e-7, {"points": count, "max_residual": worst}


def line_families(rng, n=100, grid=200):
    p = free_problem()
    ev = BoundaryEvaluator(p)
    lams = np.linspace(0.05, 30.05, grid)
    lams = lams[np.min(np.abs(lams[:, None] - np.arange(7)[None, :] ** 2), axis=1) > 1e-3]
    ev(lams)
    too_many = 0
    cert_fail = 0
    for k in range(n):
        while True:
            vt = random_hermitian(rng)
            if abs(np.linalg.det(vt)) > 1e-3:
                break
        fam = lines.LineFamily(random_hermitian(rng), vt)
        for i, lam in enumerate(lams):
            sol = lines.t_roots(p, fam, lam, evaluator=ev)
            too_many += len(sol.roots) > 2
            if k < 5 and i % 20 == 0:
                for t in sol.roots:
                    cert_fail += lines.certify_root(p, fam, lam, t, evaluator=ev) < 1
    diag_err = 0.0
    for _ in range(n):
        z, e = rng.normal(0, 1.5, 2)
        fam = lines.LineFamily(np.zeros((2, 2)), np.diag([z, e]))
        for lam in lams:
            a = sorted(lines.t_roots(p, fam, lam, evaluator=ev).roots)
            b = sorted(lines.t_diag(p, z, e, lam, evaluator=ev))
            if len(a) != len(b):
                diag_err = math.inf
                continue
            for x, y in zip(a, b):
                diag_err = max(diag_err, abs(x - y) / max(1.0, abs(y)))
    quarter = lines.t_diag(p, 1.0, 1.0, 0.25, evaluator=ev)
    q_err = _match(quarter, [-0.5, 0.5])
    ok = too_many == 0 and cert_fail == 0 and diag_err < 1e-9 and q_err < 1e-10
    return ok, {"over_two": too_many, "uncertified": cert_fail, "diag_err": diag_err, "quarter_err": q_err}


def discriminant_check():
    p = free_problem()
    ev = BoundaryEvaluator(p)
    lam = np.linspace(0, 25, 501)
    D = spectra.discriminant(p, np.eye(2), lam, evaluator=ev)
    d_err = float(np.max(np.abs(D - 2 * np.cos(np.sqrt(lam) * np.pi))))
    bc = spectra.CoupledBC(0.0, np.eye(2))
    classical = [r.lam for r in spectra.coupled_eigenvalues(p, bc, (-1, 20), evaluator=ev)]
    relation = spectra.eigenvalues(p, bc, (-1, 20), evaluator=ev)
    e1 = _match(classical, [0, 4, 16])
    e2 = _match([r.lam for r in relation], [0, 4, 16])
    mult = [r.multiplicity for r in relation]
    ok = d_err < 1e-7 and e1 < 1e-7 and e2 < 1e-7 and mult == [1, 2, 2]
    return ok, {"disc_err": d_err, "classical_err": e1, "relation_err": e2, "multiplicities": str(mult)}


def spectral_weights():
    p = free_problem()
    ev = BoundaryEvaluator(p)
    worst_tr = 0.0
    worst_angle = 0.0
    ranks = []
    agree = True
    for r in spectra.eigenvalues_L0(p, (-1, 20), evaluator=ev):
        pm = specrep.point_mass_L0(p, r.lam, evaluator=ev)
        n = round(math.sqrt(max(r.lam, 0.0)))
        expected = 2 / math.pi if n == 0 else 4 / math.pi
        worst_tr = max(worst_tr, abs(pm.trace - expected))
        vec = specrep.eigenvector_rep(p, None, r.lam, evaluator=ev).coefficients[0]
        worst_angle = max(worst_angle, specrep.angle(pm.direction(), vec))
        ranks.append(pm.rank)
        gap = np.linalg.norm(pm.weight - pm.alt_weight)
        agree &= bool(gap <= pm.error_estimate + pm.alt_error)
    ok = worst_tr < 1e-6 and all(k == 1 for k in ranks) and worst_angle < 1e-6 and agree
    return ok, {"trace_err": worst_tr, "angle": worst_angle, "ranks": str(ranks), "methods_agree": agree}


def relation_reduction(rng, n=100, span=(0.0, 30.0)):
    p = free_problem()
    ev = BoundaryEvaluator(p)
    rels = []
    for _ in range(n):
        o = rng.normal(size=2) + 1j * rng.normal(size=2)
        rels.append(spectra.Relation.from_parts(rng.normal(0, 2), o))
    recs = spectra.eigenvalues_many(p, rels, span, evaluator=ev)
    lams, funcs = [], []
    for rel, rs in zip(rels, recs):
        for r in rs:
            bd = spectra._real_bd(ev.one(r.lam))
            if not (spectra.in_rho_l0(bd) or spectra.in_rho_linf(bd)):
                continue
            red = spectra.relation_to_matrix(p, rel, r.lam, evaluator=ev)
            param = red.matrix if red.side == "theta" else lines.vartheta_parameter(red.matrix)
            lams.append(r.lam)
            funcs.append(spectra.eigen_function(param))
    if not lams:
        return False, {"eigenvalues": 0}
    lams = np.array(lams)
    tol = 10 * spectra.TOL_ROOT * np.maximum(1.0, np.abs(lams))
    # each reduced matrix must have a root within tol of the relation eigenvalue
    scan = spectra._Scan(ev, funcs)
    idx = np.arange(lams.size)
    fa, _ = scan.values(lams - tol, idx)
    fb, _ = scan.values(lams + tol, idx)
    f0, s0 = scan.values(lams, idx)
    hit = (np.sign(fa) != np.sign(fb)) | (np.abs(f0) <= 1e-9 * s0)
    misses = int(np.sum(~hit))
    return misses == 0, {"eigenvalues": int(lams.size), "misses": misses}


def oracle_concordance(rng, n=10, N=2000, span=(0.0, 25.0)):
    p = free_problem()
    ev = BoundaryEvaluator(p)
    worst = 0.0
    count_mismatch = 0
    for _ in range(n):
        th = random_real_symmetric(rng)
        model = oracle.discretize(p, th, N=N)
        tol = oracle.tolerance(model)
        cont = [r.lam for r in spectra.eigenvalues(p, th, span, evaluator=ev)]
        disc = list(oracle.oracle_spectrum(model, lam_range=(span[0] - tol, span[1] + tol)).eigenvalues)
        # drop oracle values whose continuum partner fell just outside the range
        disc = [x for x in disc if span[0] <= x <= span[1] or any(abs(x - c) <= tol for c in cont)]
        err = _match(disc, cont)
        if err == math.inf:
            count_mismatch += 1
        else:
            worst = max(worst, err / tol)
    return count_mismatch == 0 and worst <= 1.0, {"count_mismatch": count_mismatch, "worst_err_over_tol": worst}


CHECKS = (
    (1, "closed-form spectra of the free problem"),
    (2, "Legendre Friedrichs eigenvalues"),
    (3, "Minf = -M0^-1 identity"),
    (4, "Herglotz property of M0"),
    (5, "degeneracy round trip"),
    (6, "simplicity for complex parameters"),
    (7, "u10 u21 = 1 on the distinguished spectra"),
    (8, "line families"),
    (9, "discriminant and periodic eigenvalues"),
    (10, "spectral weights of L0"),
    (11, "relation reduction"),
    (12, "oracle concordance"),
)


def run_check(number, seed=0, quick=False):
    rng = np.random.default_rng([seed, number])
    name = dict(CHECKS)[number]
    fns = {
        1: lambda: closed_form_spectra(),
        2: lambda: legendre_friedrichs(),
        3: lambda: minf_identity(rng, 20 if quick else 100),
        4: lambda: herglotz(rng, 20 if quick else 100),
        5: lambda: degeneracy_round_trip(rng, 10 if quick else 50),
        6: lambda: simplicity(rng, 20 if quick else 200),
        7: lambda: basic_intersection(),
        8: lambda: line_families(rng, 10 if quick else 100, 40 if quick else 200),
        9: lambda: discriminant_check(),
        10: lambda: spectral_weights(),
        11: lambda: relation_reduction(rng, 10 if quick else 100),
        12: lambda: oracle_concordance(rng, 3 if quick else 10),
    }
    return _timed(number, name, fns[number])


def run_all(seed=0, quick=False, only=None):
    numbers = [n for n, _ in CHECKS if only is None or n in only]
    return [run_check(n, seed, quick) for n in numbers]
