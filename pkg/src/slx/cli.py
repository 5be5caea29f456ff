"""Command-line front end (``slx``)."""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import lines, oracle, specrep, spectra, suite, weyl
from .errors import SLXError
from .odecore import CONVENTION, BoundaryEvaluator
from .problem import BUILTINS, builtin, classify_endpoint, load_problem, validate_problem

SCHEMA = 1


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: str
    param: object = None
    lam_range: tuple = None
    out: str = "json"
    seed: int = 0


# ---------------------------------------------------------------------------
# parsing helpers


def _numbers(text, n):
    try:
        vals = [complex(x.strip().replace(" ", "")) for x in text.split(",")]
    except ValueError as exc:
        raise UsageError(f"cannot parse numbers from {text!r}") from exc
    if len(vals) != n:
        raise UsageError(f"expected {n} numbers, got {len(vals)} in {text!r}")
    return vals


def _matrix(text):
    m = np.array(_numbers(text, 4)).reshape(2, 2)
    return m.real if np.all(m.imag == 0) else m


def parse_param(text):
    """``matrix:a,b,c,d``, ``relation:A;B``, ``coupled:alpha;R``, ``L0`` or ``Linf``."""
    if text is None:
        raise UsageError("a boundary parameter is required")
    kind, _, body = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "matrix":
            return spectra.Matrix(_matrix(body))
        if kind == "relation":
            a, b = body.split(";")
            return spectra.as_parameter(spectra.Relation(_matrix(a), _matrix(b)))
        if kind == "coupled":
            alpha, r = body.split(";")
            return spectra.CoupledBC(float(alpha), _matrix(r).real)
        if kind == "l0":
            return spectra.Relation.l0()
        if kind in ("linf", "friedrichs"):
            return spectra.Matrix(np.zeros((2, 2)))
    except (ValueError, SLXError) as exc:
        raise UsageError(f"invalid parameter {text!r}: {exc}") from exc
    raise UsageError(f"unknown parameter kind {kind!r}")


def parse_range(text, name="range"):
    parts = text.split(":")
    if len(parts) not in (2, 3):
        raise UsageError(f"{name} must look like lo:hi or lo:hi:n")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        n = int(parts[2]) if len(parts) == 3 else None
    except ValueError as exc:
        raise UsageError(f"cannot parse {name} {text!r}") from exc
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        raise UsageError(f"{name} must be finite with lo < hi")
    return lo, hi, n


def get_problem(arg):
    if arg in BUILTINS and not Path(arg).exists():
        return builtin(arg)
    try:
        return load_problem(Path(arg))
    except FileNotFoundError as exc:
        raise UsageError(f"problem file {arg!r} not found") from exc


# ---------------------------------------------------------------------------
# output


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return float(x.real) if x.imag == 0 else {"re": float(x.real), "im": float(x.imag)}
    return x


def emit(payload, fmt, stream, columns=None, rows=None):
    if fmt == "csv":
        w = csv.writer(stream, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow(["" if v is None else v for v in r])
        return
    doc = {"schema": SCHEMA, "convention": CONVENTION}
    doc.update(payload)
    stream.write(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_classify(args, out):
    p = get_problem(args.problem)
    report = validate_problem(p, raise_on_fail=False)
    ends = {}
    for which in ("a", "b"):
        try:
            ends[which] = classify_endpoint(p, which)
        except SLXError as exc:
            ends[which] = f"undetermined: {exc}"
    ev = BoundaryEvaluator(p)
    model = oracle.discretize(p, "Linf", N=800)
    guess = float(oracle.oracle_spectrum(model, k=1).eigenvalues[0])
    refined = spectra.eigenvalues_Linf(p, (guess - 1.0, guess + 1.0), evaluator=ev)
    k_est = refined[0].lam if refined else guess
    if abs(k_est) <= spectra.TOL_ROOT * 10:
        k_est = 0.0  # below the root tolerance
    emit(
        {
            "command": "classify",
            "problem": p.name,
            "endpoints": ends,
            "K_estimate": k_est,
            "K_estimate_source": "lowest eigenvalue of the Friedrichs extension",
            "validation": report.as_dict(),
        },
        "json",
        out,
    )
    return 0


def cmd_spectrum(args, out):
    p = get_problem(args.problem)
    param = parse_param(args.param)
    lo, hi, _ = parse_range(args.range)
    recs = spectra.eigenvalues(p, param, (lo, hi), allow_classical=not args.strict)
    cols = ["lambda", "multiplicity", "degenerate", "residual", "via"]
    emit(
        {"command": "spectrum", "problem": p.name, "param": args.param, "range": [lo, hi],
         "eigenvalues": [r.as_dict() for r in recs]},
        args.out, out, cols, [[r.lam, r.multiplicity, r.degenerate, r.residual, r.via] for r in recs],
    )
    return 0


def _lambdas(text):
    if ":" in text:
        lo, hi, n = parse_range(text, "lambda")
        return np.linspace(lo, hi, n or 11)
    try:
        return np.array([complex(x) for x in text.split(",")])
    except ValueError as exc:
        raise UsageError(f"cannot parse lambda {text!r}") from exc


def cmd_mfunction(args, out):
    p = get_problem(args.problem)
    lams = _lambdas(args.lam)
    kind = args.kind
    rows = []
    ev = BoundaryEvaluator(p)
    theta = None
    if kind == "Mtheta":
        param = parse_param(args.param)
        if not isinstance(param, spectra.Matrix):
            raise UsageError("Mtheta needs a matrix parameter")
        theta = param.theta
    for lam in lams:
        lam = complex(lam)
        entry = {"lambda": lam}
        try:
            if kind == "M0":
                val = weyl.m0(p, lam, evaluator=ev)
            elif kind == "Minf":
                val = weyl.m_inf(p, lam, evaluator=ev)
            else:
                val = weyl.m_theta(p, theta, lam, evaluator=ev)
            entry["matrix"] = val.matrix
            entry["condition"] = val.condition_estimate
        except SLXError as exc:
            entry["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(entry)
    cols = ["lambda_re", "lambda_im"] + [f"m{i}{j}_{part}" for i in (1, 2) for j in (1, 2) for part in ("re", "im")]
    table = []
    for e in rows:
        m = np.asarray(e.get("matrix", np.full((2, 2), np.nan)), dtype=complex)
        table.append([e["lambda"].real, e["lambda"].imag] + [v for z in m.ravel() for v in (z.real, z.imag)])
    emit({"command": "mfunction", "problem": p.name, "kind": kind, "values": rows}, args.out, out, cols, table)
    return 0


def cmd_line_scan(args, out):
    p = get_problem(args.problem)
    vtt = _matrix(args.theta_tilde)
    vt = _matrix(args.theta)
    lo, hi, n = parse_range(args.lam, "lambda")
    tlo, thi, _ = parse_range(args.t, "t") if args.t else (-math.inf, math.inf, None)
    fam = lines.LineFamily(vtt, vt, (tlo, thi))
    ev = BoundaryEvaluator(p)
    lams = np.linspace(lo, hi, n or 201)
    ev(lams)
    rows = []
    for lam in lams:
        try:
            sol = lines.t_roots(p, fam, lam, evaluator=ev)
        except SLXError as exc:
            rows.append([lam, None, None, type(exc).__name__, None])
            continue
        if sol.roots is lines.AllT:
            rows.append([lam, None, None, "all-t", sol.double_t])
            continue
        ts = [t for t in sol.roots if tlo <= t <= thi]
        ts += [None] * (2 - len(ts))
        rows.append([lam, ts[0], ts[1], sol.case, sol.double_t])
    cols = ["lambda", "t_root_1", "t_root_2", "case", "double_t"]
    emit({"command": "line-scan", "problem": p.name, "rows": [dict(zip(cols, r)) for r in rows]},
         args.out, out, cols, rows)
    return 0


def cmd_weights(args, out):
    p = get_problem(args.problem)
    lo, hi, _ = parse_range(args.range)
    ev = BoundaryEvaluator(p)
    results = []
    if args.param is None:
        for r in spectra.eigenvalues_L0(p, (lo, hi), evaluator=ev):
            results.append(specrep.point_mass_L0(p, r.lam, evaluator=ev).as_dict())
        side = "L0"
    else:
        param = parse_param(args.param)
        if not isinstance(param, spectra.Matrix) or abs(np.linalg.det(param.theta)) < 1e-12:
            raise UsageError("weights needs an invertible matrix parameter")
        vt = -np.linalg.inv(param.theta)
        for r in spectra.eigenvalues(p, param, (lo, hi), evaluator=ev):
            try:
                results.append(specrep.point_mass_theta(p, vt, r.lam, evaluator=ev).as_dict())
            except SLXError as exc:
                results.append({"lambda": r.lam, "error": f"{type(exc).__name__}: {exc}"})
        side = "vartheta = -theta^-1"
    emit({"command": "weights", "problem": p.name, "side": side, "weights": results}, "json", out)
    return 0


def cmd_oracle_check(args, out):
    p = get_problem(args.problem)
    param = parse_param(args.param)
    lo, hi, _ = parse_range(args.range)
    model = oracle.discretize(p, param if not isinstance(param, spectra.CoupledBC) else param, N=args.N)
    tol = oracle.tolerance(model)
    disc = list(oracle.oracle_spectrum(model, lam_range=(lo - tol, hi + tol)).eigenvalues)
    cont = []
    for r in spectra.eigenvalues(p, param, (lo, hi)):
        cont += [r.lam] * r.multiplicity
    rows = []
    for c in cont:
        j = int(np.argmin([abs(d - c) for d in disc])) if disc else None
        d = disc.pop(j) if j is not None else None
        err = abs(d - c) if d is not None else None
        rows.append([c, d, err, "pass" if err is not None and err <= tol else "fail"])
    for d in disc:
        if lo <= d <= hi:
            rows.append([None, d, None, "fail"])
    cols = ["continuum", "oracle", "abs_err", "status"]
    w = max(len(c) for c in cols) + 12
    out.write("".join(c.ljust(w) for c in cols) + "\n")
    for r in rows:
        out.write("".join(("" if v is None else f"{v:.10g}" if isinstance(v, float) else str(v)).ljust(w) for v in r) + "\n")
    out.write(f"tolerance {tol:.3g}  N={args.N}\n")
    return 0


def cmd_suite(args, out):
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    if args.problem and args.problem not in ("free", "builtin"):
        get_problem(args.problem)  # must load; the battery itself uses the built-ins
    results = suite.run_all(seed=args.seed, quick=args.quick, only=only)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    payload = {"command": "suite", "seed": args.seed, "quick": args.quick,
               "checks": [r.as_dict(timings=args.timings) for r in results],
               "passed": all(r.passed for r in results)}
    if args.report:
        with open(args.report, "w") as fh:
            emit(payload, "json", fh)
    emit(payload, "json", out)
    return 0 if payload["passed"] else 1


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="slx", description="Self-adjoint extensions of limit-circle Sturm-Liouville problems.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def common(sp, out=True):
        sp.add_argument("--problem", required=True, help="problem file or built-in name")
        if out:
            sp.add_argument("--out", choices=("json", "csv"), default="json")

    sp = sub.add_parser("classify")
    sp.add_argument("--problem", required=True)

    sp = sub.add_parser("spectrum")
    common(sp)
    sp.add_argument("--param", required=True)
    sp.add_argument("--range", required=True)
    sp.add_argument("--strict", action="store_true", help="refuse points in both distinguished spectra")

    sp = sub.add_parser("mfunction")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--lambda", dest="lam", required=True, help="values a,b+cj or a grid lo:hi:n")
    sp.add_argument("--kind", choices=("M0", "Minf", "Mtheta"), default="M0")
    sp.add_argument("--param")
    sp.add_argument("--out", choices=("json", "csv"), default="csv")

    sp = sub.add_parser("line-scan")
    common(sp)
    sp.add_argument("--theta-tilde", required=True)
    sp.add_argument("--theta", required=True)
    sp.add_argument("--lambda", dest="lam", required=True)
    sp.add_argument("--t")

    sp = sub.add_parser("weights")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--param")
    sp.add_argument("--range", required=True)
    sp.add_argument("--out", choices=("json",), default="json")

    sp = sub.add_parser("oracle-check")
    sp.add_argument("--problem", required=True)
    sp.add_argument("--param", required=True)
    sp.add_argument("--range", required=True)
    sp.add_argument("-N", type=int, default=2000)

    sp = sub.add_parser("suite")
    sp.add_argument("--problem", default="free")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--only", help="comma-separated check numbers")
    sp.add_argument("--report", help="write the JSON report here as well")
    sp.add_argument("--timings", action="store_true", help="include wall-clock times in the JSON")
    return ap


COMMANDS = {
    "classify": cmd_classify,
    "spectrum": cmd_spectrum,
    "mfunction": cmd_mfunction,
    "line-scan": cmd_line_scan,
    "weights": cmd_weights,
    "oracle-check": cmd_oracle_check,
    "suite": cmd_suite,
}


def _limit_threads():
    n = os.environ.get("SLX_THREADS")
    if not n:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, n)
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    threadpool_limits(int(n))


def run(argv=None, out=None):
    out = out or sys.stdout
    _limit_threads()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise UsageError("a subcommand is required")
        buf = io.StringIO()
        code = COMMANDS[args.command](args, buf)
        out.write(buf.getvalue())
        return code
    except UsageError as exc:
        sys.stderr.write(f"slx: usage error: {exc}\n")
        return 2
    except SLXError as exc:
        sys.stderr.write(f"slx: {type(exc).__name__}: {exc}\n")
        return 1


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
