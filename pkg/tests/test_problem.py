from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from slx.errors import InvalidProblem, ProblemFormatError
from slx.odecore import BoundaryEvaluator
from slx.problem import LCNO, REGULAR, builtin, classify_endpoint, load_problem, validate_problem

PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


@pytest.mark.parametrize("name", ["free", "legendre", "bessel"])
def test_builtins_validate(name):
    rep = validate_problem(builtin(name), raise_on_fail=False)
    assert rep.passed, [c.name for c in rep.failed()]
    assert rep.deficiency == (2, 2)


def test_legendre_ends_are_limit_circle(legendre):
    assert classify_endpoint(legendre, "a") == LCNO
    assert classify_endpoint(legendre, "b") == LCNO


def test_bessel_mixed_ends(bessel):
    assert classify_endpoint(bessel, "a") == LCNO
    assert classify_endpoint(bessel, "b") == REGULAR


def test_bessel_nu_range():
    with pytest.raises(ValueError):
        builtin("bessel", nu=1.5)


def test_symbolic_file_matches_builtin(free_ev):
    p = load_problem(PROBLEMS / "free_symbolic.json")
    ev = BoundaryEvaluator(p)
    lams = np.array([-2.0, 0.25, 3.7, 11.0])
    a, b = ev(lams), free_ev(lams)
    for k in ("u10", "u11", "u20", "u21"):
        assert np.allclose(getattr(a, k), getattr(b, k), atol=1e-9)


def test_builtin_file(free):
    p = load_problem(PROBLEMS / "free.json")
    assert p.name == "free"
    assert p.b == pytest.approx(np.pi)


def test_json_string_source():
    p = load_problem(json.dumps({"coefficients": "legendre"}))
    assert p.a == -1.0 and p.b == 1.0


def test_missing_frames_rejected():
    with pytest.raises(ProblemFormatError):
        load_problem({"interval": [0, 1], "coefficients": {"p": "1"}})


def test_negative_weight_rejected():
    spec = {
        "interval": [0, 1],
        "coefficients": {"p": "1", "q": "0", "w": "-1"},
        "frames": {"a": {"u": "x", "v": "-1"}, "b": {"u": "x - 1", "v": "-1"}},
    }
    with pytest.raises(InvalidProblem):
        validate_problem(load_problem(spec))


def test_broken_bracket_rejected():
    # [u, v] = 2 instead of 1
    spec = {
        "interval": [0, 1],
        "coefficients": {"p": "1", "q": "0", "w": "1"},
        "frames": {"a": {"u": "x", "v": "-2"}, "b": {"u": "x - 1", "v": "-1"}},
    }
    rep = validate_problem(load_problem(spec), raise_on_fail=False)
    assert not rep.passed
