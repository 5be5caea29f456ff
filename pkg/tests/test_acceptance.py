"""The twelve acceptance criteria at full size; one PASS/FAIL line each."""

from __future__ import annotations

import pytest

from slx import suite


@pytest.mark.parametrize("number", [n for n, _ in suite.CHECKS])
def test_criterion(number, capsys):
    res = suite.run_check(number, seed=0)
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.detail


if __name__ == "__main__":
    ok = True
    for n, _ in suite.CHECKS:
        r = suite.run_check(n, seed=0)
        print(r.line(), flush=True)
        ok &= r.passed
    raise SystemExit(0 if ok else 1)
