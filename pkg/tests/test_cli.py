from __future__ import annotations

import io
import json

import numpy as np

from slx.cli import parse_param, run
from slx.spectra import CoupledBC, Matrix, Relation


def _call(*argv):
    buf = io.StringIO()
    code = run(list(argv), out=buf)
    return code, buf.getvalue()


def test_spectrum_dirichlet():
    code, out = _call("spectrum", "--problem", "free", "--param", "matrix:0,0,0,0", "--range", "0:20")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["convention"]["bracket_sign"] == -1
    assert np.allclose([e["lambda"] for e in doc["eigenvalues"]], [1, 4, 9, 16], atol=1e-8)


def test_spectrum_csv():
    code, out = _call("spectrum", "--problem", "free", "--param", "coupled:0;1,0,0,1", "--range=-1:20", "--out", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "lambda,multiplicity,degenerate,residual,via"
    assert [int(l.split(",")[1]) for l in lines[1:]] == [1, 2, 2]


def test_deterministic():
    argv = ("spectrum", "--problem", "legendre", "--param", "matrix:1,0.5,0.5,-1", "--range", "0:30")
    assert _call(*argv)[1] == _call(*argv)[1]


def test_usage_errors():
    assert _call()[0] == 2
    assert _call("spectrum", "--problem", "free", "--param", "wat", "--range", "0:1")[0] == 2
    assert _call("spectrum", "--problem", "free", "--param", "L0", "--range", "3:1")[0] == 2
    assert _call("spectrum", "--problem", "nope.json", "--param", "L0", "--range", "0:1")[0] == 2


def test_parse_param():
    assert isinstance(parse_param("matrix:1,2j,-2j,0"), Matrix)
    assert isinstance(parse_param("coupled:0.5;1,0,0,1"), CoupledBC)
    rel = parse_param("relation:1,0,0,0;0,0,0,1")
    assert isinstance(rel, Relation) and rel.mul_dim == 1
    assert parse_param("L0").mul_dim == 2


def test_line_scan_csv():
    code, out = _call("line-scan", "--problem", "free", "--theta-tilde", "0,0,0,0", "--theta", "1,0,0,1",
                      "--lambda", "0.25:0.25001:2", "--out", "csv")
    assert code == 0
    head, first = out.splitlines()[:2]
    assert head == "lambda,t_root_1,t_root_2,case,double_t"
    t1, t2 = (float(x) for x in first.split(",")[1:3])
    assert np.allclose([t1, t2], [-0.5, 0.5], atol=1e-9)


def test_weights_json():
    code, out = _call("weights", "--problem", "free", "--range", "0.5:5")
    doc = json.loads(out)
    assert code == 0
    assert [w["rank"] for w in doc["weights"]] == [1, 1]
    assert np.allclose([w["trace"] for w in doc["weights"]], 4 / np.pi, atol=1e-6)


def test_mfunction_csv():
    code, out = _call("mfunction", "--problem", "free", "--lambda", "0.25", "--kind", "M0")
    assert code == 0
    row = [float(x) for x in out.splitlines()[1].split(",")]
    assert np.allclose(row[2:], [0, 0, 2, 0, 2, 0, 0, 0], atol=1e-9)


def test_oracle_check():
    code, out = _call("oracle-check", "--problem", "free", "--param", "matrix:-1,0,0,1", "--range=-2:10", "-N", "1000")
    assert code == 0
    assert out.count("pass") == 4 and "fail" not in out


def test_classify():
    code, out = _call("classify", "--problem", "legendre")
    doc = json.loads(out)
    assert code == 0
    assert set(doc["endpoints"].values()) == {"limit-circle-nonoscillatory"}
    assert doc["K_estimate"] >= 0


def test_suite_subset(tmp_path):
    rep = tmp_path / "r.json"
    code, out = _call("suite", "--quick", "--only", "8", "--report", str(rep))
    assert code == 0
    assert json.loads(rep.read_text())["passed"] is True
