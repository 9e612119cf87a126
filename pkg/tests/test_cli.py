from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import jsonschema
import pytest

from asianlie.cli import main

SCHEMA = json.loads((Path(__file__).parents[1] / "docs" / "report_schema.json").read_text())


def run(capsys, *argv) -> tuple[int, str]:
    code = main(list(argv))
    return code, capsys.readouterr().out


def run_json(capsys, *argv) -> tuple[int, dict]:
    code, out = run(capsys, *argv, "--json")
    rep = json.loads(out)
    jsonschema.validate(rep, SCHEMA)
    return code, rep


def test_determining_passes(capsys):
    code, out = run(capsys, "determining")
    assert code == 0
    assert "equivalent to reference system" in out and ": pass" in out


def test_determining_monomials(capsys):
    _, out = run(capsys, "determining", "--show-monomials")
    assert "# u_xx" in out


def test_determining_mutation_fails(capsys, tmp_path):
    src = resources.files("asianlie.data").joinpath("determining.txt").read_text()
    p = tmp_path / "bad.txt"
    p.write_text(src.replace("- f(x)*diff(eta(t, x, y, u), y)", "+ f(x)*diff(eta(t, x, y, u), y)"))
    code, rep = run_json(capsys, "determining", "--fixtures", str(p))
    assert code == 1
    assert rep["discrepancies"] and any("eta" in d for d in rep["discrepancies"])


@pytest.mark.parametrize("f, row, canonical", [
    ("3*x^2+5", 2, "x"), ("exp(x)", 1, "f(x)"), ("ln(ln(x)+4)+7", 6, "ln(ln(x))"),
])
def test_classify(capsys, f, row, canonical):
    code, rep = run_json(capsys, "classify", "--f", f)
    assert code == 0
    cls = [c for c in rep["checks"] if c["name"] == "classification"][0]
    assert cls["detail"]["row"] == row and cls["detail"]["canonical"] == canonical
    assert any("xi0_y = 0" in a for a in rep["assumptions"])


def test_classify_power_parameters(capsys):
    _, rep = run_json(capsys, "classify", "--f", "3*x^2+5")
    assert rep["checks"][0]["detail"] == {"family": "power", "parameters": "k1=3, n=2, k2=5"}


def test_parse_error_exit_code(capsys):
    code, rep = run_json(capsys, "classify", "--f", "3*(")
    assert code == 2 and rep["error"]


def test_verify_table2(capsys):
    code, rep = run_json(capsys, "verify-table2")
    assert code == 0
    assert rep["summary"]["fail"] == 0
    dims = [c for c in rep["checks"] if c["name"].startswith("row 4 dimension")][0]
    assert dims["status"] == "pass"


def test_verify_table2_discrepancy(capsys, tmp_path):
    p = tmp_path / "t2.txt"
    p.write_text("[row 2] f = x\nD_t\nx*D_x + 2*y*D_y\n")
    code, out = run(capsys, "verify-table2", "--fixtures", str(p))
    assert code == 1
    assert "nearest ansatz specialization" in out


def test_reports_are_deterministic(capsys):
    _, a = run(capsys, "verify-table2", "--row", "2", "--json")
    _, b = run(capsys, "verify-table2", "--row", "2", "--json")
    assert a == b


def test_reduce(capsys):
    code, out = run(capsys, "reduce", "--f", "x", "--generator", "D_y + lam*u*D_u")
    assert code == 0
    assert "u = exp(lam*y)*w(t, x)" in out and "w_t = lam*w*x + w_xx*x^2" in out
    code, out = run(capsys, "reduce", "--f", "ln(x)", "--generator", "D_t + c*D_y")
    assert code == 0 and "c*w_s + w_s*ln(x) + w_xx*x^2 = 0" in out


def test_reduce_degenerate(capsys):
    code, rep = run_json(capsys, "reduce", "--f", "x", "--generator", "u*D_u")
    assert code == 2
    assert "u itself scaled" in rep["error"]
    assert rep["output"][1].strip().startswith("dt/(0)")


def test_inconclusive_does_not_fail(capsys):
    code, rep = run_json(capsys, "classify", "--f", "5")
    assert code == 0 and rep["summary"]["inconclusive"] == 1
