from __future__ import annotations

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from asianlie.classify import (
    CANONICAL_F,
    ClassifyingODE,
    DegenerateODE,
    EquivalenceTransform,
    InvalidTransform,
    ReducibleFamily,
    all_branches,
    apply_equivalence,
    canonicalize,
    case_ansatz,
    integrate_numerically,
    load_table2,
    recognize,
    row_for_family,
    search_equivalence,
    solve_classifying_ode,
    symbolic_family,
    table2_catalog,
    verify_change_of_variables,
    verify_solution_transport,
    xi1_equation_residual,
    xi1_form,
)
from asianlie.classify.catalog import check_row
from asianlie.symcore import normalize, param, parse, t, u, x, y
from asianlie.symmetry import lie_residual

nonzero = st.integers(-5, 5).filter(bool)


# --- classifying ODE -------------------------------------------------------

def test_all_branches_back_substitute():
    for ode, fam in all_branches():
        assert ode.residual(fam.source) == 0
        assert ode.residual(fam.expr()) == 0


def test_branch_tags():
    assert [fam.tag for _, fam in all_branches()] == ["power", "log-power", "log", "log-log"]


def test_degenerate_ode():
    with pytest.raises(DegenerateODE):
        ClassifyingODE(1, 0, 0, 2)
    assert solve_classifying_ode(ClassifyingODE(0, 0, 1, 0)) == []


@given(nonzero, nonzero, nonzero, st.integers(-5, 5))
def test_power_branch_numeric(a1, a3, C, a4):
    ode = ClassifyingODE(a1, 0, a3, a4)
    (fam,) = solve_classifying_ode(ode, C=C)
    assert ode.residual(fam.expr()) == 0


def test_branch_matches_numerical_integration():
    ode = ClassifyingODE(sp.Rational(3, 2), 2, 1, 5)
    (fam,) = solve_classifying_ode(ode, C=sp.Rational(7, 10))
    fx = sp.lambdify(x, fam.expr(), "numpy")
    xs = np.linspace(1.0, 2.0, 21)
    num = integrate_numerically(ode, float(fx(1.0)), xs)
    rel = np.max(np.abs(num - fx(xs)) / np.abs(fx(xs)))
    assert rel <= 1e-8


# --- recognition ----------------------------------------------------------

@pytest.mark.parametrize("text, tag, params", [
    ("3*x^2+5", "power", {"k1": 3, "n": 2, "k2": 5}),
    ("ln(ln(x)+4)+7", "log-log", {"k1": 1, "k2": 4, "k3": 7}),
    ("ln(x)", "log", {"k1": 1, "k2": 0, "n": 1, "k3": 0}),
    ("ln(x)^(-2)", "log-power", {"k1": 1, "k2": 0, "n": -2, "k3": 0}),
    ("exp(x)", "generic", {}),
    ("5", "constant", {}),
])
def test_recognize(text, tag, params):
    fam = recognize(text)
    assert fam.tag == tag
    assert {k: v for k, v in fam.params().items()} == params


@given(nonzero, st.integers(-3, 3).filter(lambda n: n not in (0,)), st.integers(-5, 5))
def test_recognize_power_round_trip(k1, n, k2):
    fam = recognize(k1 * x**n + k2)
    assert fam.tag == "power"
    assert normalize(fam.expr() - (k1 * x**n + k2)) == 0


@given(nonzero, st.integers(0, 4), st.sampled_from([2, 3, -1, sp.Rational(1, 2)]), st.integers(-4, 4))
def test_recognize_log_power_round_trip(k1, k2, n, k3):
    f = k1 * (sp.log(x) + k2) ** n + k3
    fam = recognize(f)
    assert fam.tag == "log-power"
    assert normalize(fam.expr() - f) == 0


# --- equivalence group ----------------------------------------------------

def _transform(e1, e2, e3, e4, e5, e6):
    return EquivalenceTransform(e1, e2, sp.Rational(e3), e4, e5, e6, 1)


transforms = st.builds(_transform, nonzero, st.integers(-3, 3), st.integers(1, 4),
                       st.integers(-3, 3), nonzero, st.integers(-3, 3))


def test_invalid_transform():
    with pytest.raises(InvalidTransform):
        EquivalenceTransform(eps1=0)


def test_change_of_variables_symbolic():
    es = [param(f"e{i}") for i in range(1, 8)]
    rep = verify_change_of_variables(EquivalenceTransform(*es))
    assert rep.passed


@given(transforms)
def test_inverse_composes_to_identity(T):
    assert T.then(T.inverse()).normalized().is_identity()


@given(transforms, transforms)
def test_f_law_is_a_group_action(A, B):
    f = x**2 + 3
    lhs = apply_equivalence(A.then(B), f)
    rhs = apply_equivalence(B, apply_equivalence(A, f))
    assert normalize(lhs - rhs) == 0


def test_solution_transport():
    # u = x^2 e^{2t} solves every equation of the class
    T = EquivalenceTransform(2, 0, 3, 1, 2, 0, 1)
    assert verify_solution_transport(T, x, x**2 * sp.exp(2 * t)) == 0


@pytest.mark.parametrize("tag", ["power", "log-power", "log-log"])
def test_canonical_maps_symbolic(tag):
    c = canonicalize(symbolic_family(tag))
    assert c.passed
    assert c.law_residual == 0


def test_canonicalize_example():
    c = canonicalize("3*x^2+5")
    assert c.canonical == x
    assert (c.transform.eps1, c.transform.eps4, c.transform.eps5) == (2, sp.Rational(20, 3), sp.Rational(4, 3))
    assert row_for_family(c.family) == 2


def test_constant_is_reducible():
    with pytest.raises(ReducibleFamily, match="reducible to two independent variables"):
        canonicalize("5")


def test_canonical_forms_are_not_equivalent():
    assert search_equivalence(3 * x**2 + 5, x, starts=10).equivalent(1e-6)
    for a, b in [(x, sp.log(x)), (sp.log(x), sp.log(sp.log(x))), (x, sp.log(x) ** 3)]:
        assert search_equivalence(a, b, starts=10).best_residual > 1e-3


# --- cases and catalogue -------------------------------------------------

def test_xi1_form():
    assert xi1_equation_residual() == 0
    with pytest.raises(ValueError):
        xi1_form(xi0=t * y)


@pytest.mark.parametrize("row", range(1, 7))
def test_case_ansatz_residual(row):
    a = case_ansatz(row)
    assert lie_residual(a.field, a.f) == 0


def test_catalog_rows():
    cases = table2_catalog()
    assert [c.row for c in cases] == [1, 2, 3, 4, 5, 6]
    assert [c.dimension for c in cases] == [3, 5, 4, 8, 5, 4]
    assert all(c.passed and not c.discrepancies for c in cases)
    assert all(ch.ansatz_constants is not None for c in cases for ch in c.checks)


def test_mutated_generator_gives_discrepancy_report(tmp_path):
    p = tmp_path / "t2.txt"
    p.write_text("[row 2] f = x\nD_t\nx*D_x + 2*y*D_y\n")
    (case,) = [check_row(r) for r in load_table2(p)]
    assert not case.passed
    (d,) = case.discrepancies
    text = d.to_text()
    assert "nearest ansatz specialization" in text
    assert d.nearest == case_ansatz(2).specialize({"C3": 1})
    assert d.nearest_residual == 0


def test_canonical_f_matches_fixture():
    for row in load_table2():
        assert row.f == parse(CANONICAL_F[row.row])
