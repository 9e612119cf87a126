from __future__ import annotations

import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from asianlie.classify import table2_catalog
from asianlie.liealg import AlgebraSpan, closure_report, commutator, decompose, linearly_independent
from asianlie.symcore import t, u, x, y
from asianlie.symmetry import VectorField, lie_residual

D_t, D_y, U = VectorField(xi0=1), VectorField(xi2=1), VectorField(eta=u)
SCALE = VectorField(xi1=x, xi2=y)
PROJ = VectorField(xi1=x * y, xi2=y**2 / 2, eta=x * u / 2)
ROW2 = [D_t, D_y, U, SCALE, PROJ]
POOL = ROW2 + [VectorField(xi0=t, xi1=x * sp.log(x) / 2, eta=(sp.log(x) - t) * u / 4)]


def test_known_brackets():
    assert commutator(D_y, SCALE) == D_y
    assert commutator(D_y, PROJ) == SCALE + 0 * U
    assert commutator(SCALE, PROJ) == PROJ
    assert commutator(D_t, D_y).is_zero()


@given(st.sampled_from(POOL), st.sampled_from(POOL))
def test_antisymmetry(X, Y):
    assert (commutator(X, Y) + commutator(Y, X)).is_zero()


@given(st.sampled_from(POOL), st.sampled_from(POOL), st.sampled_from(POOL))
def test_jacobi(X, Y, Z):
    J = (commutator(commutator(X, Y), Z) + commutator(commutator(Y, Z), X)
         + commutator(commutator(Z, X), Y))
    assert J.is_zero()


@given(st.lists(st.integers(-4, 4), min_size=5, max_size=5))
def test_decompose_recovers_coefficients(cs):
    Z = sum((c * B for c, B in zip(cs, ROW2)), VectorField())
    dec = decompose(Z, ROW2)
    assert dec.exact
    assert [int(c) for c in dec.coefficients] == cs


def test_decompose_rejects_outside_span():
    dec = decompose(VectorField(xi1=x), ROW2)
    assert not dec.in_span


def test_superposition_remainder_accepted_only_if_symmetric():
    Z = D_y + VectorField(eta=x)
    dec = decompose(Z, ROW2)
    assert dec.in_span and not dec.exact
    assert lie_residual(dec.remainder, x) == 0


def test_independence():
    assert linearly_independent(ROW2)
    assert not linearly_independent(ROW2 + [SCALE + D_t])


def test_row_tables_close():
    for case in table2_catalog():
        st_ = closure_report(case.span(), case.f)
        assert st_.passed, (case.row, st_.failures, st_.jacobi_failures)


def test_structure_table_serializes():
    table = closure_report(AlgebraSpan(tuple(ROW2), "row 2"), x)
    d = table.to_dict()
    assert d["dimension"] == 5
    assert d["jacobi_triples_checked"] == 10
    # [D_y, x D_x + y D_y] = D_y
    assert d["brackets"][1][3] == ["0", "1", "0", "0", "0"]


def test_unclosed_set_reported():
    table = closure_report(AlgebraSpan((D_y, PROJ)), x)
    assert not table.closed
