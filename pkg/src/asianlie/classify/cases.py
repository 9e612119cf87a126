"""General symmetry coefficients for the canonical elements and the
``xi1`` form obtained when ``xi0`` depends on ``t`` only."""

from __future__ import annotations

import re
from dataclasses import dataclass

import sympy as sp

from ..symcore import function, jet, normalize, param, parse, t, u, x, y
from ..symmetry import VectorField, determining_system, f_generic


def xi1_form(xi0=None, P=None) -> sp.Expr:
    """``(xi0_t (ln x - 1)/2 + P(t, y)) x``."""
    xi0 = function("xi0", t) if xi0 is None else sp.sympify(xi0)
    P = function("P", t, y) if P is None else sp.sympify(P)
    if normalize(sp.diff(xi0, y)) != 0 or xi0.has(x):
        raise ValueError("xi0 must depend on t only")
    return normalize((sp.diff(xi0, t) * (sp.log(x) - 1) / 2 + P) * x)


def xi1_equation_residual(xi0=None, P=None) -> sp.Expr:
    """Residual of the ``u_xx`` determining equation for ``xi1_form``.

    The equation is located in the generated system by its monomial, so no
    hand-typed copy is involved."""
    xi0 = function("xi0", t) if xi0 is None else sp.sympify(xi0)
    xi1 = xi1_form(xi0, P)
    X = VectorField(xi0=xi0, xi1=xi1)
    ds = determining_system(X, f_generic)
    for mono, eq in zip(ds.monomials, ds.equations):
        if mono == jet("xx"):
            return normalize(eq)
    return sp.Integer(0)


# components (xi0, xi1, xi2, eta / u) with the superposition part dropped
_ANSATZ = {
    1: ("C1", "0", "C2", "C3"),
    2: ("C1", "(C2*y + C3)*x", "1/2*C2*y^2 + C3*y + C4", "1/2*C2*x + C5"),
    3: ("C1*t + C2", "1/2*C1*x*ln(x)", "(n + 2)/2*C1*y + C3", "1/4*C1*(ln(x) - t) + C4"),
    4: ("C1*t^2 + C2*t + C3",
        "(C1*t + 1/2*C2)*x*ln(x) + (C4*t^2 + C5*t - 3*C1*y + C6)*x",
        "3*C1*t*y + 3/2*C2*y - 1/3*C4*t^3 - 1/2*C5*t^2 - C6*t + C7",
        "-C1*ln(x)^2 + 1/2*((C1 - 2*C4)*t - C5 + 1/2*C2)*ln(x) + 1/4*(2*C4 - C1)*t^2"
        " + 1/4*(2*C5 - 8*C1 - C2)*t - (3/2*C1 + C4)*y + C8"),
    5: ("C1*t^2 + C2*t + C3", "(C1*t + 1/2*C2)*x*ln(x)", "C4",
        "-1/4*C1*ln(x)^2 + (2*C1*t + C2)/4*ln(x) - 1/4*C1*t^2 - (2*C1 + C2)/4*t + C5"),
    6: ("C1*t + C2", "1/2*C1*x*ln(x)", "C1*(y - 1/2*t) + C3", "1/4*C1*(ln(x) - t) + C4"),
}

CANONICAL_F = {
    1: "f(x)",
    2: "x",
    3: "ln(x)^n",
    4: "ln(x)",
    5: "ln(x)^(-2)",
    6: "ln(ln(x))",
}


@dataclass(frozen=True)
class Ansatz:
    row: int
    f: sp.Expr
    field: VectorField
    constants: tuple[sp.Symbol, ...]

    def specialize(self, values: dict) -> VectorField:
        """Substitute constants (missing ones set to zero)."""
        sub = {c: sp.sympify(values.get(c, values.get(c.name, 0))) for c in self.constants}
        return VectorField(*[normalize(a.xreplace(sub)) for a in self.field.coefficients])

    def basis(self) -> list[VectorField]:
        """The field with one constant set to 1 and the rest to 0."""
        return [self.specialize({c: 1}) for c in self.constants]


def case_ansatz(row: int) -> Ansatz:
    """General finite symmetry of the canonical equation in catalogue row ``row``.

    Row 1 (arbitrary f) yields the kernel ``C1 D_t + C2 D_y + C3 u D_u``.
    """
    if row not in _ANSATZ:
        raise ValueError(f"no ansatz for row {row}; rows are 1..6")
    comps = [parse(s) for s in _ANSATZ[row]]
    field = VectorField(comps[0], comps[1], comps[2], comps[3] * u)
    names = sorted({s.name for c in comps for s in c.free_symbols if re.fullmatch(r"C\d+", s.name)},
                   key=lambda s: int(s[1:]))
    consts = tuple(param(n) for n in names)
    return Ansatz(row, parse(CANONICAL_F[row]), field, consts)
