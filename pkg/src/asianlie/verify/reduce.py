"""Symmetry reduction by invariant ansatz.

Supported generators: in suitable charts (``v`` or ``ln v`` per variable)
the base part is a translation with constant speeds, i.e. each coefficient
is a constant or a constant multiple of its own variable, and
``eta = lam*u`` with constant ``lam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from ..symcore import Composite, normalize, serialize, t, u, x, y
from ..symmetry import VectorField, _check_f

_NEW_NAMES = ("s", "r")


class ReductionNotAutomated(ValueError):
    def __init__(self, message: str, characteristic_system: str):
        super().__init__(f"{message}\n{characteristic_system}")
        self.characteristic_system = characteristic_system


def characteristic_system(X: VectorField) -> str:
    c = [serialize(v) for v in X.coefficients]
    return f"dt/({c[0]}) = dx/({c[1]}) = dy/({c[2]}) = du/({c[3]})"


def _chart(coef: sp.Expr, v: sp.Symbol):
    """``(chart expression, speed)`` or None."""
    coef = normalize(coef)
    if coef == 0:
        return v, sp.Integer(0)
    if not coef.free_symbols & {t, x, y, u}:
        return v, coef
    k = normalize(coef / v)
    if not k.free_symbols & {t, x, y, u}:
        return sp.log(v), k
    return None


@dataclass
class Reduction:
    generator: VectorField
    f: sp.Expr
    invariants: dict[str, sp.Expr]
    prefactor: sp.Expr
    equation: sp.Expr
    jets: dict[str, sp.Symbol]
    back_substitution: sp.Expr
    notes: list[str] = field(default_factory=list)

    @property
    def ansatz(self) -> str:
        args = ", ".join(self.invariants)
        body = f"w({args})"
        where = "; ".join(f"{k} = {serialize(v)}" for k, v in self.invariants.items() if str(v) != k)
        pre = "" if self.prefactor == 1 else f"{serialize(self.prefactor)}*"
        return f"u = {pre}{body}" + (f" with {where}" if where else "")

    @property
    def exact(self) -> bool:
        return self.back_substitution == 0

    def text(self) -> str:
        """Reduced equation, in evolution form when it has one."""
        wt = self.jets.get("t")
        eq = sp.expand(self.equation)
        if wt is not None and eq.coeff(wt) == -1 and not (eq + wt).has(wt):
            return f"w_t = {serialize(normalize(eq + wt))}"
        return f"{serialize(normalize(eq))} = 0"


def reduce(X: VectorField, f) -> Reduction:
    """Reduced equation and ansatz for the generator ``X``."""
    f = _check_f(f)
    if all(c == 0 for c in X.coefficients[:3]):
        raise ReductionNotAutomated("no invariant ansatz: the generator only acts on u (u itself scaled)",
                                    characteristic_system(X))
    eta = sp.expand(X.eta)
    lam = normalize(sp.diff(eta, u))
    if normalize(eta - lam * u) != 0 or lam.free_symbols & {t, x, y, u}:
        raise ReductionNotAutomated("reduction not automated: eta is not a constant multiple of u",
                                    characteristic_system(X))
    charts = [_chart(c, v) for c, v in zip(X.coefficients[:3], (t, x, y))]
    if any(c is None for c in charts):
        raise ReductionNotAutomated("reduction not automated: unsupported field shape",
                                    characteristic_system(X))
    olds = (t, x, y)
    pivot = next(i for i, (_, sp_) in enumerate(charts) if sp_ != 0)
    pchart, pspeed = charts[pivot]
    invariants: dict[str, sp.Expr] = {}
    names = iter(_NEW_NAMES)
    for i, v in enumerate(olds):
        if i == pivot:
            continue
        ch, spd = charts[i]
        if spd == 0:
            invariants[v.name] = v
        else:
            inv = normalize(ch - spd / pspeed * pchart)
            invariants[next(names)] = inv
    prefactor = normalize(sp.exp(lam / pspeed * pchart))

    # reduced equation via the chain rule
    C = Composite(dict(invariants))
    uu = prefactor * C.value
    R = C.d(uu, t) - x**2 * C.d(C.d(uu, x), x) - f * C.d(uu, y)
    red = normalize(sp.expand(-R / prefactor))
    # express the old variables through the invariants and the pivot
    new_syms = {k: sp.Symbol(k, real=True) if k not in ("t", "x", "y") else {"t": t, "x": x, "y": y}[k]
                for k in invariants}
    pv = sp.Dummy("p", positive=True) if pchart != olds[pivot] else sp.Dummy("p", real=True)
    sols = sp.solve([sp.Eq(new_syms[k], e) for k, e in invariants.items() if new_syms[k] != e]
                    + [sp.Eq(pv, olds[pivot])],
                    [v for v in olds if v not in new_syms.values()], dict=True)
    notes = []
    if sols:
        red2 = normalize(red.xreplace({v: e for v, e in sols[0].items()}))
        if red2.has(pv):
            raise ReductionNotAutomated("reduction not automated: reduced equation depends on the group parameter",
                                        characteristic_system(X))
        red = red2
    else:
        notes.append("invariants not solved for the old variables")
    jets = {idx: sym for sym, idx in C._index.items()}

    back = _back_substitute(f, invariants, prefactor, red, new_syms, C)
    return Reduction(X, f, invariants, prefactor, red, jets, back, notes)


def _slot_index(args, var) -> int:
    hits = [i for i, a in enumerate(args) if a == var]
    if len(hits) != 1:
        raise ValueError("ambiguous derivative slot")
    return hits[0]


def _jet_of(atom, keys, C: Composite):
    """Jet symbol for ``W(...)``, ``Derivative(W(...), ...)`` or a ``Subs`` of one."""
    if isinstance(atom, sp.Subs):
        inner = atom.expr
    else:
        inner = atom
    if isinstance(inner, sp.Derivative):
        base, counts = inner.expr, inner.variable_count
    else:
        base, counts = inner, ()
    idx = ""
    for v, k in counts:
        idx += keys[_slot_index(base.args, v)] * k
    return C.jet(idx)


def _back_substitute(f, invariants, prefactor, reduced, new_syms, C: Composite) -> sp.Expr:
    """Residual of the original equation for ``u = prefactor*W(invariants)``
    with an undetermined ``W`` (plain sympy differentiation, independent of
    the chain-rule helper), plus ``prefactor`` times the reduced equation."""
    keys = list(invariants)
    W = sp.Function("__W")
    uu = prefactor * W(*[invariants[k] for k in keys])
    R = sp.diff(uu, t) - x**2 * sp.diff(uu, x, 2) - f * sp.diff(uu, y)
    atoms = sorted(R.atoms(sp.Subs), key=sp.default_sort_key)
    rep = {a: _jet_of(a, keys, C) for a in atoms}
    R = R.xreplace(rep)
    rep = {a: _jet_of(a, keys, C) for a in R.atoms(sp.Derivative) if a.expr.func == W}
    R = R.xreplace(rep)
    rep = {a: _jet_of(a, keys, C) for a in R.atoms(sp.core.function.AppliedUndef) if a.func == W}
    R = R.xreplace(rep)
    red_old = sp.sympify(reduced).xreplace({new_syms[k]: invariants[k] for k in keys})
    return normalize(R + prefactor * red_old)
