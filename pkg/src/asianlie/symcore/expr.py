"""Symbols, jet variables and the exact normal form.

Expressions are plain sympy objects.  This module fixes the variable
conventions (``x`` is positive, parameters are real) and provides a
canonical normal form for the fragment used throughout the package:
rational functions of ``t, x, y``, jets, ``ln x``, parameters,
undetermined function symbols, and powers/exponentials whose exponents
are rational multiples of fixed terms.
"""

from __future__ import annotations

import math
import random
import threading
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import sympy as sp
from sympy.core.function import AppliedUndef

__all__ = [
    "t", "x", "y", "u",
    "INDEPENDENT", "JETS1", "JETS2",
    "jet", "jet_index", "jet_order", "is_jet",
    "param", "function", "function_names",
    "normalize", "is_zero", "equal", "ZeroCheck",
    "differentiate", "total_derivative", "substitute",
    "collect_monomials", "JetOrderError", "NonPolynomialError",
]

t = sp.Symbol("t", real=True)
x = sp.Symbol("x", positive=True)
y = sp.Symbol("y", real=True)
u = sp.Symbol("u", real=True)

INDEPENDENT = (t, x, y)
_AXES = "txy"
_AXIS_SYMBOL = {"t": t, "x": x, "y": y}


class JetOrderError(ValueError):
    """A total derivative produced a jet above the permitted order."""

    def __init__(self, jet_symbol: sp.Symbol, max_order: int):
        super().__init__(f"jet-order overflow: {jet_symbol} exceeds order {max_order}")
        self.jet = jet_symbol
        self.max_order = max_order


class NonPolynomialError(ValueError):
    def __init__(self, variable: sp.Symbol):
        super().__init__(f"expression is not polynomial in {variable}")
        self.variable = variable


# ---------------------------------------------------------------------------
# jets and parameters
# ---------------------------------------------------------------------------

_lock = threading.Lock()
_jets: dict[str, sp.Symbol] = {"": u}
_jet_of: dict[sp.Symbol, str] = {u: ""}
_params: dict[str, sp.Symbol] = {}


def jet(index: str) -> sp.Symbol:
    """The jet symbol for the derivative of ``u`` along ``index`` (e.g. ``"xx"``)."""
    if any(c not in _AXES for c in index):
        raise ValueError(f"bad jet index {index!r}")
    key = "".join(sorted(index, key=_AXES.index))
    with _lock:
        sym = _jets.get(key)
        if sym is None:
            sym = sp.Symbol(f"u_{key}", real=True)
            _jets[key] = sym
            _jet_of[sym] = key
    return sym


def jet_index(sym) -> str | None:
    """Multi-index of a jet symbol (``""`` for ``u`` itself), else None."""
    return _jet_of.get(sym)


def is_jet(sym) -> bool:
    return sym in _jet_of


def jet_order(sym) -> int:
    return len(_jet_of[sym])


JETS1 = tuple(jet(i) for i in ("t", "x", "y"))
JETS2 = tuple(jet(i) for i in ("tt", "tx", "ty", "xx", "xy", "yy"))


def param(name: str) -> sp.Symbol:
    """Interned real parameter symbol (``n``, ``k1``, ``C3``, ``eps1`` ...)."""
    with _lock:
        sym = _params.get(name)
        if sym is None:
            sym = sp.Symbol(name, real=True)
            _params[name] = sym
    return sym


def function(name: str, *args) -> sp.Expr:
    """Undetermined function symbol applied to its declared arguments."""
    return sp.Function(name)(*args)


def function_names(e: sp.Expr) -> set[str]:
    return {a.func.__name__ for a in e.atoms(AppliedUndef)}


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------

_EXP = sp.Symbol("__E", positive=True)


class _State:
    def __init__(self):
        self.atoms: dict[sp.Symbol, sp.Expr] = {}
        self.outside = False

    def hold(self, atom: sp.Expr) -> sp.Symbol:
        sym = sp.Symbol(f"__k:{sp.sstr(atom)}")
        self.atoms[sym] = atom
        return sym


def _exp_factor(term: sp.Expr, state: _State) -> sp.Expr:
    for fac in sp.Mul.make_args(term):
        if isinstance(fac, sp.log):
            return _rebuild(sp.Pow(fac.args[0], sp.expand(term / fac)), state)
    return _EXP ** term


def _rebuild(e: sp.Expr, state: _State) -> sp.Expr:
    if e.is_Atom:
        if e is sp.E:
            return _EXP
        return e
    if isinstance(e, sp.exp):
        arg = normalize(e.args[0])
        out = sp.Integer(1)
        for term in sp.Add.make_args(sp.expand(arg)):
            out *= _exp_factor(term, state)
        return out
    if isinstance(e, sp.log):
        arg = normalize(e.args[0])
        expanded = sp.expand_log(sp.log(arg), force=True)
        if not isinstance(expanded, sp.log):
            return _rebuild(expanded, state)
        if expanded.args[0] != x:
            state.outside = True
        return state.hold(expanded)
    if isinstance(e, (AppliedUndef, sp.Derivative)):
        return state.hold(e)
    if isinstance(e, sp.Function):
        state.outside = True
        return state.hold(e.func(*[normalize(a) for a in e.args]))
    if e.is_Pow:
        base = _rebuild(e.base, state)
        ex = sp.expand(_rebuild(e.exp, state))
        return sp.Pow(base, ex)
    if e.is_Add or e.is_Mul:
        return e.func(*[_rebuild(a, state) for a in e.args])
    state.outside = True
    return state.hold(e)


def _exponent_parts(ex: sp.Expr) -> list[tuple[sp.Rational, sp.Expr]]:
    return [term.as_coeff_Mul(rational=True) for term in sp.Add.make_args(sp.expand(ex))]


def _unify_powers(e: sp.Expr, state: _State) -> tuple[sp.Expr, dict]:
    """Replace fractional/symbolic powers by generator symbols so that the
    result is a rational function in algebraically independent symbols."""
    groups: dict[tuple, set] = defaultdict(set)
    for p in e.atoms(sp.Pow):
        if p.exp.is_Integer:
            continue
        for c, m in _exponent_parts(p.exp):
            groups[(p.base, m)].add(c)
    gens = {}
    back = {}
    for (b, m), coeffs in sorted(groups.items(), key=lambda kv: sp.sstr(kv[0])):
        den = math.lcm(*[int(c.q) for c in coeffs])
        if m == 1 and den == 1:
            continue
        if m == 1 and not (b.is_Symbol or b.is_Number):
            state.outside = True
        g = sp.Symbol(f"__g:{sp.sstr(b)}|{sp.sstr(m)}|{den}")
        gens[(b, m)] = (g, den)
        back[g] = sp.Pow(b, m / den)

    if not gens:
        return e, back

    def walk(a):
        if a.is_Symbol:
            hit = gens.get((a, sp.Integer(1)))
            return hit[0] ** hit[1] if hit else a
        if a.is_Pow:
            if a.exp.is_Integer:
                return sp.Pow(walk(a.base), a.exp)
            out = sp.Integer(1)
            for c, m in _exponent_parts(a.exp):
                hit = gens.get((a.base, m))
                if hit:
                    out *= hit[0] ** (c * hit[1])
                else:
                    out *= sp.Pow(walk(a.base), c * m)
            return out
        if a.args:
            return a.func(*[walk(b) for b in a.args])
        return a

    return walk(e), back


@lru_cache(maxsize=8192)
def _normal_form(e: sp.Expr) -> tuple[sp.Expr, dict, dict, bool]:
    state = _State()
    core = _rebuild(sp.sympify(e), state)
    core, back = _unify_powers(core, state)
    core = sp.cancel(core)
    state.atoms[_EXP] = sp.E
    return core, back, state.atoms, state.outside


def normalize(e) -> sp.Expr:
    """Canonical form of ``e``; equal inputs in the fragment map to identical trees."""
    core, back, atoms, _ = _normal_form(sp.sympify(e))
    if back:
        core = core.xreplace(back)
    return core.xreplace(atoms)


@dataclass(frozen=True)
class ZeroCheck:
    """Verdict of :func:`is_zero` with the path that decided it."""

    value: bool
    path: str
    points: int = 0

    def __bool__(self) -> bool:
        return self.value


def _random_function(args, rng: random.Random):
    terms = sp.Integer(rng.randint(1, 9))
    for a in args:
        terms += sp.Rational(rng.randint(-9, 9), rng.randint(1, 5)) * a
        terms += sp.Rational(rng.randint(-9, 9), rng.randint(1, 5)) * a**2
    for a, b in zip(args, args[1:]):
        terms += sp.Rational(rng.randint(-5, 5), 3) * a * b
    return terms


def _random_eval_zero(e: sp.Expr, points: int, seed: int) -> bool:
    rng = random.Random(seed)
    for _ in range(points):
        expr = e
        for fn in sorted({a.func for a in expr.atoms(AppliedUndef)}, key=lambda f: f.__name__):
            dummies = sp.symbols(f"_a0:{len(next(iter(expr.atoms(fn))).args)}")
            expr = expr.replace(fn, sp.Lambda(dummies, _random_function(dummies, rng)))
        expr = expr.doit()
        vals = {}
        for s in sorted(expr.free_symbols, key=lambda s: s.name):
            if s.is_positive:
                vals[s] = sp.Rational(rng.randint(11, 40), 10)
            else:
                vals[s] = sp.Rational(rng.randint(-30, 30), 10) + sp.Rational(1, 7)
        v = sp.N(expr.xreplace(vals), 50)
        if v.has(sp.nan, sp.zoo) or not v.is_number:
            return False
        if abs(complex(v)) > 1e-30:
            return False
    return True


def is_zero(e, *, points: int = 8, seed: int = 0) -> ZeroCheck:
    """Decide ``e == 0`` (on ``x > 0``).

    Inside the canonical fragment the normal form decides.  Outside it a
    nonzero normal form is re-checked by exact-input, 50-digit evaluation
    at ``points`` random rational points with undetermined functions
    replaced by random polynomials; that path is only probabilistically
    sound and is reported as ``"random-eval"``.
    """
    core, _, _, outside = _normal_form(sp.sympify(e))
    if core == 0:
        return ZeroCheck(True, "normal-form")
    if not outside:
        return ZeroCheck(False, "normal-form")
    ok = _random_eval_zero(normalize(e), max(points, 8), seed)
    return ZeroCheck(ok, "random-eval", max(points, 8))


def equal(a, b, **kw) -> ZeroCheck:
    return is_zero(sp.sympify(a) - sp.sympify(b), **kw)


# ---------------------------------------------------------------------------
# calculus
# ---------------------------------------------------------------------------

def differentiate(e, v: sp.Symbol) -> sp.Expr:
    """Partial derivative; other variables, jets and parameters held fixed."""
    return sp.diff(sp.sympify(e), v)


def total_derivative(e, v: sp.Symbol, max_order: int = 2) -> sp.Expr:
    """Total derivative ``D_v`` on the jet space of ``u(t, x, y)``."""
    axis = {t: "t", x: "x", y: "y"}.get(v)
    if axis is None:
        raise ValueError(f"total derivative needs one of t, x, y; got {v}")
    e = sp.sympify(e)
    out = sp.diff(e, v)
    for s in sorted(e.free_symbols, key=lambda s: s.name):
        idx = jet_index(s)
        if idx is None:
            continue
        coeff = sp.diff(e, s) if s is not u else _diff_u(e)
        if coeff == 0:
            continue
        nxt = jet(idx + axis)
        if len(idx) + 1 > max_order:
            raise JetOrderError(nxt, max_order)
        out += nxt * coeff
    return out


def _diff_u(e: sp.Expr) -> sp.Expr:
    return sp.diff(e, u)


def substitute(e, bindings: dict) -> sp.Expr:
    """Simultaneous substitution followed by normalization.

    Keys may be symbols (variables, jets, parameters) or function names /
    function classes; a function key is replaced by the bound expression
    written in that function's declared argument variables.
    """
    e = sp.sympify(e)
    sym_map = {}
    for key, val in bindings.items():
        val = sp.sympify(val)
        if isinstance(key, str):
            key = sp.Function(key)
        if isinstance(key, sp.FunctionClass):
            apps = [a for a in e.atoms(AppliedUndef) if a.func == key]
            if not apps:
                continue
            args = apps[0].args
            e = e.replace(key, sp.Lambda(args, val) if not isinstance(val, sp.Lambda) else val).doit()
        else:
            sym_map[key] = val
    if sym_map:
        e = e.subs(sym_map, simultaneous=True)
    return normalize(e)


def collect_monomials(e, basis) -> dict[sp.Expr, sp.Expr]:
    """Coefficients of ``e`` with respect to monomials in the ``basis`` symbols.

    Monomials are returned in a deterministic order; summing
    ``monomial * coefficient`` reproduces ``e``.
    """
    basis = list(basis)
    e = normalize(e)
    if e == 0:
        return {}
    num, den = sp.fraction(sp.together(e))
    for b in basis:
        if den.has(b):
            raise NonPolynomialError(b)
    num = sp.expand(num)
    for b in basis:
        if not num.is_polynomial(b):
            raise NonPolynomialError(b)
    poly = sp.Poly(num, *basis)
    out = {}
    for powers, coeff in sorted(poly.terms(), key=lambda kv: kv[0]):
        mono = sp.Mul(*[b**p for b, p in zip(basis, powers)])
        c = normalize(coeff / den)
        if c != 0:
            out[mono] = c
    return out


def sample_value(e, values: dict, log_values: dict | None = None) -> sp.Expr:
    """Exact value of ``e`` at a point, with ``ln x`` optionally treated as an
    independent coordinate (``log_values = {x: L}``)."""
    e = sp.sympify(e)
    if log_values:
        e = e.xreplace({sp.log(k): v for k, v in log_values.items()})
    return sp.sympify(e).xreplace(values)


def rational(value) -> sp.Rational:
    f = Fraction(value)
    return sp.Rational(f.numerator, f.denominator)
