"""Brackets, span decomposition and structure tables of symmetry algebras."""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field

import sympy as sp

from .symcore import is_zero, normalize, serialize, t, u, x, y
from .symmetry import VectorField, lie_residual


def commutator(X: VectorField, Y: VectorField) -> VectorField:
    """``[X, Y]`` acting on functions of (t, x, y, u)."""
    return VectorField(*[normalize(X(b) - Y(a)) for a, b in zip(X.coefficients, Y.coefficients)])


@dataclass(frozen=True)
class AlgebraSpan:
    basis: tuple[VectorField, ...]
    name: str = ""

    def __len__(self) -> int:
        return len(self.basis)


def _sample_points(count: int, seed: int):
    rng = random.Random(seed)
    pts = []
    for _ in range(count):
        pts.append({
            t: sp.Rational(rng.randint(-40, 40), rng.randint(1, 9)),
            x: sp.Rational(rng.randint(5, 60), rng.randint(1, 9)),
            y: sp.Rational(rng.randint(-40, 40), rng.randint(1, 9)),
            u: sp.Rational(rng.randint(1, 40), rng.randint(1, 9)),
            "L": sp.Rational(rng.randint(-40, 40), rng.randint(1, 9)),
        })
    return pts


def _at(e: sp.Expr, pt: dict) -> sp.Expr:
    """Exact value with ln x taken as an independent coordinate ``L``."""
    e = sp.sympify(e).xreplace({sp.log(x): pt["L"]})
    return e.xreplace({k: v for k, v in pt.items() if k != "L"})


def _rows(field_: VectorField, pt) -> list[sp.Expr]:
    """Sampled components used for fitting: the three base coefficients and
    the u-linear part of eta."""
    return [_at(c, pt) for c in field_.coefficients[:3]] + [_at(sp.diff(field_.eta, u), pt)]


def linearly_independent(fields, seed: int = 0) -> bool:
    fields = list(fields)
    if not fields:
        return True
    pts = _sample_points(len(fields) + 4, seed)
    cols = [[v for pt in pts for v in _rows(F, pt)] for F in fields]
    M = sp.Matrix(cols).T
    return M.rank(simplify=True) == len(fields)


@dataclass
class Decomposition:
    coefficients: list[sp.Expr] | None
    remainder: VectorField
    in_span: bool

    @property
    def exact(self) -> bool:
        return self.in_span and self.remainder.is_zero()


def decompose(Z: VectorField, span: AlgebraSpan | list, seed: int = 0) -> Decomposition:
    """Constants ``c`` with ``Z - sum c_i B_i`` equal to ``beta(t, x, y)*D_u``.

    The constants are fitted on sampled rational points and then confirmed
    exactly; ``in_span`` is False when no confirmed fit exists.
    """
    basis = list(span.basis if isinstance(span, AlgebraSpan) else span)
    k = len(basis)
    cs = sp.symbols(f"__c0:{k}")
    eqs = []
    for pt in _sample_points(k + 6, seed):
        zr = _rows(Z, pt)
        brs = [_rows(B, pt) for B in basis]
        for j in range(4):
            eqs.append(zr[j] - sum(c * br[j] for c, br in zip(cs, brs)))
    sol = sp.linsolve(eqs, cs) if k else sp.FiniteSet(())
    if not sol:
        return Decomposition(None, Z, False)
    vals = list(next(iter(sol)))
    vals = [normalize(v.xreplace({c: 0 for c in cs})) for v in vals]
    rem = Z
    for c, B in zip(vals, basis):
        rem = rem - B * c
    rem = rem.normalized()
    ok = all(c == 0 for c in rem.coefficients[:3]) and is_zero(sp.diff(rem.eta, u))
    return Decomposition(vals if ok else None, rem, bool(ok))


@dataclass
class StructureTable:
    names: list[str]
    entries: dict[tuple[int, int], list[sp.Expr]] = field(default_factory=dict)
    remainders: dict[tuple[int, int], sp.Expr] = field(default_factory=dict)
    failures: list[tuple[int, int]] = field(default_factory=list)
    jacobi_failures: list[tuple[int, int, int]] = field(default_factory=list)
    jacobi_checked: int = 0

    @property
    def dimension(self) -> int:
        return len(self.names)

    @property
    def closed(self) -> bool:
        return not self.failures

    @property
    def passed(self) -> bool:
        return self.closed and not self.jacobi_failures

    def entry(self, i: int, j: int) -> list[sp.Expr]:
        if i == j:
            return [sp.Integer(0)] * self.dimension
        if (i, j) in self.entries:
            return self.entries[(i, j)]
        return [-c for c in self.entries[(j, i)]]

    def is_abelian(self) -> bool:
        return all(all(c == 0 for c in v) for v in self.entries.values()) and not self.remainders

    def to_dict(self) -> dict:
        n = self.dimension
        return {
            "basis": self.names,
            "dimension": n,
            "closed": self.closed,
            "jacobi_triples_checked": self.jacobi_checked,
            "jacobi_failures": [list(tr) for tr in self.jacobi_failures],
            "brackets": [[[serialize(c) for c in self.entry(i, j)] if (i == j or (min(i, j), max(i, j)) not in self.failures) else None
                          for j in range(n)] for i in range(n)],
            "ideal_remainders": {f"{i},{j}": serialize(r) for (i, j), r in sorted(self.remainders.items())},
            "failures": [f"{i},{j}" for i, j in self.failures],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def closure_report(span: AlgebraSpan, f=None, *, jacobi: bool = True, seed: int = 0) -> StructureTable:
    """Pairwise brackets decomposed over the span.

    A nonzero remainder ``beta*D_u`` is accepted only if it is a symmetry of
    the equation with element ``f`` (superposition ideal); with ``f=None``
    any nonzero remainder is a failure.
    """
    names = [B.to_text() for B in span.basis]
    table = StructureTable(names)
    basis = span.basis
    for i, j in itertools.combinations(range(len(basis)), 2):
        Z = commutator(basis[i], basis[j])
        dec = decompose(Z, span, seed)
        if not dec.in_span:
            table.failures.append((i, j))
            continue
        table.entries[(i, j)] = dec.coefficients
        beta = dec.remainder.eta
        if beta != 0:
            if f is not None and is_zero(lie_residual(VectorField(eta=beta), f)):
                table.remainders[(i, j)] = beta
            else:
                table.failures.append((i, j))
    if jacobi:
        for a, b, c in itertools.combinations(range(len(basis)), 3):
            X, Y, W = basis[a], basis[b], basis[c]
            J = (commutator(commutator(X, Y), W) + commutator(commutator(Y, W), X)
                 + commutator(commutator(W, X), Y))
            table.jacobi_checked += 1
            if not J.is_zero():
                table.jacobi_failures.append((a, b, c))
    return table
