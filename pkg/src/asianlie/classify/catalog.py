"""The catalogue of canonical elements and their finite symmetry bases,
read from a versioned fixture and checked generator by generator."""

from __future__ import annotations

import random
import re
from fractions import Fraction
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
import sympy as sp
from scipy.optimize import linprog

from ..liealg import AlgebraSpan, decompose
from ..symcore import normalize, parse, serialize, t, u, x, y
from ..symmetry import VectorField, lie_residual
from .cases import Ansatz, case_ansatz

FIXTURE_VERSION = 1

_HEADER = re.compile(r"\[row\s+(\d+)\]\s*f\s*=\s*([^|]+?)\s*(?:\|\s*excluded\s+(\w+)\s*=\s*(.+))?$")


@dataclass
class FixtureRow:
    row: int
    f: sp.Expr
    generators: list[VectorField]
    lines: list[str]
    excluded: dict[str, list[sp.Expr]] = field(default_factory=dict)


def load_table2(path: str | Path | None = None) -> list[FixtureRow]:
    if path is None:
        text = resources.files("asianlie.data").joinpath("table2.txt").read_text()
    else:
        text = Path(path).read_text()
    rows: list[FixtureRow] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            m = _HEADER.match(line)
            if not m:
                raise ValueError(f"line {lineno}: bad row header {line!r}")
            excl = {}
            if m.group(3):
                excl[m.group(3)] = [parse(v) for v in m.group(4).split(",")]
            rows.append(FixtureRow(int(m.group(1)), parse(m.group(2)), [], [], excl))
            continue
        if not rows:
            raise ValueError(f"line {lineno}: generator before any row header")
        rows[-1].generators.append(VectorField.from_text(line))
        rows[-1].lines.append(line)
    return rows


@dataclass
class Discrepancy:
    generator: str
    residual: sp.Expr
    nearest: VectorField | None
    nearest_constants: dict[str, sp.Expr]
    nearest_residual: sp.Expr | None

    def to_text(self) -> str:
        out = [f"generator: {self.generator}", f"  residual: {serialize(self.residual)}"]
        if self.nearest is not None:
            consts = ", ".join(f"{k}={serialize(v)}" for k, v in self.nearest_constants.items())
            out.append(f"  nearest ansatz specialization ({consts}): {self.nearest.to_text()}")
            out.append(f"  its residual: {serialize(self.nearest_residual)}")
        return "\n".join(out)


@dataclass
class GeneratorCheck:
    text: str
    field: VectorField
    residual: sp.Expr
    ansatz_constants: dict[str, sp.Expr] | None

    @property
    def passed(self) -> bool:
        return self.residual == 0


@dataclass
class ClassificationCase:
    row: int
    f: sp.Expr
    generators: list[VectorField]
    ansatz: Ansatz
    checks: list[GeneratorCheck] = field(default_factory=list)
    discrepancies: list[Discrepancy] = field(default_factory=list)
    excluded: dict[str, list[sp.Expr]] = field(default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.generators)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def span(self) -> AlgebraSpan:
        return AlgebraSpan(tuple(self.generators), f"row {self.row}")


def _sample(seed: int, count: int):
    rng = random.Random(seed)
    return [{t: rng.uniform(-2, 2), x: rng.uniform(1.5, 6), y: rng.uniform(-2, 2), u: rng.uniform(0.5, 2)}
            for _ in range(count)]


def nearest_specialization(G: VectorField, ansatz: Ansatz, f, seed: int = 0) -> tuple[dict, VectorField, sp.Expr]:
    """Fit of the ansatz constants to ``G`` on sample points, rationalized,
    with the residual of the resulting specialization.

    The fit minimizes the L1 mismatch, which matches the components that
    agree exactly and concentrates the error in the ones that do not."""
    basis = ansatz.basis()
    syms = set().union(*(sp.sympify(c).free_symbols for c in (*ansatz.field.coefficients, *G.coefficients)))
    extra = sorted(syms - {t, x, y, u} - set(ansatz.constants), key=str)
    pts = _sample(seed, 3 * len(basis) + 6)
    subs_extra = {s: 3.25 for s in extra}

    def vals(F: VectorField):
        out = []
        for pt in pts:
            p = {**pt, **subs_extra}
            out += [float(sp.sympify(c).evalf(subs=p)) for c in F.coefficients]
        return np.array(out)

    A = np.column_stack([vals(B) for B in basis])
    b = vals(G)
    m, k = A.shape
    # variables (c+, c-, s) with -s <= A c - b <= s; a penalty on |c|
    # prefers the sparsest specialization among equally good fits
    penalty = 0.25 * m
    cost = np.concatenate([np.full(2 * k, penalty), np.ones(m)])
    A_ub = np.block([[A, -A, -np.eye(m)], [-A, A, -np.eye(m)]])
    b_ub = np.concatenate([b, -b])
    lp = linprog(cost, A_ub=A_ub, b_ub=b_ub, bounds=[(0, None)] * (2 * k + m), method="highs")
    c = lp.x[:k] - lp.x[k:2 * k] if lp.success else np.linalg.lstsq(A, b, rcond=None)[0]
    consts = {C.name: sp.Rational(Fraction(float(v)).limit_denominator(24)) for C, v in zip(ansatz.constants, c)}
    spec = ansatz.specialize(consts)
    return consts, spec, lie_residual(spec, f)


def _ansatz_constants(G: VectorField, ansatz: Ansatz) -> dict[str, sp.Expr] | None:
    dec = decompose(G, ansatz.basis())
    if not dec.exact:
        return None
    return {C.name: v for C, v in zip(ansatz.constants, dec.coefficients)}


def check_row(row: FixtureRow) -> ClassificationCase:
    ansatz = case_ansatz(row.row)
    case = ClassificationCase(row.row, row.f, row.generators, ansatz, excluded=row.excluded)
    for text, G in zip(row.lines, row.generators):
        res = lie_residual(G, row.f)
        consts = _ansatz_constants(G, ansatz)
        case.checks.append(GeneratorCheck(text, G, res, consts))
        if res != 0:
            nc, spec, sres = nearest_specialization(G, ansatz, row.f)
            case.discrepancies.append(Discrepancy(text, res, spec, nc, sres))
    return case


def table2_catalog(path: str | Path | None = None) -> list[ClassificationCase]:
    """All rows of the fixture with per-generator residual checks."""
    return [check_row(r) for r in load_table2(path)]


ROW_OF_TAG = {"power": 2, "log": 4, "log-log": 6}


def row_for_family(fam) -> int:
    """Catalogue row of the canonical form a recognized family reduces to."""
    if fam.tag == "generic":
        return 1
    if fam.tag == "constant":
        raise ValueError("reducible to two independent variables")
    if fam.tag == "log-power":
        n = normalize(fam.n)
        if n == -2:
            return 5
        if n == 1:
            return 4
        return 3
    return ROW_OF_TAG[fam.tag]
