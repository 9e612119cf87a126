"""Two-way equivalence of determining systems.

Equations are linear in the unknown coefficient functions and their
derivatives; the arbitrary element ``f`` and its derivatives are treated as
coefficients.  Membership of an equation in the span of a system is decided
by exact rank computations over the field of rational functions in
``t, x, y, u`` and ``f, f', ...``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations_with_replacement
from pathlib import Path

import sympy as sp
from sympy.core.function import AppliedUndef
from sympy.polys.matrices import DomainMatrix

from .symcore import normalize, parse, serialize, t, u, x, y
from .symmetry import DeterminingSystem

COEFFICIENT_FUNCTIONS = frozenset({"f"})


@dataclass
class ReferenceSystem:
    free: list[sp.Expr]
    classifying: list[sp.Expr]
    source: str = "<builtin>"

    @property
    def equations(self) -> list[sp.Expr]:
        return self.free + self.classifying


def load_reference(path: str | Path | None = None) -> ReferenceSystem:
    if path is None:
        text = resources.files("asianlie.data").joinpath("determining.txt").read_text()
        source = "asianlie/data/determining.txt"
    else:
        text = Path(path).read_text()
        source = str(path)
    groups: dict[str, list] = {"free": [], "classifying": []}
    current = None
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in groups:
                raise ValueError(f"unknown section [{current}] in {source}")
            continue
        if current is None:
            raise ValueError(f"equation before any section header in {source}")
        groups[current].append(parse(line))
    return ReferenceSystem(groups["free"], groups["classifying"], source)


def _is_unknown(atom) -> bool:
    if isinstance(atom, sp.Derivative):
        atom = atom.expr
    return isinstance(atom, AppliedUndef) and atom.func.__name__ not in COEFFICIENT_FUNCTIONS


def _unknowns(eqs) -> list[sp.Expr]:
    found = {a for e in eqs for a in e.atoms(sp.Derivative, AppliedUndef) if _is_unknown(a)}
    return sorted(found, key=sp.default_sort_key)


def _coefficient_symbols(eqs):
    """Replace f(x) and its derivatives by plain symbols."""
    mapping = {}
    for e in eqs:
        for a in e.atoms(sp.Derivative, AppliedUndef):
            base = a.expr if isinstance(a, sp.Derivative) else a
            if isinstance(base, AppliedUndef) and base.func.__name__ in COEFFICIENT_FUNCTIONS:
                mapping[a] = sp.Symbol(f"__c:{sp.sstr(a)}")
    return mapping


def _rows(eqs, unknowns):
    cmap = _coefficient_symbols(eqs)
    usyms = {a: sp.Symbol(f"__u{i}") for i, a in enumerate(unknowns)}
    rows = []
    for e in eqs:
        # derivatives before bare applications so xreplace does not split them
        ex = e.xreplace({k: v for k, v in usyms.items() if isinstance(k, sp.Derivative)})
        ex = ex.xreplace({k: v for k, v in usyms.items() if not isinstance(k, sp.Derivative)})
        ex = sp.expand(ex.xreplace(cmap))
        row = [sp.cancel(sp.diff(ex, s)) for s in usyms.values()]
        rest = sp.cancel(ex - sum(c * s for c, s in zip(row, usyms.values())))
        if rest != 0 or any(r.free_symbols & set(usyms.values()) for r in row):
            raise ValueError(f"equation is not linear homogeneous in the unknowns: {serialize(e)}")
        rows.append(row)
    return rows


def _rank(rows, ncols) -> int:
    if not rows:
        return 0
    return DomainMatrix.from_list_sympy(len(rows), ncols, rows).to_field().rank()


def in_span(eq, system) -> bool:
    """Is ``eq`` a linear combination (rational-function coefficients) of ``system``?"""
    eq = sp.sympify(eq)
    if normalize(eq) == 0:
        return True
    unknowns = _unknowns([eq, *system])
    rows = _rows([*system, eq], unknowns)
    base = _rank(rows[:-1], len(unknowns))
    return base == _rank(rows, len(unknowns))


# ---------------------------------------------------------------------------
# general solution of the f-free group
# ---------------------------------------------------------------------------

def _free_solution(free: list[sp.Expr]) -> dict:
    """Map each unknown function to the general solution of the free group.

    Supported constraint shapes: ``F_v = 0`` (drop ``v`` from the arguments)
    and ``F_vv = 0`` (``F`` affine in ``v``).
    """
    drop: dict[str, set] = {}
    affine: dict[str, set] = {}
    args: dict[str, tuple] = {}
    for e in free:
        terms = [a for a in e.atoms(sp.Derivative)]
        if len(terms) != 1 or not (normalize(e / terms[0]).free_symbols <= {x, t, y, u}):
            raise ValueError(f"unsupported free equation {serialize(e)}")
        d = terms[0]
        name = d.expr.func.__name__
        args[name] = d.expr.args
        (v, k), *more = d.variable_count
        if more or k > 2:
            raise ValueError(f"unsupported free equation {serialize(e)}")
        (drop if k == 1 else affine).setdefault(name, set()).add(v)
    out = {}
    for name, fargs in args.items():
        keep = tuple(a for a in fargs if a not in drop.get(name, set()))
        lin = sorted(affine.get(name, set()), key=str)
        if not lin:
            out[name] = (fargs, sp.Function(name)(*keep))
            continue
        if len(lin) != 1:
            raise ValueError(f"{name}: more than one affine variable")
        v = lin[0]
        rest = tuple(a for a in keep if a != v)
        out[name] = (fargs, sp.Function(f"{name}_a")(*rest) * v + sp.Function(f"{name}_b")(*rest))
    return out


def _apply_solution(e: sp.Expr, sol: dict) -> sp.Expr:
    for name, (fargs, val) in sol.items():
        e = e.replace(sp.Function(name), sp.Lambda(fargs, val))
    return normalize(e.doit())


def _split_u(e: sp.Expr) -> list[sp.Expr]:
    e = normalize(e)
    if e == 0:
        return []
    num, den = sp.fraction(sp.together(e))
    poly = sp.Poly(sp.expand(num), u)
    return [normalize(c / den) for c in poly.all_coeffs() if normalize(c) != 0]


def _derivatives(eq: sp.Expr, order: int = 2) -> list[sp.Expr]:
    out = []
    for k in range(1, order + 1):
        for vs in combinations_with_replacement((t, x, y, u), k):
            out.append(sp.diff(eq, *vs))
    return out


@dataclass
class EquivalenceReport:
    reference_source: str
    free_derived: list[tuple[sp.Expr, bool]] = field(default_factory=list)
    reference_in_generated: list[tuple[sp.Expr, bool]] = field(default_factory=list)
    generated_in_reference: list[tuple[sp.Expr, bool]] = field(default_factory=list)
    reduced_by: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(ok for _, ok in self.free_derived + self.reference_in_generated
                   + self.generated_in_reference)

    def failures(self) -> list[str]:
        out = []
        for label, items in (("free equation not derivable", self.free_derived),
                             ("reference equation not implied", self.reference_in_generated),
                             ("generated equation not implied", self.generated_in_reference)):
            out += [f"{label}: {serialize(e)} = 0" for e, ok in items if not ok]
        return out


def compare(generated: DeterminingSystem, reference: ReferenceSystem) -> EquivalenceReport:
    """Two-way equivalence of a generated system with a reference system."""
    report = EquivalenceReport(reference.source)
    pool = list(generated.equations)

    # the f-free equations must follow from the generated system, allowing
    # derivatives of those already established
    pending = list(reference.free)
    extra: list[sp.Expr] = []
    progress = True
    while pending and progress:
        progress = False
        for eq in list(pending):
            if in_span(eq, pool + extra):
                report.free_derived.append((eq, True))
                extra += [eq, *_derivatives(eq)]
                pending.remove(eq)
                progress = True
    report.free_derived += [(eq, False) for eq in pending]

    sol = _free_solution(reference.free)
    report.reduced_by = {k: v[1] for k, v in sol.items()}
    gen_red = [c for e in generated.equations for c in _split_u(_apply_solution(e, sol))]
    ref_red = [c for e in reference.classifying for c in _split_u(_apply_solution(e, sol))]

    for eq in reference.classifying:
        parts = _split_u(_apply_solution(eq, sol))
        report.reference_in_generated.append((eq, all(in_span(p, gen_red) for p in parts)))
    for eq in generated.equations:
        parts = _split_u(_apply_solution(eq, sol))
        report.generated_in_reference.append((eq, all(in_span(p, ref_red) for p in parts)))
    return report
