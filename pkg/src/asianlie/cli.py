"""Command-line entry point: ``asianlie {determining,classify,verify-table2,reduce}``.

Every command builds a :class:`Report`, prints it as text (or JSON with
``--json``) and exits 1 if any check failed, 2 on an input error, else 0.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field

import sympy as sp

from . import __version__
from .symcore import ParseError, parse, serialize

SCHEMA_VERSION = "1"
PASS, FAIL, INCONCLUSIVE = "pass", "fail", "inconclusive"

XI0_AXIOM = "xi0_y = 0 taken as axiom on the classification path"


@dataclass
class Check:
    name: str
    status: str
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    command: str
    inputs: dict
    settings: dict = field(default_factory=dict)
    assumptions: list[str] = field(default_factory=list)
    checks: list[Check] = field(default_factory=list)
    discrepancies: list[str] = field(default_factory=list)
    output: list[str] = field(default_factory=list)
    error: str | None = None
    engine_version: str = __version__
    schema_version: str = SCHEMA_VERSION

    def add(self, name: str, ok: bool | None, **detail) -> Check:
        status = INCONCLUSIVE if ok is None else (PASS if ok else FAIL)
        c = Check(name, status, detail)
        self.checks.append(c)
        return c

    def summary(self) -> dict[str, int]:
        out = {PASS: 0, FAIL: 0, INCONCLUSIVE: 0}
        for c in self.checks:
            out[c.status] += 1
        return out

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return 2
        return 1 if any(c.status == FAIL for c in self.checks) else 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["summary"] = self.summary()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        lines = [f"asianlie {self.engine_version} :: {self.command}"]
        lines += [f"  {k} = {v}" for k, v in self.inputs.items()]
        if self.settings:
            lines.append("settings: " + ", ".join(f"{k}={v}" for k, v in self.settings.items()))
        lines += [f"assumption: {a}" for a in self.assumptions]
        if self.output:
            lines.append("")
            lines += self.output
            lines.append("")
        for c in self.checks:
            lines.append(f"{c.name}: {c.status}")
            for k, v in c.detail.items():
                if isinstance(v, list):
                    lines.append(f"    {k}:")
                    lines += [f"      {item}" for item in v]
                else:
                    lines.append(f"    {k}: {v}")
        for d in self.discrepancies:
            lines.append("discrepancy:")
            lines += ["  " + s for s in d.splitlines()]
        if self.error:
            lines.append(f"error: {self.error}")
        s = self.summary()
        lines.append(f"summary: {s[PASS]} pass, {s[FAIL]} fail, {s[INCONCLUSIVE]} inconclusive")
        return "\n".join(lines)


def _text(e) -> str:
    return serialize(sp.sympify(e))


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_determining(args) -> Report:
    from .symmetry import determining_system, verify_kernel
    from .systems import compare, load_reference

    rep = Report("determining", {"fixtures": args.fixtures or "<builtin>"},
                 {"seed": args.seed, "show_monomials": args.show_monomials})
    ds = determining_system()
    rep.output.append("generated determining system (each = 0):")
    rep.output += ["  " + line for line in ds.to_text(show_monomials=args.show_monomials).splitlines()]
    ref = load_reference(args.fixtures)
    eq = compare(ds, ref)
    rep.add(f"equivalent to reference system ({ref.source})", eq.passed,
            equations_generated=len(ds), equations_reference=len(ref.equations))
    rep.discrepancies += eq.failures()
    k = verify_kernel()
    rep.add("kernel generators D_t, D_y, u*D_u", all(r == 0 for r in k.residuals.values()),
            residuals=[f"{n}: {_text(r)}" for n, r in k.residuals.items()])
    rep.add("beta(t, x)*D_u residual equals beta_t - x^2*beta_xx", k.beta_matches,
            residual=_text(k.beta_residual))
    return rep


def cmd_classify(args) -> Report:
    from .classify import canonicalize, recognize, row_for_family
    from .classify.cases import CANONICAL_F

    rep = Report("classify", {"f": args.f}, {"seed": args.seed}, [XI0_AXIOM])
    f = parse(args.f)
    fam = recognize(f)
    rep.add("family recognized", True, family=fam.tag,
            parameters=", ".join(f"{k}={_text(v)}" for k, v in fam.params().items()) or "none")
    if fam.tag == "constant":
        rep.add("classification", None, note="reducible to two independent variables (f constant)")
        return rep
    if fam.tag == "generic":
        rep.add("classification", True, row=1, canonical=CANONICAL_F[1],
                note="generic: kernel only (D_t, D_y, u*D_u plus superposition)")
        return rep
    c = canonicalize(fam)
    row = row_for_family(fam)
    rep.assumptions += c.notes
    rep.add("equivalence transformation", c.passed, map_row=c.table_row, canonical=_text(c.canonical),
            transform=", ".join(f"{k}={v}" for k, v in c.transform.as_dict().items()),
            law_residual=_text(c.law_residual),
            point_map_residuals=", ".join(f"{k}: {_text(v)}" for k, v in c.point_map_check.items()))
    rep.add("classification", True, row=row, canonical=CANONICAL_F[row])
    return rep


NUMERIC_F = {1: "exp(x)/4", 3: "ln(x)^3"}


def cmd_verify_table2(args) -> Report:
    from .classify import table2_catalog
    from .liealg import closure_report

    rows = table2_catalog(args.fixtures)
    if args.row is not None:
        rows = [c for c in rows if c.row == args.row]
        if not rows:
            raise ValueError(f"no row {args.row} in the fixture")
    settings = {"seed": args.seed, "numeric": args.numeric}
    if args.numeric:
        settings.update({"K": args.tolerance, "epsilon": list(args.epsilon)})
    rep = Report("verify-table2", {"fixtures": args.fixtures or "<builtin>", "row": args.row or "all"},
                 settings, [XI0_AXIOM, "superposition generators beta*D_u are not listed"])
    dims = {}
    for case in rows:
        dims[case.row] = case.dimension
        rep.add(f"row {case.row} (f = {_text(case.f)}) residuals", case.passed,
                generators=[f"{c.text}  ->  {_text(c.residual)}" for c in case.checks])
        rep.discrepancies += [d.to_text() for d in case.discrepancies]
        st = closure_report(case.span(), case.f, seed=args.seed)
        detail = {"dimension": case.dimension, "jacobi_triples": st.jacobi_checked}
        if st.failures:
            detail["not_closed"] = [f"[{st.names[i]}, {st.names[j]}]" for i, j in st.failures]
        if st.jacobi_failures:
            detail["jacobi_failures"] = [str(tr) for tr in st.jacobi_failures]
        rep.add(f"row {case.row} closure and Jacobi", st.passed, **detail)
    if len(dims) == 6 and 4 in dims:
        others = [d for r, d in dims.items() if r != 4]
        rep.add("row 4 dimension is 8 and exceeds all other rows", dims[4] == 8 and dims[4] > max(others),
                dimensions=", ".join(f"row {r}: {d}" for r, d in sorted(dims.items())))
    if args.numeric:
        _numeric_rows(rep, rows, args)
    return rep


def _numeric_rows(rep: Report, rows, args) -> None:
    from .verify import check_symmetry_numerically, default_region, discretization_estimate, numeric_solution

    rep.assumptions.append("numeric settings are artifact conventions (initial data, grid, boundary data)")
    for case in rows:
        f_text = NUMERIC_F.get(case.row, _text(case.f))
        if case.row in NUMERIC_F:
            rep.assumptions.append(f"row {case.row} checked numerically with f = {f_text}")
        f = parse(f_text)
        sol = numeric_solution(f)
        region = default_region(sol)
        est = discretization_estimate(sol, region)
        for G in case.generators:
            G = _specialize_n(G, case.row)
            r = check_symmetry_numerically(G, f, sol, args.epsilon, K=args.tolerance, region=region, estimate=est)
            ok = {PASS: True, FAIL: False}.get(r.status)
            rep.add(f"row {case.row} numeric {r.field}", ok, estimate=f"{est:.3e}",
                    ratios=", ".join(f"eps={e.epsilon}: {e.ratio:.3g}" for e in r.results),
                    **({"note": r.note} if r.note else {}))


def _specialize_n(G, row: int):
    if row != 3:
        return G
    n = [s for c in G.coefficients for s in sp.sympify(c).free_symbols if s.name == "n"]
    return type(G)(*[sp.sympify(c).xreplace({s: 3 for s in n}) for c in G.coefficients]) if n else G


def cmd_reduce(args) -> Report:
    from .symmetry import VectorField
    from .verify import ReductionNotAutomated, reduce

    rep = Report("reduce", {"f": args.f, "generator": args.generator}, {"seed": args.seed})
    f = parse(args.f)
    X = VectorField.from_text(args.generator)
    try:
        r = reduce(X, f)
    except ReductionNotAutomated as e:
        rep.error = str(e).splitlines()[0]
        rep.output = ["characteristic system:", "  " + e.characteristic_system]
        return rep
    rep.output = [f"ansatz: {r.ansatz}", f"reduced equation: {r.text()}"]
    rep.add("back-substitution residual is zero", r.exact, residual=_text(r.back_substitution))
    rep.assumptions += r.notes
    return rep


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def build_parser() -> argparse.ArgumentParser:
    from .verify import DEFAULT_K, DEFAULT_SWEEP

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the machine-readable report")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized equality points")
    common.add_argument("--tolerance", type=float, default=DEFAULT_K,
                        help="numeric pass ratio K (residual <= K * discretization estimate)")

    p = argparse.ArgumentParser(prog="asianlie", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"asianlie {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("determining", parents=[common], help="regenerate and compare the determining system")
    d.add_argument("--show-monomials", action="store_true")
    d.add_argument("--fixtures", help="reference system file")
    d.set_defaults(func=cmd_determining)

    c = sub.add_parser("classify", parents=[common], help="family, canonical form and algebra row of f")
    c.add_argument("--f", required=True, help="f(x) in the symcore grammar")
    c.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify-table2", parents=[common], help="check the catalogue of symmetry algebras")
    v.add_argument("--row", type=int)
    v.add_argument("--numeric", action="store_true", help="also run numerical flow checks")
    v.add_argument("--epsilon", type=_floats, default=DEFAULT_SWEEP, help="comma-separated flow parameters")
    v.add_argument("--fixtures", help="catalogue fixture file")
    v.set_defaults(func=cmd_verify_table2)

    r = sub.add_parser("reduce", parents=[common], help="invariant reduction by one generator")
    r.add_argument("--f", required=True)
    r.add_argument("--generator", required=True, help="e.g. 'D_y + lam*u*D_u'")
    r.set_defaults(func=cmd_reduce)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        rep = args.func(args)
    except (ParseError, ValueError, OSError) as e:
        rep = Report(args.command, {k: v for k, v in vars(args).items() if k not in ("func", "command")})
        rep.error = str(e)
    print(rep.to_json() if args.json else rep.to_text())
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())
