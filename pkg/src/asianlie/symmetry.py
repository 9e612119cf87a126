"""Vector fields, second prolongation and the invariance criterion for

    u_t = x^2 u_xx + f(x) u_y.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp
from sympy.core.function import AppliedUndef

from .symcore import (
    JETS1,
    JETS2,
    collect_monomials,
    function,
    is_jet,
    is_zero,
    jet,
    jet_order,
    normalize,
    param,
    parse,
    serialize,
    t,
    total_derivative,
    u,
    x,
    y,
)

u_t, u_x, u_y = JETS1
u_xx = jet("xx")

# the fixed symbol standing for the arbitrary element f(x)
f_generic = function("f", x)

_OPS = {name: param(name) for name in ("D_t", "D_x", "D_y", "D_u")}


class ProlongationError(RuntimeError):
    pass


@dataclass(frozen=True)
class VectorField:
    """``xi0*D_t + xi1*D_x + xi2*D_y + eta*D_u`` with coefficients in (t, x, y, u)."""

    xi0: sp.Expr = sp.Integer(0)
    xi1: sp.Expr = sp.Integer(0)
    xi2: sp.Expr = sp.Integer(0)
    eta: sp.Expr = sp.Integer(0)

    def __post_init__(self):
        for name in ("xi0", "xi1", "xi2", "eta"):
            val = sp.sympify(getattr(self, name))
            if any(is_jet(s) and s is not u for s in val.free_symbols):
                raise ValueError(f"{name} must not depend on derivatives of u")
            object.__setattr__(self, name, val)

    @property
    def coefficients(self) -> tuple[sp.Expr, sp.Expr, sp.Expr, sp.Expr]:
        return (self.xi0, self.xi1, self.xi2, self.eta)

    def __add__(self, other: "VectorField") -> "VectorField":
        return VectorField(*[a + b for a, b in zip(self.coefficients, other.coefficients)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        return VectorField(*[a - b for a, b in zip(self.coefficients, other.coefficients)])

    def __mul__(self, c) -> "VectorField":
        return VectorField(*[c * a for a in self.coefficients])

    __rmul__ = __mul__

    def __neg__(self) -> "VectorField":
        return self * -1

    def __call__(self, g) -> sp.Expr:
        """Action on a function of (t, x, y, u)."""
        g = sp.sympify(g)
        return (self.xi0 * sp.diff(g, t) + self.xi1 * sp.diff(g, x)
                + self.xi2 * sp.diff(g, y) + self.eta * sp.diff(g, u))

    def normalized(self) -> "VectorField":
        return VectorField(*[normalize(a) for a in self.coefficients])

    def is_zero(self) -> bool:
        return all(is_zero(a) for a in self.coefficients)

    def to_text(self) -> str:
        out = ""
        for c, op in zip(self.normalized().coefficients, ("D_t", "D_x", "D_y", "D_u")):
            if c == 0:
                continue
            sign = " + "
            if c.could_extract_minus_sign():
                sign, c = " - ", -c
            body = serialize(c)
            term = op if c == 1 else (f"({body})*{op}" if c.is_Add else f"{body}*{op}")
            out += (("-" if sign == " - " else "") + term) if not out else sign + term
        return out or "0"

    @classmethod
    def from_text(cls, text: str) -> "VectorField":
        """Parse ``a*D_t + b*D_x + c*D_y + d*D_u`` in the symcore grammar."""
        e = sp.expand(parse(text))
        ops = list(_OPS.values())
        poly = sp.Poly(e, *ops)
        if poly.total_degree() > 1 or poly.coeff_monomial(1) != 0:
            raise ValueError(f"not a first-order operator: {text!r}")
        coeffs = [poly.coeff_monomial(op) for op in ops]
        return cls(*[normalize(c) for c in coeffs])

    def __str__(self) -> str:
        return self.to_text()


def generic_field() -> VectorField:
    """The operator with undetermined coefficients xi0..eta of (t, x, y, u)."""
    args = (t, x, y, u)
    return VectorField(*(function(name, *args) for name in ("xi0", "xi1", "xi2", "eta")))


@dataclass(frozen=True)
class ProlongedField:
    base: VectorField
    zeta_t: sp.Expr
    zeta_x: sp.Expr
    zeta_y: sp.Expr
    zeta_xx: sp.Expr


def _zeta(X: VectorField, index: str) -> sp.Expr:
    char = X.eta - X.xi0 * u_t - X.xi1 * u_x - X.xi2 * u_y
    out = char
    for axis in index:
        out = total_derivative(out, {"t": t, "x": x, "y": y}[axis], max_order=3)
    out += X.xi0 * jet(index + "t") + X.xi1 * jet(index + "x") + X.xi2 * jet(index + "y")
    out = sp.expand(out)
    stray = sorted((s for s in out.free_symbols if is_jet(s) and jet_order(s) > 2), key=str)
    if stray:
        raise ProlongationError(f"third-order jets survived in zeta_{index}: {stray}")
    return out


def prolong(X: VectorField) -> ProlongedField:
    """Second prolongation restricted to the jets that occur in the equation."""
    return ProlongedField(X, _zeta(X, "t"), _zeta(X, "x"), _zeta(X, "y"), _zeta(X, "xx"))


def _check_f(f: sp.Expr) -> sp.Expr:
    f = sp.sympify(f)
    if f.has(t, y, u) or any(is_jet(s) for s in f.free_symbols):
        raise ValueError(f"f must depend on x only, got {f}")
    for app in f.atoms(AppliedUndef):
        if set(app.args) - {x}:
            raise ValueError(f"f must depend on x only, got {f}")
    return f


def lie_residual(X: VectorField, f) -> sp.Expr:
    """``pr X (u_t - x^2 u_xx - f u_y)`` on the solution manifold.

    ``u_t`` is eliminated through the equation; mixed jets such as ``u_tx``
    stay as free coordinates.
    """
    f = _check_f(f)
    pr = prolong(X)
    raw = (pr.zeta_t - 2 * x * X.xi1 * u_xx - x**2 * pr.zeta_xx
           - X.xi1 * sp.diff(f, x) * u_y - f * pr.zeta_y)
    raw = raw.subs(u_t, x**2 * u_xx + f * u_y)
    return normalize(sp.expand(raw))


RESIDUAL_BASIS = (jet("x"), jet("y"), jet("tx"), jet("ty"), jet("tt"), jet("xx"), jet("xy"), jet("yy"))


@dataclass
class DeterminingSystem:
    """Equations (each ``= 0``) with the jet monomial that produced them."""

    equations: list[sp.Expr]
    monomials: list[sp.Expr] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.equations)

    def to_text(self, show_monomials: bool = True) -> str:
        lines = []
        for eq, mono in zip(self.equations, self.monomials):
            line = serialize(eq)
            if show_monomials:
                line += f"    # {serialize(mono)}"
            lines.append(line)
        return "\n".join(lines)

    def reassemble(self) -> sp.Expr:
        return sp.Add(*[m * e for m, e in zip(self.monomials, self.equations)])


def split_residual(residual: sp.Expr, basis=RESIDUAL_BASIS) -> DeterminingSystem:
    terms = collect_monomials(residual, basis)
    return DeterminingSystem(list(terms.values()), list(terms.keys()))


def determining_system(X: VectorField | None = None, f=None) -> DeterminingSystem:
    """Split the invariance residual of ``X`` (default: generic) over jet monomials."""
    X = generic_field() if X is None else X
    f = f_generic if f is None else f
    return split_residual(lie_residual(X, f))


@dataclass
class KernelReport:
    residuals: dict[str, sp.Expr]
    beta_residual: sp.Expr
    beta_matches: bool

    @property
    def passed(self) -> bool:
        return all(r == 0 for r in self.residuals.values()) and self.beta_matches


def verify_kernel() -> KernelReport:
    """Check the symmetries admitted for every f."""
    fields = {
        "D_t": VectorField(xi0=1),
        "D_y": VectorField(xi2=1),
        "u*D_u": VectorField(eta=u),
    }
    residuals = {k: lie_residual(v, f_generic) for k, v in fields.items()}
    beta = function("beta", t, x)
    r = lie_residual(VectorField(eta=beta), f_generic)
    expected = sp.diff(beta, t) - x**2 * sp.diff(beta, x, 2)
    return KernelReport(residuals, r, bool(is_zero(r - expected)))
