"""Point transformations preserving the class ``u_t = x^2 u_xx + f(x) u_y``.

    t' = e1^2 t + e2,  x' = e3 x^e1,  y' = e4 t + e5 y + e6,
    u' = e7 exp((1 - e1^2) t / 4) x^((e1 - 1)/2) u + phi(t, x),
    f' = (e5 f - e4) / e1^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
import sympy as sp
from scipy.optimize import least_squares

from ..symcore import Composite, function, is_zero, normalize, param, t, x, y
from .families import CONSTANT, GENERIC, LOG, LOG_LOG, LOG_POWER, POWER, FunctionFamily, recognize


class InvalidTransform(ValueError):
    pass


class ReducibleFamily(ValueError):
    pass


def _z(v) -> bool:
    return sp.sympify(v) == 0


@dataclass(frozen=True)
class EquivalenceTransform:
    eps1: sp.Expr = sp.Integer(1)
    eps2: sp.Expr = sp.Integer(0)
    eps3: sp.Expr = sp.Integer(1)
    eps4: sp.Expr = sp.Integer(0)
    eps5: sp.Expr = sp.Integer(1)
    eps6: sp.Expr = sp.Integer(0)
    eps7: sp.Expr = sp.Integer(1)
    phi: sp.Expr = sp.Integer(0)
    notes: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        for k in ("eps1", "eps2", "eps3", "eps4", "eps5", "eps6", "eps7", "phi"):
            object.__setattr__(self, k, sp.sympify(getattr(self, k)))
        self.validate()

    @property
    def eps(self) -> tuple[sp.Expr, ...]:
        return (self.eps1, self.eps2, self.eps3, self.eps4, self.eps5, self.eps6, self.eps7)

    def validate(self) -> None:
        prod = normalize(self.eps1 * self.eps3 * self.eps5 * self.eps7)
        if prod == 0:
            raise InvalidTransform("invalid transform: e1*e3*e5*e7 must be nonzero")
        if self.phi.has(y) or any(s.name == "u" for s in self.phi.free_symbols):
            raise InvalidTransform("phi must depend on (t, x) only")

    def multiplier(self) -> sp.Expr:
        return self.eps7 * sp.exp((1 - self.eps1**2) * t / 4) * x ** ((self.eps1 - 1) / 2)

    def point_map(self) -> dict[str, sp.Expr]:
        """New variables in terms of old ones."""
        return {
            "t": self.eps1**2 * t + self.eps2,
            "x": self.eps3 * x**self.eps1,
            "y": self.eps4 * t + self.eps5 * y + self.eps6,
        }

    def f_law(self, f) -> sp.Expr:
        """Transformed element, still written in the old ``x``."""
        return (self.eps5 * sp.sympify(f) - self.eps4) / self.eps1**2

    def old_x(self, xbar) -> sp.Expr:
        return (sp.sympify(xbar) / self.eps3) ** (1 / self.eps1)

    def phi_residual(self) -> sp.Expr:
        """``phi_t - x^2 phi_xx - (1 - e1) x phi_x`` (must vanish)."""
        p = self.phi
        return normalize(sp.diff(p, t) - x**2 * sp.diff(p, x, 2) - (1 - self.eps1) * x * sp.diff(p, x))

    def inverse(self) -> "EquivalenceTransform":
        if self.phi != 0:
            raise NotImplementedError("inverse with nonzero phi")
        e1, e2, e3, e4, e5, e6, e7 = self.eps
        return EquivalenceTransform(
            1 / e1,
            -e2 / e1**2,
            e3 ** (-1 / e1),
            -e4 / (e1**2 * e5),
            1 / e5,
            (e4 * e2 / e1**2 - e6) / e5,
            sp.exp((1 - e1**2) * e2 / (4 * e1**2)) * e3 ** ((e1 - 1) / (2 * e1)) / e7,
        )

    def then(self, other: "EquivalenceTransform") -> "EquivalenceTransform":
        """Apply ``self`` first and ``other`` second."""
        if self.phi != 0 or other.phi != 0:
            raise NotImplementedError("composition with nonzero phi")
        a1, a2, a3, a4, a5, a6, a7 = self.eps
        b1, b2, b3, b4, b5, b6, b7 = other.eps
        return EquivalenceTransform(
            a1 * b1,
            b1**2 * a2 + b2,
            b3 * a3**b1,
            b4 * a1**2 + b5 * a4,
            b5 * a5,
            b4 * a2 + b5 * a6 + b6,
            b7 * a7 * sp.exp((1 - b1**2) * a2 / 4) * a3 ** ((b1 - 1) / 2),
        )

    def normalized(self) -> "EquivalenceTransform":
        return replace(self, **{f"eps{i + 1}": normalize(e) for i, e in enumerate(self.eps)})

    def is_identity(self) -> bool:
        ident = (1, 0, 1, 0, 1, 0, 1)
        return all(is_zero(a - b) for a, b in zip(self.eps, ident)) and is_zero(self.phi)

    def as_dict(self) -> dict[str, str]:
        from ..symcore import serialize
        out = {f"eps{i + 1}": serialize(normalize(e)) for i, e in enumerate(self.eps)}
        out["phi"] = serialize(self.phi)
        return out


def apply_equivalence(T: EquivalenceTransform, f) -> sp.Expr:
    """The transformed element as a function of the new ``x``."""
    T.validate()
    law = T.f_law(f)
    return normalize(sp.sympify(law).xreplace({x: T.old_x(x)}))


@dataclass
class ChangeOfVariablesReport:
    residual: sp.Expr
    multiplier: sp.Expr
    phi_residual: sp.Expr

    @property
    def passed(self) -> bool:
        return self.residual == 0 and self.multiplier != 0


def verify_change_of_variables(T: EquivalenceTransform, f=None) -> ChangeOfVariablesReport:
    """Full chain-rule check that ``T`` maps the equation with ``f`` to the
    equation with the transformed element.

    With ``u = (w(T, X, Y) - phi) / M`` the original operator applied to ``u``
    must vanish once ``w`` satisfies the new equation and ``phi`` satisfies its
    constraint.  ``phi`` defaults to an undetermined function of (t, x).
    """
    f = function("f", x) if f is None else sp.sympify(f)
    phi = function("phi", t, x) if T.phi == 0 else T.phi
    pm = T.point_map()
    C = Composite({"T": pm["t"], "X": pm["x"], "Y": pm["y"]})
    M = T.multiplier()
    uu = (C.value - phi) / M

    def D(g, v):
        return C.d(g, v)

    R = D(uu, t) - x**2 * D(D(uu, x), x) - f * D(uu, y)
    R = sp.expand(R)
    mult = normalize(sp.diff(R, C.jet("T")))
    fbar = T.f_law(f)
    R = R.subs(C.jet("T"), pm["x"] ** 2 * C.jet("XX") + fbar * C.jet("Y"))
    if T.phi == 0:
        phi_t = sp.diff(phi, t)
        R = R.subs(phi_t, x**2 * sp.diff(phi, x, 2) + (1 - T.eps1) * x * sp.diff(phi, x))
        phi_res = sp.Integer(0)
    else:
        phi_res = T.phi_residual()
    return ChangeOfVariablesReport(normalize(R), mult, phi_res)


def verify_solution_transport(T: EquivalenceTransform, f, u_sol) -> sp.Expr:
    """Residual in the new equation of the image of a closed-form solution."""
    pm = T.point_map()
    ubar_old = T.multiplier() * sp.sympify(u_sol) + T.phi
    fbar_old = T.f_law(f)
    # derivatives in new variables via the inverse Jacobian of (t, x, y) -> (T, X, Y)
    J = sp.Matrix([[sp.diff(pm[a], b) for b in (t, x, y)] for a in ("t", "x", "y")])
    Jinv = J.inv()

    def d_new(g, k):
        return sum(Jinv[j, k] * sp.diff(g, v) for j, v in enumerate((t, x, y)))

    res = d_new(ubar_old, 0) - pm["x"] ** 2 * d_new(d_new(ubar_old, 1), 1) - fbar_old * d_new(ubar_old, 2)
    return normalize(res)


# ---------------------------------------------------------------------------
# canonical forms
# ---------------------------------------------------------------------------

@dataclass
class Canonicalization:
    family: FunctionFamily
    transform: EquivalenceTransform
    canonical: sp.Expr
    table_row: int
    law_residual: sp.Expr
    point_map_check: dict[str, sp.Expr]
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.law_residual == 0 and all(v == 0 for v in self.point_map_check.values())


def listed_map(fam: FunctionFamily) -> tuple[int, dict[str, sp.Expr], sp.Expr]:
    """The listed change of variables and the canonical element."""
    k1, k2, k3, n = fam.k1, fam.k2, fam.k3, fam.n
    if fam.tag == POWER:
        return 1, {
            "t": n**2 * t,
            "x": x**n,
            "y": n**2 / k1 * (k2 * t + y),
            "u": sp.exp((1 - n**2) * t / 4) * x ** ((n - 1) / 2),
        }, x
    if fam.tag in (LOG_POWER, LOG):
        return 2, {"t": t, "x": sp.exp(k2) * x, "y": (k3 * t + y) / k1, "u": sp.Integer(1)}, sp.log(x) ** n
    if fam.tag == LOG_LOG:
        return 3, {"t": t, "x": sp.exp(k2) * x, "y": (k3 * t + y) / k1, "u": sp.Integer(1)}, sp.log(sp.log(x))
    raise ReducibleFamily("reducible to two independent variables")


def canonicalize(fam: FunctionFamily | sp.Expr | str) -> Canonicalization:
    """Equivalence transformation bringing a family member to ``x``, ``ln^n x``
    or ``ln ln x``; both the point map and the element law are checked."""
    if not isinstance(fam, FunctionFamily):
        from ..symcore import parse
        fam = recognize(parse(fam) if isinstance(fam, str) else fam)
    if fam.tag == CONSTANT:
        raise ReducibleFamily("reducible to two independent variables")
    if fam.tag == GENERIC:
        raise ValueError("f is not in a family with extended symmetry")
    k1, k2, k3, n = fam.k1, fam.k2, fam.k3, fam.n
    row, listed, canon = listed_map(fam)
    if fam.tag == POWER:
        T = EquivalenceTransform(eps1=n, eps3=1, eps4=n**2 * k2 / k1, eps5=n**2 / k1)
    else:
        T = EquivalenceTransform(eps1=1, eps3=sp.exp(k2), eps4=k3 / k1, eps5=1 / k1)
    pm = T.point_map()
    check = {v: normalize(pm[v] - listed[v]) for v in ("t", "x", "y")}
    check["u"] = normalize(T.multiplier() - listed["u"])
    fbar_old = T.f_law(fam.expr())
    law = normalize(fbar_old - canon.xreplace({x: pm["x"]}))
    notes = ["the y' coefficient written a_5 is read as eps5"]
    return Canonicalization(fam, T, canon, row, law, check, notes)


CANONICAL_FORMS = {
    "x": x,
    "ln^n x": None,  # filled per n
    "ln ln x": sp.log(sp.log(x)),
}


# ---------------------------------------------------------------------------
# bounded numerical search for equivalences between canonical forms
# ---------------------------------------------------------------------------

@dataclass
class SearchResult:
    source: str
    target: str
    best_residual: float
    best_params: tuple[float, ...]
    starts: int
    bounds: dict[str, tuple[float, float]]

    def equivalent(self, tol: float) -> bool:
        return self.best_residual <= tol


SEARCH_BOUNDS = {"eps1": (-4.0, 4.0), "log_eps3": (-3.0, 3.0), "eps4": (-20.0, 20.0), "eps5": (-20.0, 20.0)}


def search_equivalence(source, target, *, starts: int = 40, seed: int = 0,
                       xgrid=None, bounds=None) -> SearchResult:
    """Minimize the relative mismatch ``|apply(T, source) - target|`` over the
    parameters (e1, e3, e4, e5) that act on ``f``, from random starts in a
    bounded box.  Small ``|e1|`` is excluded (it lies below 0.2)."""
    bounds = dict(SEARCH_BOUNDS if bounds is None else bounds)
    src = sp.lambdify(x, sp.sympify(source), "numpy")
    tgt = sp.lambdify(x, sp.sympify(target), "numpy")
    X = np.linspace(1.5, 6.0, 40) if xgrid is None else np.asarray(xgrid, float)
    target_vals = np.broadcast_to(np.asarray(tgt(X), float), X.shape)
    scale = np.linalg.norm(target_vals - target_vals.mean()) or 1.0

    def resid(p):
        e1, le3, e4, e5 = p
        xs = (X / np.exp(le3)) ** (1.0 / e1)
        with np.errstate(all="ignore"):
            vals = (e5 * np.broadcast_to(np.asarray(src(xs), float), X.shape) - e4) / e1**2
        r = (vals - target_vals) / scale
        return np.where(np.isfinite(r), r, 1e6)

    rng = np.random.default_rng(seed)
    names = ("eps1", "log_eps3", "eps4", "eps5")
    best = (np.inf, ())
    for k in range(starts):
        sign = 1.0 if k % 2 == 0 else -1.0
        lo, hi = bounds["eps1"]
        lo1, hi1 = (0.2, hi) if sign > 0 else (lo, -0.2)
        box_lo = [lo1] + [bounds[n][0] for n in names[1:]]
        box_hi = [hi1] + [bounds[n][1] for n in names[1:]]
        p0 = rng.uniform(box_lo, box_hi)
        try:
            sol = least_squares(resid, p0, bounds=(box_lo, box_hi), xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except ValueError:
            continue
        val = float(np.linalg.norm(sol.fun))
        if val < best[0]:
            best = (val, tuple(float(v) for v in sol.x))
    return SearchResult(str(source), str(target), best[0], best[1], starts, bounds)
