"""Families of the arbitrary element and the classifying ODE

    f' + a1/((a2 ln x + a3) x) f = a4/((a2 ln x + a3) x).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.integrate import solve_ivp

from ..symcore import is_zero, normalize, param, parse, x

POWER = "power"
LOG_POWER = "log-power"
LOG = "log"
LOG_LOG = "log-log"
CONSTANT = "constant"
GENERIC = "generic"


class DegenerateODE(ValueError):
    pass


@dataclass(frozen=True)
class FunctionFamily:
    """``k1*x^n + k2``, ``k1*(ln x + k2)^n + k3`` (tag ``log`` when n = 1),
    ``k1*ln(ln x + k2) + k3``, a constant, or ``generic`` (none of these)."""

    tag: str
    k1: sp.Expr = sp.Integer(0)
    k2: sp.Expr = sp.Integer(0)
    k3: sp.Expr = sp.Integer(0)
    n: sp.Expr = sp.Integer(0)
    source: sp.Expr | None = None
    branch: int | None = None

    def expr(self) -> sp.Expr:
        L = sp.log(x)
        if self.tag == POWER:
            return self.k1 * x**self.n + self.k2
        if self.tag in (LOG_POWER, LOG):
            return self.k1 * (L + self.k2) ** self.n + self.k3
        if self.tag == LOG_LOG:
            return self.k1 * sp.log(L + self.k2) + self.k3
        if self.tag == CONSTANT:
            return self.k1
        if self.source is None:
            raise ValueError("generic family without a source expression")
        return self.source

    def params(self) -> dict[str, sp.Expr]:
        if self.tag == POWER:
            return {"k1": self.k1, "n": self.n, "k2": self.k2}
        if self.tag in (LOG_POWER, LOG):
            return {"k1": self.k1, "k2": self.k2, "n": self.n, "k3": self.k3}
        if self.tag == LOG_LOG:
            return {"k1": self.k1, "k2": self.k2, "k3": self.k3}
        return {}


def symbolic_family(tag: str) -> FunctionFamily:
    """Family with free parameters ``k1, k2, k3, n``."""
    k1, k2, k3, n = (param(s) for s in ("k1", "k2", "k3", "n"))
    if tag == POWER:
        return FunctionFamily(tag, k1=k1, k2=k2, n=n)
    if tag == LOG:
        return FunctionFamily(tag, k1=k1, k2=k2, k3=k3, n=sp.Integer(1))
    if tag == LOG_LOG:
        return FunctionFamily(tag, k1=k1, k2=k2, k3=k3)
    if tag == LOG_POWER:
        return FunctionFamily(tag, k1=k1, k2=k2, k3=k3, n=n)
    raise ValueError(f"no symbolic form for tag {tag!r}")


# ---------------------------------------------------------------------------
# the classifying ODE
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassifyingODE:
    a1: sp.Expr
    a2: sp.Expr
    a3: sp.Expr
    a4: sp.Expr

    def __post_init__(self):
        for k in ("a1", "a2", "a3", "a4"):
            object.__setattr__(self, k, sp.sympify(getattr(self, k)))
        if self.a2 == 0 and self.a3 == 0:
            raise DegenerateODE("degenerate ODE: a2 and a3 both vanish")

    def residual(self, f) -> sp.Expr:
        den = (self.a2 * sp.log(x) + self.a3) * x
        return normalize(sp.diff(f, x) + self.a1 / den * f - self.a4 / den)

    def rhs(self):
        """Numerical right-hand side ``f'(x) = g(x, f)``."""
        a1, a2, a3, a4 = (float(v) for v in (self.a1, self.a2, self.a3, self.a4))

        def g(xv, f):
            den = (a2 * np.log(xv) + a3) * xv
            return (a4 - a1 * f) / den
        return g


def solve_classifying_ode(ode: ClassifyingODE, C=None) -> list[FunctionFamily]:
    """Closed-form non-constant solutions of the classifying ODE.

    A coefficient counts as vanishing only if it is literally zero; every
    other coefficient (including free parameters) is taken to be nonzero.
    Returns an empty list when only constant solutions exist.
    """
    a1, a2, a3, a4 = ode.a1, ode.a2, ode.a3, ode.a4
    C = param("C") if C is None else sp.sympify(C)
    L = sp.log(x)
    z1, z2, z3, z4 = (a == 0 for a in (a1, a2, a3, a4))
    if z1 and z2 and z3 and z4:
        raise DegenerateODE("degenerate ODE: all coefficients vanish")
    if not z1 and z2:
        raw = C * x ** (-a1 / a3) + a4 / a1
        fam = FunctionFamily(POWER, k1=C, n=-a1 / a3, k2=a4 / a1, source=raw, branch=1)
    elif not z1 and not z2:
        n = -a1 / a2
        raw = C * (a2 * L + a3) ** n + a4 / a1
        fam = FunctionFamily(LOG_POWER, k1=C * a2**n, k2=a3 / a2, n=n, k3=a4 / a1, source=raw, branch=2)
    elif z1 and z2 and not z4:
        raw = a4 / a3 * L + C
        fam = FunctionFamily(LOG, k1=a4 / a3, k2=sp.Integer(0), n=sp.Integer(1), k3=C, source=raw, branch=3)
    elif z1 and not z2 and not z4:
        raw = a4 / a2 * sp.log(a2 * L + a3) + C
        fam = FunctionFamily(LOG_LOG, k1=a4 / a2, k2=a3 / a2, k3=C + a4 / a2 * sp.log(a2), source=raw, branch=4)
    else:
        return []
    return [fam]


def all_branches() -> list[tuple[ClassifyingODE, FunctionFamily]]:
    """One symbolic representative per solution branch."""
    a1, a2, a3, a4 = (param(f"a{i}") for i in range(1, 5))
    odes = [
        ClassifyingODE(a1, 0, a3, a4),
        ClassifyingODE(a1, a2, a3, a4),
        ClassifyingODE(0, 0, a3, a4),
        ClassifyingODE(0, a2, a3, a4),
    ]
    return [(ode, solve_classifying_ode(ode)[0]) for ode in odes]


def integrate_numerically(ode: ClassifyingODE, f0: float, xs, x0: float = 1.0) -> np.ndarray:
    """Reference solution by high-accuracy numerical integration."""
    xs = np.asarray(xs, dtype=float)
    sol = solve_ivp(lambda xv, f: ode.rhs()(xv, f), (x0, float(xs.max())), [f0],
                    method="DOP853", rtol=1e-13, atol=1e-14, t_eval=xs, dense_output=False)
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[0]


# ---------------------------------------------------------------------------
# recognition of a concrete f
# ---------------------------------------------------------------------------

_z = sp.Symbol("__z", real=True)


def _in_z(f: sp.Expr) -> sp.Expr:
    """``f(e^z)`` in normal form."""
    g = sp.sympify(f).xreplace({sp.log(x): _z})
    return normalize(g.xreplace({x: sp.exp(_z)}))


def _free_of_z(e: sp.Expr) -> bool:
    return not normalize(e).has(_z)


def recognize(f) -> FunctionFamily:
    """Identify which family a concrete (or parametric) ``f(x)`` belongs to.

    Strings are parsed with the symcore grammar."""
    f = parse(f) if isinstance(f, str) else sp.sympify(f)
    F = _in_z(f)
    if _free_of_z(F):
        return FunctionFamily(CONSTANT, k1=normalize(f), source=f)
    F1 = normalize(sp.diff(F, _z))
    F2 = normalize(sp.diff(F1, _z))

    # exponential in z: k1*x^n + k2
    if F2 != 0:
        rate = normalize(F2 / F1)
        if _free_of_z(rate) and rate != 0:
            n = rate
            k1 = normalize(F1 * sp.exp(-n * _z) / n)
            k2 = normalize(F - k1 * sp.exp(n * _z))
            if _free_of_z(k1) and _free_of_z(k2):
                return FunctionFamily(POWER, k1=k1, n=n, k2=k2, source=f)

    if F2 == 0:
        k1 = F1
        k3 = normalize(F - k1 * _z)
        if _free_of_z(k1) and _free_of_z(k3):
            return FunctionFamily(LOG, k1=k1, k2=sp.Integer(0), n=sp.Integer(1), k3=k3, source=f)
        return FunctionFamily(GENERIC, source=f)

    q = normalize(F1 / F2)
    dq = normalize(sp.diff(q, _z))
    if not _free_of_z(dq) or dq == 0:
        return FunctionFamily(GENERIC, source=f)
    n = normalize(1 / dq + 1)
    if n == 0:
        k2 = normalize(-q - _z)
        k1 = normalize(F1 * (_z + k2))
        k3 = normalize(F - k1 * sp.log(_z + k2))
        if all(_free_of_z(v) for v in (k1, k2, k3)):
            return FunctionFamily(LOG_LOG, k1=k1, k2=k2, k3=k3, source=f)
        return FunctionFamily(GENERIC, source=f)
    k2 = normalize((n - 1) * q - _z)
    k1 = normalize(F1 / (n * (_z + k2) ** (n - 1)))
    k3 = normalize(F - k1 * (_z + k2) ** n)
    if all(_free_of_z(v) for v in (k1, k2, k3)):
        return FunctionFamily(LOG if n == 1 else LOG_POWER, k1=k1, k2=k2, n=n, k3=k3, source=f)
    return FunctionFamily(GENERIC, source=f)


def family_matches(fam: FunctionFamily, f) -> bool:
    return bool(is_zero(fam.expr() - sp.sympify(f)))
