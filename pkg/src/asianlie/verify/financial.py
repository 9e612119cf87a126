"""Point transformation between the Asian-option pricing equation

    V_tau + sigma^2/2 S^2 V_SS + r S V_S + f(S) V_A - r V = 0

and the canonical form ``u_t = x^2 u_xx + f(x) u_y`` via
``u(t, x, y) = x^m e^{q t} V(T - 2t/sigma^2, x, 2y/sigma^2)``,
``m = r/sigma^2``, ``q = m^2 + m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import sympy as sp

from ..symcore import Composite, function, normalize, param, t, x, y

TAU = sp.Symbol("tau", real=True)
S = sp.Symbol("S", positive=True)
A = sp.Symbol("A", real=True)


@dataclass(frozen=True)
class FinancialModel:
    r: sp.Expr = field(default_factory=lambda: param("r"))
    sigma: sp.Expr = field(default_factory=lambda: param("sigma"))
    T: sp.Expr = field(default_factory=lambda: param("T"))

    def __post_init__(self):
        for k in ("r", "sigma", "T"):
            object.__setattr__(self, k, sp.sympify(getattr(self, k)))
        if self.sigma.is_number and not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.T.is_number and not self.T > 0:
            raise ValueError("T must be positive")
        if self.sigma == 0:
            raise ValueError("sigma must be positive")

    @property
    def m(self) -> sp.Expr:
        return self.r / self.sigma**2

    @property
    def q(self) -> sp.Expr:
        return self.m**2 + self.m

    def tau_of(self, tt) -> sp.Expr:
        return self.T - 2 * tt / self.sigma**2

    def A_of(self, yy) -> sp.Expr:
        return 2 * yy / self.sigma**2

    def t_of(self, tau) -> sp.Expr:
        return self.sigma**2 * (self.T - tau) / 2

    def y_of(self, a) -> sp.Expr:
        return self.sigma**2 * a / 2


def pricing_operator(model: FinancialModel, V, f=None) -> sp.Expr:
    """Left-hand side of the pricing equation for ``V(tau, S, A)``."""
    f = function("f", S) if f is None else sp.sympify(f).xreplace({x: S})
    return (sp.diff(V, TAU) + model.sigma**2 / 2 * S**2 * sp.diff(V, S, 2)
            + model.r * S * sp.diff(V, S) + f * sp.diff(V, A) - model.r * V)


def to_canonical(model: FinancialModel, V) -> sp.Expr:
    """``u(t, x, y)`` from an expression ``V`` in (tau, S, A)."""
    V = sp.sympify(V)
    sub = {TAU: model.tau_of(t), S: x, A: model.A_of(y)}
    return normalize(x**model.m * sp.exp(model.q * t) * V.xreplace(sub))


def from_canonical(model: FinancialModel, u_expr) -> sp.Expr:
    """Inverse map: ``V(tau, S, A)`` from ``u`` in (t, x, y)."""
    u_expr = sp.sympify(u_expr)
    tt = model.t_of(TAU)
    sub = {t: tt, x: S, y: model.y_of(A)}
    return normalize(S ** (-model.m) * sp.exp(-model.q * tt) * u_expr.xreplace(sub))


@dataclass
class TransformReport:
    multiplier: sp.Expr
    expected_multiplier: sp.Expr
    residual: sp.Expr
    ux_coefficient: sp.Expr
    u_coefficient: sp.Expr
    ux_after: sp.Expr
    u_after: sp.Expr

    @property
    def passed(self) -> bool:
        return (self.residual == 0 and normalize(self.multiplier - self.expected_multiplier) == 0
                and self.ux_after == 0 and self.u_after == 0 and self.multiplier != 0)


def verify_transform(model: FinancialModel | None = None) -> TransformReport:
    """Chain-rule check with undetermined ``u`` and ``f``.

    ``V = S^{-m} e^{-q t} u(t, x, y)`` with t, x, y functions of (tau, S, A)
    is substituted into the pricing operator first with free ``m, q`` (to
    expose the ``u_x`` and ``u`` coefficients) and then with their values.
    """
    model = model or FinancialModel()
    mm, qq = param("m"), param("q")
    C = Composite({"t": model.t_of(TAU), "x": S, "y": model.y_of(A)}, name="u")
    tt = model.t_of(TAU)
    f = function("f", S)

    def op(mv, qv):
        V = S ** (-mv) * sp.exp(-qv * tt) * C.value

        def D(g, v, k=1):
            for _ in range(k):
                g = C.d(g, v)
            return g
        expr = (D(V, TAU) + model.sigma**2 / 2 * S**2 * D(V, S, 2) + model.r * S * D(V, S)
                + f * D(V, A) - model.r * V)
        return sp.expand(expr / (S ** (-mv) * sp.exp(-qv * tt)))

    free = op(mm, qq)
    ux = normalize(free.coeff(C.jet("x")))
    u0 = normalize(free.subs({C.jet(k): 0 for k in ("t", "x", "y", "xx")}).coeff(C.value))
    fixed = op(model.m, model.q)
    ux_after = normalize(fixed.coeff(C.jet("x")))
    u_after = normalize(fixed.subs({C.jet(k): 0 for k in ("t", "x", "y", "xx")}).coeff(C.value))
    canonical = C.jet("t") - S**2 * C.jet("xx") - f * C.jet("y")
    mult = normalize(fixed.coeff(C.jet("t")))
    residual = normalize(fixed - mult * canonical)
    prefactor = S ** (-model.m) * sp.exp(-model.q * tt)
    expected = -model.sigma**2 / 2
    return TransformReport(normalize(mult * prefactor), normalize(expected * prefactor), residual,
                           ux, u0, ux_after, u_after)
