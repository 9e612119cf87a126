"""One-parameter groups generated by vector fields.

The characteristic system ``dt/de = xi0, dx/de = xi1, dy/de = xi2,
du/de = eta`` is solved in closed form when every coefficient is affine in
its own variable with constant coefficients (translations, scalings and
their sums), and otherwise by vectorized RK4 in the chart z = ln x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import sympy as sp

from ..symcore import t, u, x, y
from ..symmetry import VectorField
from .kernels import rk4_numpy

CLOSED_FORM = "closed-form"
RK4 = "rk4"


def _affine_in(c: sp.Expr, v: sp.Symbol):
    """``(alpha, beta)`` with ``c = alpha + beta*v`` and constant alpha, beta."""
    c = sp.expand(c)
    beta = sp.diff(c, v)
    alpha = sp.expand(c - beta * v)
    if beta.free_symbols & {t, x, y, u} or alpha.free_symbols & {t, x, y, u}:
        return None
    if beta.free_symbols or alpha.free_symbols:
        return None
    return float(alpha), float(beta)


def _affine_solution(v0, alpha, beta, eps):
    if beta == 0.0:
        return v0 + alpha * eps
    g = np.exp(beta * eps)
    return v0 * g + alpha * (g - 1.0) / beta


def _u_affine(X: VectorField):
    """``eta = a(t, x, y) * u + b(t, x, y)`` or None."""
    eta = sp.expand(X.eta)
    a = sp.diff(eta, u)
    b = sp.expand(eta - a * u)
    if a.has(u) or b.has(u):
        return None
    return a, b


@dataclass
class Flow:
    field: VectorField
    epsilon: float
    method: str
    steps: int = 0

    def __call__(self, tt, xx, yy, uu):
        """Image of points (t, x, y, u) under the time-epsilon map."""
        tt, xx, yy, uu = (np.asarray(a, dtype=float) for a in np.broadcast_arrays(tt, xx, yy, uu))
        if self.method == CLOSED_FORM:
            return _closed(self.field, self.epsilon, tt, xx, yy, uu)
        t0, z0, y0, m, n = _integrate(self.field, self.epsilon, tt, np.log(xx), yy, self.steps)
        return t0, np.exp(z0), y0, m * uu + n

    def pullback(self, tt, zz, yy):
        """Preimage ``p0`` of target points given in (t, z, y) and the affine
        u-map ``u_new = M*u(p0) + N``."""
        tt, zz, yy = (np.asarray(a, dtype=float) for a in np.broadcast_arrays(tt, zz, yy))
        if self.method == CLOSED_FORM:
            back = _closed(self.field, -self.epsilon, tt, np.exp(zz), yy, np.zeros_like(tt))
            one = _closed(self.field, -self.epsilon, tt, np.exp(zz), yy, np.ones_like(tt))
            # backward u-map is affine: u0 = A*u_new + B; invert it
            B = back[3]
            A = one[3] - B
            return back[0], np.log(back[1]), back[2], 1.0 / A, -B / A
        t0, z0, y0, m, n = _integrate(self.field, -self.epsilon, tt, zz, yy, self.steps, reverse_affine=True)
        return t0, z0, y0, m, n


def flow(X: VectorField, epsilon: float, steps: int | None = None) -> Flow:
    """The time-``epsilon`` map of ``X``, with the solution method tagged."""
    parts = [_affine_in(c, v) for c, v in zip(X.coefficients, (t, x, y, u))]
    if all(p is not None for p in parts):
        return Flow(X, float(epsilon), CLOSED_FORM)
    if _u_affine(X) is None:
        raise ValueError("eta must be affine in u")
    n = steps if steps is not None else max(16, int(np.ceil(abs(epsilon) / 0.005)))
    return Flow(X, float(epsilon), RK4, n)


def _closed(X, eps, tt, xx, yy, uu):
    parts = [_affine_in(c, v) for c, v in zip(X.coefficients, (t, x, y, u))]
    return tuple(_affine_solution(v, a, b, eps) for v, (a, b) in zip((tt, xx, yy, uu), parts))


_CACHE: dict = {}


def _compiled(X: VectorField):
    key = X.coefficients
    if key not in _CACHE:
        a, b = _u_affine(X)
        z = sp.Symbol("z", real=True)
        sub = {x: sp.exp(z)}
        comps = [X.xi0, X.xi1 / x, X.xi2, a, b]
        funcs = [sp.lambdify((t, z, y), sp.sympify(c).xreplace(sub), "numpy") for c in comps]
        _CACHE[key] = funcs
    return _CACHE[key]


def _integrate(X, eps, tt, zz, yy, steps, reverse_affine=False):
    """RK4 on (t, z, y) with the affine u-map.

    Forward (``reverse_affine=False``): ``m, n`` solve ``m' = a m, n' = a n + b``
    from (1, 0), so the final ``u = m*u0 + n``.
    Pullback (``reverse_affine=True``, called with the negated parameter):
    integrates from the target back to the preimage and accumulates
    ``m' = a m, n' = m b`` (signed as the forward map), giving
    ``u_target = m*u(p0) + n``.
    """
    f0, f1, f2, fa, fb = _compiled(X)
    shape = tt.shape
    state = np.stack([tt.ravel(), zz.ravel(), yy.ravel(), np.ones(tt.size), np.zeros(tt.size)])

    def val(fn, s):
        return np.broadcast_to(np.asarray(fn(s[0], s[1], s[2]), dtype=float), s[0].shape)

    sgn = 1.0 if eps >= 0 else -1.0

    def rhs(s):
        a = val(fa, s)
        b = val(fb, s)
        base = [sgn * val(f0, s), sgn * val(f1, s), sgn * val(f2, s)]
        if reverse_affine:
            # the path runs from the target back to the preimage; m, n
            # accumulate the weights of the forward map (hence -sgn)
            return np.stack(base + [-sgn * a * s[3], -sgn * s[3] * b])
        return np.stack(base + [sgn * a * s[3], sgn * (a * s[4] + b)])

    out = rk4_numpy(rhs, state, abs(eps) / steps, steps)
    return tuple(c.reshape(shape) for c in out)
