"""Chain rule for a function composed with a change of variables.

Used where an unknown function ``w`` of new variables is written in old
coordinates: ``u(t, x, y) = A(t, x, y) * w(z1(t,x,y), z2(...), ...)``.  The
derivatives of ``w`` at the image point are jet symbols ``w``, ``w_s``,
``w_ss`` ... indexed by the (single-letter) names of the new variables.
"""

from __future__ import annotations

import sympy as sp


class Composite:
    def __init__(self, inner: dict[str, sp.Expr], name: str = "w"):
        for key in inner:
            if len(key) != 1:
                raise ValueError("new variable names must be single characters")
        self.inner = {k: sp.sympify(v) for k, v in inner.items()}
        self.order = list(self.inner)
        self.name = name
        self._syms: dict[str, sp.Symbol] = {}
        self._index: dict[sp.Symbol, str] = {}

    def jet(self, index: str = "") -> sp.Symbol:
        key = "".join(sorted(index, key=self.order.index))
        sym = self._syms.get(key)
        if sym is None:
            sym = sp.Symbol(f"{self.name}_{key}" if key else self.name, real=True)
            self._syms[key] = sym
            self._index[sym] = key
        return sym

    @property
    def value(self) -> sp.Symbol:
        return self.jet("")

    def d(self, g, v: sp.Symbol) -> sp.Expr:
        """Derivative with respect to old variable ``v`` of an expression in
        old variables and jets of ``w``."""
        g = sp.sympify(g)
        out = sp.diff(g, v)
        speeds = {k: sp.diff(z, v) for k, z in self.inner.items()}
        for s in sorted(g.free_symbols & set(self._index), key=lambda s: s.name):
            coeff = sp.diff(g, s)
            if coeff == 0:
                continue
            idx = self._index[s]
            for k, speed in speeds.items():
                if speed != 0:
                    out += coeff * speed * self.jet(idx + k)
        return out
