"""Infix text grammar for expressions (version 1).

::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := "-" unary | "+" unary | power
    power   := atom ("^" unary)?              # right associative, binds tighter than unary minus
    atom    := NUMBER | NAME | NAME "(" args ")" | "(" expr ")"
    args    := expr ("," expr)*

* ``t``, ``x``, ``y``, ``u`` are the base variables; ``u_xx``, ``u_ty`` ... are jets.
* ``ln``/``log``, ``exp``, ``sqrt``, ``sin``, ``cos`` are the built-in functions;
  ``diff(F(t, y), t, y)`` is the derivative of an undetermined function.
* ``E`` is Euler's number; any other ``NAME(...)`` is an undetermined function.
* Every other name is a real parameter.  Decimal literals are read exactly.

``**`` is accepted as a synonym for ``^``.  ``serialize`` emits text that
parses back to the identical expression.
"""

from __future__ import annotations

import re

import sympy as sp
from sympy.printing.str import StrPrinter

from .expr import jet, param, t, u, x, y

GRAMMAR_VERSION = 1

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z_][A-Za-z0-9_]*)|(\*\*|[-+*/^(),]))")
_BASE = {"t": t, "x": x, "y": y, "u": u}
_BUILTIN = {"ln": sp.log, "log": sp.log, "exp": sp.exp, "sqrt": sp.sqrt, "sin": sp.sin, "cos": sp.cos}


class ParseError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ParseError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        num, name, op = m.groups()
        if num is not None:
            out.append(("num", num))
        elif name is not None:
            out.append(("name", name))
        else:
            out.append(("op", "^" if op == "**" else op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        tok = self.peek()
        if tok[0] is None or (value is not None and tok[1] != value):
            raise ParseError(f"expected {value or 'token'} at token {self.i}, got {tok[1]!r}")
        self.i += 1
        return tok

    def parse(self):
        e = self.expr()
        if self.peek()[0] is not None:
            raise ParseError(f"trailing input at token {self.i}: {self.peek()[1]!r}")
        return e

    def expr(self):
        e = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            e = e + rhs if op == "+" else e - rhs
        return e

    def term(self):
        e = self.unary()
        while self.peek() in (("op", "*"), ("op", "/")):
            op = self.take()[1]
            rhs = self.unary()
            e = e * rhs if op == "*" else e / rhs
        return e

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return -self.unary()
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            return sp.Pow(base, self.unary())
        return base

    def args(self):
        self.take("(")
        out = [self.expr()]
        while self.peek() == ("op", ","):
            self.take()
            out.append(self.expr())
        self.take(")")
        return out

    def atom(self):
        kind, val = self.peek()
        if kind == "num":
            self.take()
            return sp.Rational(val)
        if kind == "op" and val == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind != "name":
            raise ParseError("unexpected end of input" if val is None else f"unexpected token {val!r}")
        self.take()
        if self.peek() == ("op", "("):
            args = self.args()
            if val == "diff":
                target, *wrt = args
                if not wrt or not all(isinstance(w, sp.Symbol) for w in wrt):
                    raise ParseError("diff needs symbol arguments")
                return sp.Derivative(target, *wrt)
            if val in _BUILTIN:
                if len(args) != 1:
                    raise ParseError(f"{val} takes one argument")
                return _BUILTIN[val](args[0])
            return sp.Function(val)(*args)
        if val in _BASE:
            return _BASE[val]
        if val == "E":
            return sp.E
        if val.startswith("u_") and val[2:] and set(val[2:]) <= set("txy"):
            return jet(val[2:])
        return param(val)


def parse(text: str) -> sp.Expr:
    """Parse grammar text into an expression."""
    return _Parser(text).parse()


class _Printer(StrPrinter):
    def _print_log(self, expr):
        return f"ln({self._print(expr.args[0])})"

    def _print_Exp1(self, expr):
        return "E"

    def _print_Derivative(self, expr):
        wrt = []
        for v, k in expr.variable_count:
            wrt.extend([self._print(v)] * int(k))
        return f"diff({self._print(expr.expr)}, {', '.join(wrt)})"

    def _print_Pow(self, expr, rational=False):
        return super()._print_Pow(expr, rational).replace("**", "^")


def serialize(e) -> str:
    """Grammar text for ``e``."""
    return _Printer({"order": None}).doprint(sp.sympify(e)).replace("**", "^")
