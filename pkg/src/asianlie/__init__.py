"""Lie point symmetry classification for u_t = x^2 u_xx + f(x) u_y."""

__version__ = "0.1.0"
