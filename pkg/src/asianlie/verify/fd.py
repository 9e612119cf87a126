"""Finite differences for ``u_t = x^2 u_xx + f(x) u_y`` in the chart z = ln x,
where the equation reads ``u_t = u_zz - u_z + f(e^z) u_y``.

Crank-Nicolson in z, explicit first-order upwind in y (direction chosen per
row by the sign of f), Dirichlet data on the z-boundaries and on the inflow
side in y.  All time levels are kept.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sp

from ..symcore import t as T_SYM
from ..symcore import x as X_SYM
from ..symcore import y as Y_SYM
from . import kernels


class StabilityError(ValueError):
    pass


def _lambdify_f(f) -> Callable[[np.ndarray], np.ndarray]:
    f = sp.sympify(f)
    fn = sp.lambdify(X_SYM, f, "numpy")
    return lambda xs: np.broadcast_to(np.asarray(fn(xs), dtype=float), np.shape(xs)).copy()


@dataclass(frozen=True)
class Grid:
    x_lo: float = 0.5
    x_hi: float = 2.0
    y_lo: float = -1.0
    y_hi: float = 1.0
    t_end: float = 0.25
    nx: int = 41
    ny: int = 81
    nt: int = 200
    log_x: bool = True
    f_max: float | None = None

    def __post_init__(self):
        if self.x_lo <= 0 or self.x_hi <= self.x_lo:
            raise ValueError("need 0 < x_lo < x_hi")
        if self.y_hi <= self.y_lo or self.t_end <= 0:
            raise ValueError("empty y or t range")
        if min(self.nx, self.ny) < 3 or self.nt < 2:
            raise ValueError("grid too small")
        if not self.log_x:
            raise ValueError("only the log-x chart is implemented")
        if self.f_max is not None:
            self.check_stability(self.f_max)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(math.log(self.x_lo), math.log(self.x_hi), self.nx)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.z)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_lo, self.y_hi, self.ny)

    @property
    def t(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.nt + 1)

    @property
    def hz(self) -> float:
        return (math.log(self.x_hi) - math.log(self.x_lo)) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.y_hi - self.y_lo) / (self.ny - 1)

    @property
    def dt(self) -> float:
        return self.t_end / self.nt

    def min_steps(self, f_max: float) -> int:
        return int(math.ceil(self.t_end * f_max / self.hy))

    def check_stability(self, f_max: float) -> None:
        """Explicit upwind needs ``dt * max|f| <= hy``."""
        if self.dt * f_max > self.hy * (1 + 1e-12):
            raise StabilityError(
                f"unstable: dt*max|f| = {self.dt * f_max:.4g} exceeds hy = {self.hy:.4g}; "
                f"use nt >= {self.min_steps(f_max)}")

    def refined(self, *, nx: int | None = None, ny: int | None = None, nt: int | None = None) -> "Grid":
        from dataclasses import replace
        return replace(self, nx=nx or self.nx, ny=ny or self.ny, nt=nt or self.nt, f_max=None)

    def header(self) -> dict:
        return {"x_range": [self.x_lo, self.x_hi], "y_range": [self.y_lo, self.y_hi],
                "t_range": [0.0, self.t_end], "nx": self.nx, "ny": self.ny, "nt": self.nt,
                "chart": "z = ln x"}


@dataclass
class NumericalSolution:
    grid: Grid
    u: np.ndarray  # shape (nt+1, nx, ny)
    f_values: np.ndarray
    f_text: str
    scheme: str
    backend: str
    residual_norm: float
    residual_max: float
    source: np.ndarray | None = field(default=None, repr=False)

    def residual(self) -> np.ndarray:
        """Centered residual at interior nodes of interior time levels."""
        return interior_residual(self.u, self.f_values, self.grid, self.source)

    def recompute_norm(self) -> float:
        return _rms(self.residual())

    def header(self) -> dict:
        return {**self.grid.header(), "f": self.f_text, "scheme": self.scheme,
                "backend": self.backend, "residual_rms": self.residual_norm,
                "residual_max": self.residual_max, "format": "asianlie-grid/1"}

    def dump(self, path) -> None:
        """Self-describing binary dump (``numpy.savez`` with a JSON header)."""
        np.savez_compressed(path, header=json.dumps(self.header()), u=self.u,
                            t=self.grid.t, x=self.grid.x, y=self.grid.y)

    def csv_slice(self, level: int = -1) -> str:
        """CSV of one time level: columns x, y, u."""
        buf = io.StringIO()
        buf.write("x,y,u\n")
        X, Y = np.meshgrid(self.grid.x, self.grid.y, indexing="ij")
        for a, b, c in zip(X.ravel(), Y.ravel(), self.u[level].ravel()):
            buf.write(f"{a:.12g},{b:.12g},{c:.12g}\n")
        return buf.getvalue()


def load_dump(path) -> tuple[dict, np.ndarray]:
    with np.load(path) as data:
        return json.loads(str(data["header"])), data["u"]


def _rms(a: np.ndarray) -> float:
    return float(np.sqrt(np.mean(a**2))) if a.size else 0.0


def interior_residual(u: np.ndarray, f_values: np.ndarray, grid: Grid, source: np.ndarray | None = None) -> np.ndarray:
    nt = u.shape[0] - 1
    out = np.empty((nt - 1, grid.nx - 2, grid.ny - 2))
    zero = np.zeros(u.shape[1:])
    for n in range(1, nt):
        src = zero if source is None else source[n]
        out[n - 1] = kernels.residual(u[n - 1], u[n], u[n + 1], f_values, grid.hz, grid.hy, grid.dt, src)
    return out


def solve_fd(f, grid: Grid, initial: Callable, boundary: Callable | None = None,
             source: Callable | None = None, *, backend: str | None = None) -> NumericalSolution:
    """March the scheme from ``initial(x, y)``.

    ``boundary(t, x, y)`` supplies Dirichlet data (default: the initial data
    extended to first order in t so that it is compatible with the equation
    at the corners).  ``source(t, x, y)`` is added to the right-hand side.
    """
    fn = _lambdify_f(f)
    xs, ys = grid.x, grid.y
    fv = fn(xs)
    if not np.all(np.isfinite(fv)):
        raise ValueError("f is not finite on the x range")
    grid.check_stability(float(np.max(np.abs(fv))))
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    u0 = np.asarray(initial(X, Y), dtype=float) * np.ones_like(X)
    if boundary is None:
        boundary = _compatible_boundary(u0, fv, grid)
    step = kernels.step if backend in (None, kernels.BACKEND) else kernels.step_numpy
    used = kernels.BACKEND if backend in (None, kernels.BACKEND) else "numpy"
    U = np.empty((grid.nt + 1, grid.nx, grid.ny))
    U[0] = u0
    zero = np.zeros_like(u0)
    src_levels = None
    if source is not None:
        src_levels = np.stack([np.asarray(source(tn, X, Y), float) * np.ones_like(X) for tn in grid.t])
    for n in range(grid.nt):
        tn = grid.t[n]
        bc = np.asarray(boundary(tn + grid.dt, X, Y), dtype=float) * np.ones_like(X)
        if source is None:
            s = zero
        else:
            s = np.asarray(source(tn + 0.5 * grid.dt, X, Y), float) * np.ones_like(X)
        step(U[n], fv, grid.hz, grid.hy, grid.dt, s, bc, U[n + 1])
    res = interior_residual(U, fv, grid, src_levels)
    return NumericalSolution(grid, U, fv, str(f), "CN-z/upwind-y", used, _rms(res),
                             float(np.max(np.abs(res))) if res.size else 0.0, src_levels)


def _compatible_boundary(u0: np.ndarray, fv: np.ndarray, grid: Grid):
    """``u0 + t * (u0_zz - u0_z + f u0_y)`` with one-sided stencils at the edges."""
    z, y = grid.z, grid.y
    uz = np.gradient(u0, z, axis=0, edge_order=2)
    uzz = np.gradient(uz, z, axis=0, edge_order=2)
    uy = np.gradient(u0, y, axis=1, edge_order=2)
    rate = uzz - uz + fv[:, None] * uy

    def bc(tv, X, Y):
        return u0 + tv * rate
    return bc


# ---------------------------------------------------------------------------
# manufactured solution study
# ---------------------------------------------------------------------------

def manufactured(f, exact=None):
    """Exact field, source term and boundary data for a manufactured solution
    (default ``exp(-t) sin(ln x) cos(y)``)."""
    from ..symcore import normalize
    if exact is None:
        exact = sp.exp(-T_SYM) * sp.sin(sp.log(X_SYM)) * sp.cos(Y_SYM)
    f = sp.sympify(f)
    S = normalize(sp.diff(exact, T_SYM) - X_SYM**2 * sp.diff(exact, X_SYM, 2) - f * sp.diff(exact, Y_SYM))
    ex = sp.lambdify((T_SYM, X_SYM, Y_SYM), exact, "numpy")
    src = sp.lambdify((T_SYM, X_SYM, Y_SYM), S, "numpy")
    return ex, src, S


@dataclass
class ConvergenceStudy:
    axis: str
    steps: list[float]
    errors: list[float]
    orders: list[float]
    method: str

    @property
    def order(self) -> float:
        return self.orders[-1]


def _mms_error_field(f, grid: Grid):
    ex, src, _ = manufactured(f)
    sol = solve_fd(f, grid, lambda X, Y: ex(0.0, X, Y),
                   boundary=lambda tv, X, Y: ex(tv, X, Y), source=src)
    X, Y = np.meshgrid(grid.x, grid.y, indexing="ij")
    return sol.u[-1] - ex(grid.t_end, X, Y)


def convergence_x(f="x", base: Grid | None = None, levels=(11, 21, 41)) -> ConvergenceStudy:
    """Order in z from successive differences of error fields on the shared
    coarse nodes; the y and t contributions are identical on all three grids
    and cancel in the differences."""
    base = base or Grid(ny=161, nt=400, t_end=0.5)
    fields = [_mms_error_field(f, base.refined(nx=n)) for n in levels]
    stride = [(n - 1) // (levels[0] - 1) for n in levels]
    coarse = [e[::s] for e, s in zip(fields, stride)]
    d1 = float(np.max(np.abs(coarse[0] - coarse[1])))
    d2 = float(np.max(np.abs(coarse[1] - coarse[2])))
    hz = [base.refined(nx=n).hz for n in levels]
    order = math.log(d1 / d2) / math.log(hz[0] / hz[1])
    return ConvergenceStudy("x", hz, [float(np.max(np.abs(e))) for e in fields], [order],
                            "differences of error fields on shared nodes")


def convergence_y(f="x", base: Grid | None = None, levels=(21, 41, 81)) -> ConvergenceStudy:
    """Order in y with the time step tied to hy (fixed Courant number)."""
    base = base or Grid(nx=81, t_end=0.5)
    errs, hs = [], []
    fmax = float(np.max(np.abs(_lambdify_f(f)(base.x))))
    for n in levels:
        g = base.refined(ny=n, nt=2)
        g = g.refined(nt=2 * max(g.min_steps(fmax), 1))
        e = _mms_error_field(f, g)
        errs.append(float(np.max(np.abs(e))))
        hs.append(g.hy)
    orders = [math.log(errs[i] / errs[i + 1]) / math.log(hs[i] / hs[i + 1]) for i in range(len(errs) - 1)]
    return ConvergenceStudy("y", hs, errs, orders, "max-norm error at final time")


def solve_fd_richardson(f, grid: Grid, initial: Callable, boundary: Callable | None = None,
                        source: Callable | None = None) -> NumericalSolution:
    """Richardson combination ``2 u(hy/2, dt/2) - u(hy, dt)`` on the coarse
    nodes, cancelling the first-order upwind and splitting errors."""
    from dataclasses import replace
    coarse = solve_fd(f, grid, initial, boundary, source)
    fine_grid = grid.refined(ny=2 * grid.ny - 1, nt=2 * grid.nt)
    fine = solve_fd(f, fine_grid, initial, boundary, source)
    U = 2.0 * fine.u[::2, :, ::2] - coarse.u
    res = interior_residual(U, coarse.f_values, grid, coarse.source)
    return replace(coarse, u=U, scheme="CN-z/upwind-y, Richardson in (y, t)",
                   residual_norm=_rms(res), residual_max=float(np.max(np.abs(res))) if res.size else 0.0)
