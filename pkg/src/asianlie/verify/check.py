"""Numerical symmetry oracle: push a computed solution through a flow and
measure the equation residual of the image.

The image ``u_new(p) = M(p) * u(p0) + N(p)`` with ``p0`` the preimage of the
grid node ``p`` is built from a bicubic (z, y) interpolant, cubic in t.  Its
centered residual is compared against a discretization estimate: the larger
of the residual of the solution itself and of an exact (off-grid) translate
in y, both over the region the preimages sample.  The check passes if the
ratio stays below ``K`` (default 10) for every epsilon of the sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from ..symmetry import VectorField
from .fd import Grid, NumericalSolution, solve_fd, solve_fd_richardson
from .flow import flow
from .kernels import residual_numpy

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"

DEFAULT_K = 10.0
DEFAULT_SWEEP = (0.025, 0.05, 0.1)
MIN_OVERLAP = 0.25


@dataclass
class EpsilonResult:
    epsilon: float
    residual: float
    estimate: float
    overlap: float
    method: str

    @property
    def ratio(self) -> float:
        return self.residual / self.estimate if self.estimate > 0 else float("inf")


@dataclass
class SymmetryCheck:
    field: str
    f: str
    K: float
    results: list[EpsilonResult] = field(default_factory=list)
    status: str = INCONCLUSIVE
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "generator": self.field, "f": self.f, "K": self.K, "status": self.status, "note": self.note,
            "sweep": [{"epsilon": r.epsilon, "residual": r.residual, "estimate": r.estimate,
                       "ratio": r.ratio, "overlap": r.overlap, "flow": r.method} for r in self.results],
        }


class _Interpolant:
    def __init__(self, sol: NumericalSolution):
        self.sol = sol
        g = sol.grid
        self.z, self.y, self.t = g.z, g.y, g.t
        self._splines: dict[int, RectBivariateSpline] = {}

    def spline(self, k: int) -> RectBivariateSpline:
        s = self._splines.get(k)
        if s is None:
            s = RectBivariateSpline(self.z, self.y, self.sol.u[k], kx=3, ky=3)
            self._splines[k] = s
        return s

    def __call__(self, tt, zz, yy) -> np.ndarray:
        """Cubic Lagrange in t through the four nearest levels."""
        g = self.sol.grid
        pos = np.clip(tt / g.dt, 0, g.nt)
        k = np.clip(np.floor(pos).astype(int) - 1, 0, g.nt - 3)
        s = pos - k
        nodes = np.arange(4.0)
        out = np.zeros_like(tt)
        for kk in np.unique(k):
            sel = k == kk
            ss = s[sel]
            for j in range(4):
                w = np.ones_like(ss)
                for m in range(4):
                    if m != j:
                        w *= (ss - nodes[m]) / (nodes[j] - nodes[m])
                out[sel] += w * self.spline(kk + j).ev(zz[sel], yy[sel])
        return out


@dataclass(frozen=True)
class Region:
    """Box (t, z, y) that preimages must stay in and where residuals count."""

    t: tuple[float, float]
    z: tuple[float, float]
    y: tuple[float, float]

    def contains(self, tt, zz, yy) -> np.ndarray:
        return ((tt >= self.t[0]) & (tt <= self.t[1]) & (zz >= self.z[0]) & (zz <= self.z[1])
                & (yy >= self.y[0]) & (yy <= self.y[1]))


def _residual_field(U: np.ndarray, sol: NumericalSolution) -> np.ndarray:
    g = sol.grid
    zero = np.zeros(U.shape[1:])
    out = np.full(U.shape, np.nan)
    for n in range(1, g.nt):
        out[n, 1:-1, 1:-1] = residual_numpy(U[n - 1], U[n], U[n + 1], sol.f_values, g.hz, g.hy, g.dt, zero)
    return out


def _nodes(sol: NumericalSolution):
    g = sol.grid
    return np.meshgrid(g.t, g.z, g.y, indexing="ij")


def _block(sol: NumericalSolution, region: Region):
    """Index slices covering the region plus one node of stencil padding."""
    g = sol.grid
    out = []
    for axis, (lo, hi) in zip((g.t, g.z, g.y), (region.t, region.z, region.y)):
        a = max(int(np.searchsorted(axis, lo)) - 1, 0)
        b = min(int(np.searchsorted(axis, hi, side="right")) + 1, axis.size)
        out.append(slice(a, b))
    return tuple(out)


def transformed_field(X: VectorField, sol: NumericalSolution, epsilon: float, region: Region):
    """Image of ``sol`` on its own nodes (NaN where the preimage leaves the
    region or the node is too far from it to matter)."""
    g = sol.grid
    blk = _block(sol, region)
    T, Z, Y = np.meshgrid(g.t[blk[0]], g.z[blk[1]], g.y[blk[2]], indexing="ij")
    fl = flow(X, epsilon)
    t0, z0, y0, M, N = fl.pullback(T, Z, Y)
    ok = region.contains(t0, z0, y0)
    sub = np.full(T.shape, np.nan)
    sub[ok] = M[ok] * _Interpolant(sol)(t0[ok], z0[ok], y0[ok]) + N[ok]
    out = np.full(sol.u.shape, np.nan)
    out[blk] = sub
    return out, fl.method


def discretization_estimate(sol: NumericalSolution, region: Region) -> float:
    T, Z, Y = _nodes(sol)
    R = _residual_field(sol.u, sol)
    inside = region.contains(T, Z, Y) & np.isfinite(R)
    own = float(np.max(np.abs(R[inside])))
    delta = 0.37 * sol.grid.hy
    shifted, _ = transformed_field(VectorField(xi2=1), sol, delta, region)
    Rs = _residual_field(shifted, sol)
    fin = np.isfinite(Rs)
    trans = float(np.max(np.abs(Rs[fin]))) if fin.any() else 0.0
    return max(own, trans)


def check_symmetry_numerically(X: VectorField, f, sol: NumericalSolution, epsilon=DEFAULT_SWEEP, *,
                               K: float = DEFAULT_K, region: Region | None = None,
                               estimate: float | None = None) -> SymmetryCheck:
    """Pass/fail/inconclusive verdict for ``X`` as a symmetry with element ``f``.

    ``sol`` must be a solution computed with the same ``f``.
    """
    region = region or default_region(sol)
    eps_list = [epsilon] if np.isscalar(epsilon) else list(epsilon)
    est = discretization_estimate(sol, region) if estimate is None else estimate
    report = SymmetryCheck(X.to_text(), str(f), K)
    T, Z, Y = _nodes(sol)
    target = region.contains(T, Z, Y)
    for eps in eps_list:
        field_, method = transformed_field(X, sol, eps, region)
        R = _residual_field(field_, sol)
        fin = np.isfinite(R)
        overlap = float(fin.sum() / max(target.sum(), 1))
        res = float(np.max(np.abs(R[fin]))) if fin.any() else float("nan")
        report.results.append(EpsilonResult(float(eps), res, est, overlap, method))
    if any(r.overlap < MIN_OVERLAP for r in report.results):
        report.status = INCONCLUSIVE
        report.note = f"overlap below {MIN_OVERLAP:.0%} of the sampled region"
    elif all(r.ratio <= K for r in report.results):
        report.status = PASS
    else:
        report.status = FAIL
    return report


# ---------------------------------------------------------------------------
# default experiment
# ---------------------------------------------------------------------------

def default_initial(X, Y):
    """Smooth data varying in both directions (artifact convention)."""
    Z = np.log(X)
    return np.exp(-2.0 * (Z - 0.1) ** 2) * (1.0 + 0.5 * np.sin(1.3 * Y + 0.4)) + 0.3 * Y * Z


def _f_bounds(f, x_lo: float, x_hi: float) -> tuple[float, float]:
    import sympy as sp

    from ..symcore import x as xs
    fn = sp.lambdify(xs, sp.sympify(f), "numpy")
    with np.errstate(all="ignore"):
        vals = np.asarray(fn(np.linspace(x_lo, x_hi, 401)), dtype=float) * np.ones(401)
    return float(np.min(vals)), float(np.max(vals))


def default_x_range(f) -> tuple[float, float]:
    """[1/2, 2] unless f is singular or undefined there, else [3/2, 6]."""
    lo, hi = _f_bounds(f, 0.5, 2.0)
    if np.isfinite(lo) and np.isfinite(hi) and max(abs(lo), abs(hi)) < 1e3:
        return 0.5, 2.0
    return 1.5, 6.0


CORE_Y = (-1.0, 1.0)
T_END = 0.25


def default_grid(f, *, nx: int = 41, hy: float = 0.0125, t_end: float = T_END, core_y=CORE_Y) -> Grid:
    """Grid whose y-range extends the core range on each inflow side by the
    distance boundary data travel in time ``t_end``, so the core is
    unaffected by the (artificial) inflow data."""
    x_lo, x_hi = default_x_range(f)
    fmin, fmax = _f_bounds(f, x_lo, x_hi)
    pad = 0.1 * (core_y[1] - core_y[0])
    y_lo = core_y[0] - max(-fmin, 0.0) * t_end - pad
    y_hi = core_y[1] + max(fmax, 0.0) * t_end + pad
    ny = int(round((y_hi - y_lo) / hy)) + 1
    speed = max(abs(fmin), abs(fmax), 1e-12)
    nt = max(2 * int(np.ceil(t_end * speed / ((y_hi - y_lo) / (ny - 1)))), 100)
    return Grid(x_lo, x_hi, y_lo, y_hi, t_end, nx, ny, nt)


def default_region(sol: NumericalSolution, core_y=CORE_Y, t_skip: float = 0.2, inset: float = 0.1) -> Region:
    g = sol.grid
    zl, zh = g.z[0], g.z[-1]
    dz = inset * (zh - zl)
    return Region((t_skip * g.t_end, g.t_end), (zl + dz, zh - dz), core_y)


def numeric_solution(f, grid: Grid | None = None, initial=default_initial, *,
                     richardson: bool = True) -> NumericalSolution:
    """Solution used by the symmetry oracle (extrapolated by default)."""
    solver = solve_fd_richardson if richardson else solve_fd
    return solver(f, grid or default_grid(f), initial)
