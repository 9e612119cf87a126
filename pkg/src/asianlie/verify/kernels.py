"""Hot loops of the finite-difference solver and the flow integrator.

Each kernel has a numba version and a vectorized numpy version with the same
signature.  Setting ``ASIANLIE_NO_NUMBA=1`` (or a missing numba install)
selects numpy.  Both produce results equal to rounding error; the numba
versions loop in the same order so repeated runs are bit-identical.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("ASIANLIE_NO_NUMBA", "").strip().lower() not in ("", "0", "false", "no")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
except ImportError:  # pragma: no cover - exercised via the env flag
    njit = None

BACKEND = "numba" if njit is not None else "numpy"


# ---------------------------------------------------------------------------
# one Crank-Nicolson (in z) / explicit upwind (in y) step
# ---------------------------------------------------------------------------
#
# u has shape (nz, ny).  Row i = 0 and i = nz-1 are Dirichlet in z.  Node
# (i, j) is a Dirichlet node in y when it sits on the inflow side of its row:
# j = ny-1 for f_i > 0, j = 0 for f_i < 0.  ``bc_new`` carries the boundary
# values at the new level on all those nodes (other entries ignored).

def _step_numpy(u, f, hz, hy, dt, src, bc_new, out):
    nz, ny = u.shape
    lo = 1.0 / hz**2 + 0.5 / hz
    di = -2.0 / hz**2
    up = 1.0 / hz**2 - 0.5 / hz
    adv = np.zeros_like(u)
    pos = f > 0
    neg = f < 0
    adv[:, :-1] = np.where(pos[:, None], f[:, None] * (u[:, 1:] - u[:, :-1]) / hy, 0.0)
    adv[:, 1:] += np.where(neg[:, None], f[:, None] * (u[:, 1:] - u[:, :-1]) / hy, 0.0)
    rhs = u.copy()
    rhs[1:-1] += 0.5 * dt * (lo * u[:-2] + di * u[1:-1] + up * u[2:]) + dt * (adv[1:-1] + src[1:-1])
    ydir = np.zeros(u.shape, dtype=bool)
    ydir[pos, -1] = True
    ydir[neg, 0] = True
    ydir[0, :] = True
    ydir[-1, :] = True
    a = np.where(ydir, 0.0, -0.5 * dt * lo)
    b = np.where(ydir, 1.0, 1.0 - 0.5 * dt * di)
    c = np.where(ydir, 0.0, -0.5 * dt * up)
    d = np.where(ydir, bc_new, rhs)
    # Thomas sweep down the z index, vectorized over columns
    cp = np.empty_like(u)
    dp = np.empty_like(u)
    cp[0] = c[0] / b[0]
    dp[0] = d[0] / b[0]
    for i in range(1, nz):
        m = b[i] - a[i] * cp[i - 1]
        cp[i] = c[i] / m
        dp[i] = (d[i] - a[i] * dp[i - 1]) / m
    out[-1] = dp[-1]
    for i in range(nz - 2, -1, -1):
        out[i] = dp[i] - cp[i] * out[i + 1]
    return out


def _step_loops(u, f, hz, hy, dt, src, bc_new, out):
    nz, ny = u.shape
    lo = 1.0 / hz**2 + 0.5 / hz
    di = -2.0 / hz**2
    up = 1.0 / hz**2 - 0.5 / hz
    cp = np.empty(nz)
    dp = np.empty(nz)
    for j in range(ny):
        for i in range(nz):
            fi = f[i]
            is_dir = i == 0 or i == nz - 1 or (fi > 0 and j == ny - 1) or (fi < 0 and j == 0)
            if is_dir:
                a = 0.0
                b = 1.0
                c = 0.0
                d = bc_new[i, j]
            else:
                if fi > 0:
                    adv = fi * (u[i, j + 1] - u[i, j]) / hy
                elif fi < 0:
                    adv = fi * (u[i, j] - u[i, j - 1]) / hy
                else:
                    adv = 0.0
                a = -0.5 * dt * lo
                b = 1.0 - 0.5 * dt * di
                c = -0.5 * dt * up
                d = (u[i, j] + 0.5 * dt * (lo * u[i - 1, j] + di * u[i, j] + up * u[i + 1, j])
                     + dt * (adv + src[i, j]))
            if i == 0:
                cp[0] = c / b
                dp[0] = d / b
            else:
                m = b - a * cp[i - 1]
                cp[i] = c / m
                dp[i] = (d - a * dp[i - 1]) / m
        out[nz - 1, j] = dp[nz - 1]
        for i in range(nz - 2, -1, -1):
            out[i, j] = dp[i] - cp[i] * out[i + 1, j]
    return out


def _residual_numpy(prev, cur, nxt, f, hz, hy, dt, src):
    """Centered residual ``u_t - (u_zz - u_z) - f u_y - src`` on interior nodes."""
    ut = (nxt[1:-1, 1:-1] - prev[1:-1, 1:-1]) / (2 * dt)
    uzz = (cur[2:, 1:-1] - 2 * cur[1:-1, 1:-1] + cur[:-2, 1:-1]) / hz**2
    uz = (cur[2:, 1:-1] - cur[:-2, 1:-1]) / (2 * hz)
    uy = (cur[1:-1, 2:] - cur[1:-1, :-2]) / (2 * hy)
    return ut - (uzz - uz) - f[1:-1, None] * uy - src[1:-1, 1:-1]


def _residual_loops(prev, cur, nxt, f, hz, hy, dt, src):
    nz, ny = cur.shape
    out = np.empty((nz - 2, ny - 2))
    for i in range(1, nz - 1):
        for j in range(1, ny - 1):
            ut = (nxt[i, j] - prev[i, j]) / (2 * dt)
            uzz = (cur[i + 1, j] - 2 * cur[i, j] + cur[i - 1, j]) / hz**2
            uz = (cur[i + 1, j] - cur[i - 1, j]) / (2 * hz)
            uy = (cur[i, j + 1] - cur[i, j - 1]) / (2 * hy)
            out[i - 1, j - 1] = ut - (uzz - uz) - f[i] * uy - src[i, j]
    return out


# ---------------------------------------------------------------------------
# RK4 for the characteristic system, vectorized over points
# ---------------------------------------------------------------------------

def rk4_numpy(rhs, state, h, steps):
    s = state.copy()
    for _ in range(steps):
        k1 = rhs(s)
        k2 = rhs(s + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h * k2)
        k4 = rhs(s + h * k3)
        s = s + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return s


if njit is not None:
    step = njit(cache=True)(_step_loops)
    residual = njit(cache=True)(_residual_loops)
else:
    step = _step_numpy
    residual = _residual_numpy

step_numpy = _step_numpy
residual_numpy = _residual_numpy
