"""Time the finite-difference kernels: numba loops against vectorized numpy.

    python benchmarks/bench_kernels.py [--nx 81] [--ny 321] [--repeat 20]

Run with ASIANLIE_NO_NUMBA=1 to confirm the fallback path is selected.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from asianlie.verify import Grid, solve_fd
from asianlie.verify import kernels
from asianlie.verify.check import default_initial


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--nx", type=int, default=81)
    p.add_argument("--ny", type=int, default=321)
    p.add_argument("--nt", type=int, default=200)
    p.add_argument("--repeat", type=int, default=20)
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    u = rng.standard_normal((args.nx, args.ny))
    f = np.linspace(0.5, 2.0, args.nx)
    src = np.zeros_like(u)
    out_a, out_b = np.empty_like(u), np.empty_like(u)
    hz, hy, dt = 0.02, 0.01, 1e-3
    print(f"backend selected: {kernels.BACKEND}")

    kernels.step(u, f, hz, hy, dt, src, u, out_a)  # compile
    kernels.residual(u, u, u, f, hz, hy, dt, src)
    rows = [
        ("step (selected)", _best(lambda: kernels.step(u, f, hz, hy, dt, src, u, out_a), args.repeat)),
        ("step (numpy)", _best(lambda: kernels.step_numpy(u, f, hz, hy, dt, src, u, out_b), args.repeat)),
        ("residual (selected)", _best(lambda: kernels.residual(u, u, u, f, hz, hy, dt, src), args.repeat)),
        ("residual (numpy)", _best(lambda: kernels.residual_numpy(u, u, u, f, hz, hy, dt, src), args.repeat)),
    ]
    for name, sec in rows:
        print(f"{name:22s} {sec * 1e3:9.3f} ms")
    print(f"max |step difference| = {np.max(np.abs(out_a - out_b)):.2e}")

    grid = Grid(nx=args.nx, ny=args.ny, nt=args.nt)
    for backend in (kernels.BACKEND, "numpy"):
        t0 = time.perf_counter()
        sol = solve_fd("x", grid, default_initial, backend=backend)
        print(f"solve_fd [{sol.backend:5s}] {time.perf_counter() - t0:8.3f} s  residual rms {sol.residual_norm:.3e}")


if __name__ == "__main__":
    main()
