from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from asianlie.symcore import function, normalize, t, u, x, y
from asianlie.symmetry import VectorField
from asianlie.verify import (
    FAIL,
    INCONCLUSIVE,
    PASS,
    FinancialModel,
    Grid,
    ReductionNotAutomated,
    StabilityError,
    check_symmetry_numerically,
    convergence_x,
    convergence_y,
    default_region,
    discretization_estimate,
    flow,
    from_canonical,
    load_dump,
    numeric_solution,
    pricing_operator,
    reduce,
    solve_fd,
    to_canonical,
    verify_transform,
)
from asianlie.verify import kernels
from asianlie.verify.financial import A, S, TAU

D_y = VectorField(xi2=1)
SCALE = VectorField(xi1=x, xi2=y)
PROJ = VectorField(xi1=x * y, xi2=y**2 / 2, eta=x * u / 2)


# --- kernels --------------------------------------------------------------

@given(st.integers(4, 12), st.integers(4, 12), st.integers(0, 2**16))
def test_step_backends_agree(nz, ny, seed):
    rng = np.random.default_rng(seed)
    u0 = rng.standard_normal((nz, ny))
    f = rng.uniform(-2, 2, nz)
    src = rng.standard_normal((nz, ny))
    bc = rng.standard_normal((nz, ny))
    a, b = np.empty_like(u0), np.empty_like(u0)
    kernels.step(u0, f, 0.1, 0.05, 0.01, src, bc, a)
    kernels.step_numpy(u0, f, 0.1, 0.05, 0.01, src, bc, b)
    np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    r1 = kernels.residual(u0, a, b, f, 0.1, 0.05, 0.01, src)
    r2 = kernels.residual_numpy(u0, a, b, f, 0.1, 0.05, 0.01, src)
    np.testing.assert_allclose(r1, r2, rtol=1e-12, atol=1e-10)


def test_env_flag_selects_numpy():
    env = dict(os.environ, ASIANLIE_NO_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", "from asianlie.verify import BACKEND; print(BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


def test_repeat_runs_are_bit_identical():
    g = Grid(nx=21, ny=41, nt=50)
    a = solve_fd("x", g, lambda X, Y: np.exp(-X) * np.cos(Y))
    b = solve_fd("x", g, lambda X, Y: np.exp(-X) * np.cos(Y))
    assert np.array_equal(a.u, b.u)


# --- finite differences ---------------------------------------------------

def test_stability_error_suggests_nt():
    g = Grid(nt=2)
    with pytest.raises(StabilityError, match="nt >= "):
        g.check_stability(2.0)


def _heat_1d(g: Grid, u0: np.ndarray, edge) -> np.ndarray:
    """Independent Crank-Nicolson solve of u_t = u_zz - u_z (banded solver)."""
    from scipy.linalg import solve_banded
    n, h, dt = g.nx, g.hz, g.dt
    lo, di, up = 1 / h**2 + 0.5 / h, -2 / h**2, 1 / h**2 - 0.5 / h
    ab = np.zeros((3, n))
    ab[0, 2:] = -0.5 * dt * up
    ab[1, :] = 1 - 0.5 * dt * di
    ab[2, :-2] = -0.5 * dt * lo
    ab[1, 0] = ab[1, -1] = 1.0
    out = [u0]
    for k in range(g.nt):
        v = out[-1]
        rhs = v.copy()
        rhs[1:-1] += 0.5 * dt * (lo * v[:-2] + di * v[1:-1] + up * v[2:])
        rhs[0], rhs[-1] = edge(g.t[k + 1])
        out.append(solve_banded((1, 1), ab, rhs))
    return np.array(out)


def test_y_independent_data_match_one_dimensional_solution():
    g = Grid(nx=81, ny=21, nt=400)
    exact = lambda tv, xv: xv**2 * np.exp(2 * tv)  # noqa: E731
    ref = _heat_1d(g, exact(0.0, g.x), lambda tv: (exact(tv, g.x[0]), exact(tv, g.x[-1])))
    level = {round(tv / g.dt): k for k, tv in enumerate(g.t)}
    bc = lambda tv, X, Y: ref[level[round(tv / g.dt)]][:, None] + 0 * Y  # noqa: E731
    sol = solve_fd("sin(x) + 2", g, lambda X, Y: exact(0.0, X) + 0 * Y, boundary=bc)
    assert np.max(np.abs(sol.u - ref[:, :, None])) < 1e-12
    assert np.max(np.abs(ref[-1] - exact(g.t_end, g.x))) < 1e-4


def test_manufactured_solution_orders():
    assert convergence_x().order >= 1.8
    assert convergence_y().order >= 0.8


def test_self_convergence_in_y():
    init = lambda X, Y: np.exp(-4 * np.log(X) ** 2 - 4 * Y**2)  # noqa: E731
    norms = []
    for ny in (41, 81):
        g = Grid(y_lo=-2, y_hi=2, nx=41, ny=ny, nt=2)
        g = g.refined(nt=2 * g.min_steps(2.0))
        norms.append(solve_fd("x", g, init).residual_norm)
    assert norms[1] < norms[0] / 1.5


def test_dump_round_trip(tmp_path):
    sol = solve_fd("x", Grid(nx=11, ny=21, nt=20), lambda X, Y: X + Y)
    p = tmp_path / "sol.npz"
    sol.dump(p)
    header, U = load_dump(p)
    assert header["nx"] == 11 and header["scheme"] == sol.scheme
    assert np.array_equal(U, sol.u)
    csv = sol.csv_slice()
    assert csv.splitlines()[0] == "x,y,u" and len(csv.splitlines()) == 11 * 21 + 1


# --- flows ---------------------------------------------------------------

def test_flow_examples():
    e = 0.3
    out = flow(D_y, e)(0.1, 1.5, 0.2, 2.0)
    np.testing.assert_allclose(out, (0.1, 1.5, 0.5, 2.0))
    out = flow(SCALE, e)(0.1, 1.5, 0.2, 2.0)
    np.testing.assert_allclose(out, (0.1, np.exp(e) * 1.5, np.exp(e) * 0.2, 2.0))
    out = flow(VectorField(eta=u), e)(0.1, 1.5, 0.2, 2.0)
    np.testing.assert_allclose(out, (0.1, 1.5, 0.2, np.exp(e) * 2.0))
    assert flow(SCALE, e).method == "closed-form"
    assert flow(PROJ, e).method == "rk4"


@given(st.floats(-0.2, 0.2), st.floats(-0.2, 0.2))
def test_flow_group_property(a, b):
    p = (0.1, 1.3, 0.4, 1.5)
    two = flow(PROJ, b)(*flow(PROJ, a)(*p))
    one = flow(PROJ, a + b)(*p)
    np.testing.assert_allclose(two, one, rtol=1e-8, atol=1e-10)


@given(st.floats(-0.2, 0.2).filter(lambda e: abs(e) > 1e-3))
def test_pullback_inverts_forward(e):
    fl = flow(PROJ, e)
    t0, z0, y0, M, N = fl.pullback(np.array([0.2]), np.array([0.1]), np.array([0.3]))
    tf, xf, yf, uf = fl(t0, np.exp(z0), y0, 1.7)
    np.testing.assert_allclose([tf[0], np.log(xf[0]), yf[0]], [0.2, 0.1, 0.3], atol=1e-9)
    np.testing.assert_allclose(uf, M * 1.7 + N, rtol=1e-9)


# --- numerical symmetry oracle ------------------------------------------

@pytest.fixture(scope="module")
def sol_x():
    sol = numeric_solution(x)
    region = default_region(sol)
    return sol, region, discretization_estimate(sol, region)


@pytest.mark.parametrize("X", [D_y, SCALE, VectorField(eta=x)], ids=["D_y", "scaling", "beta=x"])
def test_symmetries_pass(sol_x, X):
    sol, region, est = sol_x
    rep = check_symmetry_numerically(X, x, sol, region=region, estimate=est)
    assert rep.status == PASS, rep.to_dict()


def test_scaling_fails_for_log(sol_x):
    sol = numeric_solution(sp.log(x))
    rep = check_symmetry_numerically(SCALE, sp.log(x), sol)
    assert rep.status == FAIL


def test_small_overlap_is_inconclusive(sol_x):
    sol, region, est = sol_x
    rep = check_symmetry_numerically(D_y, x, sol, epsilon=5.0, region=region, estimate=est)
    assert rep.status == INCONCLUSIVE


# --- financial transform -------------------------------------------------

def test_financial_transform():
    rep = verify_transform()
    assert rep.passed
    assert rep.ux_coefficient != 0 and rep.u_coefficient != 0
    m = FinancialModel()
    assert normalize(rep.multiplier + m.sigma**2 / 2 * S ** (-m.m) * sp.exp(-m.q * m.t_of(TAU))) == 0


@given(st.sampled_from([S**2 * A, sp.exp(TAU) * sp.sin(A), S * TAU + A**2, sp.log(S) * A]),
       st.sampled_from([0, sp.Rational(1, 20), sp.Rational(1, 2)]), st.sampled_from([1, sp.Rational(3, 10)]))
def test_financial_round_trip(V, r, sigma):
    m = FinancialModel(r, sigma, 2)
    assert normalize(from_canonical(m, to_canonical(m, V)) - V) == 0


def test_residual_correspondence_concrete():
    m = FinancialModel(sp.Rational(1, 10), sp.Rational(1, 2), 1)
    V = S**2 * sp.exp(TAU) + A * S
    f = function("f", S)
    Ucan = to_canonical(m, V)
    eq = sp.diff(Ucan, t) - x**2 * sp.diff(Ucan, x, 2) - function("f", x) * sp.diff(Ucan, y)
    lhs = pricing_operator(m, V, f)
    back = from_canonical(m, eq).xreplace({function("f", x).func(S): f})
    ratio = normalize(lhs / back) if back != 0 else None
    assert ratio is not None and not ratio.free_symbols & {S, A}


# --- reductions ----------------------------------------------------------

def test_reduction_exponential_in_y():
    lam = sp.Symbol("lam", real=True)
    r = reduce(VectorField(xi2=1, eta=lam * u), x)
    assert r.exact
    assert r.ansatz == "u = exp(lam*y)*w(t, x)"
    w, wt, wxx = r.jets[""], r.jets["t"], r.jets["xx"]
    assert normalize(r.equation - (wt - x**2 * wxx - lam * x * w)) == 0 or \
        normalize(r.equation + (wt - x**2 * wxx - lam * x * w)) == 0


def test_reduction_traveling_wave():
    c = sp.Symbol("c", real=True)
    r = reduce(VectorField(xi0=1, xi2=c), sp.log(x))
    assert r.exact
    ws, wxx = r.jets["s"], r.jets["xx"]
    assert normalize(r.equation - (x**2 * wxx + (sp.log(x) + c) * ws)) == 0


def test_stationary_reduction():
    r = reduce(VectorField(xi0=1), function("f", x))
    assert r.exact and "t" not in r.jets and set(r.invariants) == {"x", "y"}


@given(st.integers(-3, 3), st.integers(-3, 3), st.sampled_from([x, sp.log(x), x**2 + 1]))
def test_reductions_back_substitute(c, lam, f):
    r = reduce(VectorField(xi0=1, xi2=c, eta=lam * u), f)
    assert r.back_substitution == 0


def test_u_scaling_has_no_reduction():
    with pytest.raises(ReductionNotAutomated, match="u itself scaled"):
        reduce(VectorField(eta=u), x)


def test_unsupported_shape_emits_characteristic_system():
    with pytest.raises(ReductionNotAutomated) as e:
        reduce(PROJ, x)
    assert e.value.characteristic_system.startswith("dt/(0) = dx/(x*y)")
