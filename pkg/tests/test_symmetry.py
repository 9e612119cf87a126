from __future__ import annotations

from importlib import resources

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from asianlie.symcore import function, is_zero, jet, normalize, t, u, x, y
from asianlie.symmetry import (
    VectorField,
    determining_system,
    f_generic,
    lie_residual,
    prolong,
    verify_kernel,
)
from asianlie.systems import compare, load_reference

KERNEL = [VectorField(xi0=1), VectorField(xi2=1), VectorField(eta=u)]
ROW2 = [VectorField(xi1=x, xi2=y), VectorField(xi1=x * y, xi2=y**2 / 2, eta=x * u / 2)]


def test_kernel_oracle():
    rep = verify_kernel()
    assert rep.passed
    assert all(r == 0 for r in rep.residuals.values())


def test_beta_residual_is_backward_heat_operator():
    beta = function("beta", t, x)
    r = lie_residual(VectorField(eta=beta), f_generic)
    assert normalize(r - (sp.diff(beta, t) - x**2 * sp.diff(beta, x, 2))) == 0
    # a solution of beta_t = x^2 beta_xx is a symmetry for every f
    assert lie_residual(VectorField(eta=x), f_generic) == 0
    assert lie_residual(VectorField(eta=x**2 * sp.exp(2 * t)), f_generic) == 0


def test_prolongation_of_translation_is_trivial():
    pr = prolong(VectorField(xi2=1))
    assert (pr.zeta_t, pr.zeta_x, pr.zeta_y, pr.zeta_xx) == (0, 0, 0, 0)


def test_prolongation_of_u_scaling():
    pr = prolong(VectorField(eta=u))
    assert pr.zeta_xx == jet("xx")
    assert pr.zeta_t == jet("t")


def test_non_symmetry_has_nonzero_residual():
    assert lie_residual(VectorField(xi1=x), x) != 0
    assert lie_residual(VectorField(xi1=x, xi2=y), sp.log(x)) != 0


def test_f_must_depend_on_x_only():
    with pytest.raises(ValueError):
        lie_residual(VectorField(xi0=1), t * x)


def test_determining_system_equivalent_to_reference():
    rep = compare(determining_system(), load_reference())
    assert rep.passed, rep.failures()


def test_determining_system_reassembles_residual():
    ds = determining_system()
    X = VectorField(*(function(n, t, x, y, u) for n in ("xi0", "xi1", "xi2", "eta")))
    assert normalize(ds.reassemble() - lie_residual(X, f_generic)) == 0


def test_mutated_reference_is_rejected(tmp_path):
    src = resources.files("asianlie.data").joinpath("determining.txt").read_text()
    bad = src.replace("+ 2*xi1(t, x, y, u)", "- 2*xi1(t, x, y, u)", 1)
    assert bad != src
    p = tmp_path / "bad.txt"
    p.write_text(bad)
    rep = compare(determining_system(), load_reference(p))
    assert not rep.passed
    assert any("xi1" in line for line in rep.failures())


@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3), st.sampled_from([x, sp.log(x), x**2 + 1]))
def test_residual_linear_over_kernel(coeffs, f):
    X = sum((c * K for c, K in zip(coeffs, KERNEL)), VectorField())
    assert lie_residual(X, f) == 0


@given(st.integers(-4, 4), st.integers(-4, 4))
def test_residual_is_linear(a, b):
    X, Y = ROW2
    lhs = lie_residual(a * X + b * Y, sp.log(x))
    rhs = a * lie_residual(X, sp.log(x)) + b * lie_residual(Y, sp.log(x))
    assert is_zero(lhs - rhs)


@given(st.sampled_from(KERNEL + ROW2), st.integers(-3, 3))
def test_vector_field_text_round_trip(X, c):
    Z = (X * c + VectorField(xi0=t)).normalized()
    assert VectorField.from_text(Z.to_text()) == Z


def test_from_text_rejects_second_order():
    with pytest.raises(ValueError):
        VectorField.from_text("D_x*D_x")
