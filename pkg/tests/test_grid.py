import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import landaulab as ll
from landaulab.errors import GridConfigError, NonFiniteFieldError


def test_spacing_arithmetic():
    assert ll.build_grid(8.0, 9).spacing == 2.0
    assert ll.build_grid(8.0, 64).spacing == pytest.approx(16.0 / 63.0, rel=1e-15)


def test_rejects_bad_config():
    with pytest.raises(GridConfigError):
        ll.build_grid(8.0, 4)
    with pytest.raises(GridConfigError):
        ll.build_grid(0.0, 16)
    with pytest.raises(GridConfigError):
        ll.build_grid(-3.0, 16)


def test_nodes_and_weights():
    g = ll.build_grid(8.0, 9)
    assert np.allclose(g.axis, np.arange(-8, 9, 2))
    assert g.weights.sum() == pytest.approx(16.0 ** 3, rel=1e-14)


def test_integrate_constant_exact():
    g = ll.build_grid(7.0, 24)
    val = ll.integrate(g, np.ones(g.shape))
    assert val == pytest.approx(14.0 ** 3, rel=1e-12)


def test_integrate_gaussian_against_erf_oracle():
    g = ll.build_grid(8.0, 64)
    f = (2 * math.pi) ** -1.5 * np.exp(-0.5 * g.vsq)
    oracle = math.erf(8.0 / math.sqrt(2.0)) ** 3
    val = ll.integrate(g, f)
    assert val == pytest.approx(oracle, abs=1e-10)
    assert val == pytest.approx(1.0, abs=1e-6)


def test_integrate_odd_field_vanishes():
    g = ll.build_grid(8.0, 24)
    f = g.v1 * np.exp(-g.vsq)
    assert abs(ll.integrate(g, f)) < 1e-12


def test_integrate_rejects_nonfinite_with_location():
    g = ll.build_grid(7.0, 16)
    f = np.ones(g.shape)
    f[3, 4, 5] = np.nan
    with pytest.raises(NonFiniteFieldError, match=r"\(3, 4, 5\)"):
        ll.integrate(g, f)


def test_gradient_exact_on_affine_and_quadratic():
    g = ll.build_grid(7.0, 16)
    g1, g2, g3 = ll.gradient(g, g.v2)
    assert np.abs(g1).max() < 1e-13
    assert np.abs(g2 - 1.0).max() < 1e-13
    assert np.abs(g3).max() < 1e-13
    h1, h2, h3 = ll.gradient(g, 0.5 * g.vsq)
    assert np.abs(h1 - g.v1).max() < 1e-11
    assert np.abs(h2 - g.v2).max() < 1e-11
    assert np.abs(h3 - g.v3).max() < 1e-11


def _gaussian_gradient_error(n):
    g = ll.build_grid(8.0, n)
    f = np.exp(-0.5 * g.vsq)
    g1, _, _ = ll.gradient(g, f)
    exact = -g.v1 * f
    inner = (slice(1, -1),) * 3
    return np.abs(g1 - exact)[inner].max()


def test_gradient_second_order_on_gaussian():
    e32 = _gaussian_gradient_error(32)
    e64 = _gaussian_gradient_error(64)
    order = math.log(e32 / e64) / math.log(63.0 / 31.0)
    assert order >= 1.9


def test_discrete_divergence_theorem():
    g = ll.build_grid(8.0, 32)
    f = np.exp(-g.vsq)
    g1, _, _ = ll.gradient(g, f)
    assert abs(ll.integrate(g, g1)) < 10.0 * g.spacing ** 2


def test_gradient_adjoint_identity():
    g = ll.build_grid(6.0, 12)
    rng = np.random.default_rng(0)
    phi = rng.normal(size=g.shape)
    u = rng.normal(size=(3,) + g.shape)
    g1, g2, g3 = ll.gradient(g, phi)
    lhs = (g1 * u[0] + g2 * u[1] + g3 * u[2]).sum()
    rhs = (phi * ll.gradient_adjoint(g, u[0], u[1], u[2])).sum()
    assert lhs == pytest.approx(rhs, rel=1e-12)


@settings(deadline=None, max_examples=20)
@given(st.floats(min_value=-2.0, max_value=2.0),
       st.floats(min_value=-2.0, max_value=2.0))
def test_quadrature_linearity(a, b):
    g = ll.build_grid(5.0, 8)
    rng = np.random.default_rng(7)
    f1 = rng.normal(size=g.shape)
    f2 = rng.normal(size=g.shape)
    lhs = ll.integrate(g, a * f1 + b * f2)
    rhs = a * ll.integrate(g, f1) + b * ll.integrate(g, f2)
    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)


@settings(deadline=None, max_examples=10)
@given(st.floats(min_value=0.1, max_value=20.0))
def test_gradient_of_constant_vanishes(c):
    g = ll.build_grid(5.0, 8)
    for comp in ll.gradient(g, np.full(g.shape, c)):
        assert np.abs(comp).max() < 1e-12
