import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import landaulab as ll
from landaulab import functionals as fun
from landaulab.errors import OverflowGuardError, ParameterDomainError

import oracles


def test_poly_moment_basics(grid33, corpus16):
    mu = ll.maxwellian(grid33)
    assert fun.poly_moment(mu, 0.0) == pytest.approx(1.0, abs=1e-6)
    for f in corpus16[:3]:
        assert fun.poly_moment(f, 2.0) == pytest.approx(4.0, abs=1e-8)


def test_poly_moment_against_radial_oracle(grid33):
    mu = ll.maxwellian(grid33)
    assert fun.poly_moment(mu, 5.0) == pytest.approx(
        oracles.maxwellian_poly_moment(5.0), rel=1e-5)


def test_poly_moment_monotone_in_order(corpus16):
    f = corpus16[0]
    vals = [fun.poly_moment(f, l) for l in (0.0, 1.0, 2.5, 4.0, 6.0)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_stretched_moment_zero_kappa_is_mass(corpus16):
    f = corpus16[0]
    assert fun.stretched_moment(f, 1.0, 0.0) == pytest.approx(f.mass(), rel=1e-14)


def test_stretched_moment_series_identity(grid24):
    mu = ll.maxwellian(grid24)
    direct = fun.stretched_moment(mu, 1.0, 0.1)
    series = fun.stretched_moment_series(mu, 1.0, 0.1)
    assert direct == pytest.approx(series, abs=1e-8)


def test_stretched_moment_overflow_guard(grid24):
    with pytest.raises(OverflowGuardError):
        fun.stretched_moment(ll.maxwellian(grid24), 2.0, 10.0)


def test_stretched_moment_outside_propagation_window(grid24):
    # s = 2 with kappa above 1/(2e): finite as an integral, but flagged
    mu = ll.maxwellian(grid24)
    val = fun.stretched_moment(mu, 2.0, 0.6)
    assert math.isfinite(val)
    assert not fun.stretched_moment_in_propagation_window(2.0, 0.6, gamma=-2.0)
    assert fun.stretched_moment_in_propagation_window(2.0, 0.1, gamma=-2.0)
    assert fun.stretched_moment_in_propagation_window(0.5, 0.5, gamma=-3.0)
    assert not fun.stretched_moment_in_propagation_window(0.6, 0.5, gamma=-3.0)


def test_weighted_lp_norm(grid64, corpus16):
    f = corpus16[0]
    assert fun.weighted_lp_norm(f, 1.0, 0.0) == pytest.approx(f.mass(), rel=1e-12)
    mu = ll.maxwellian(grid64)
    assert fun.weighted_lp_norm(mu, 3.0, -3.0) == pytest.approx(
        oracles.maxwellian_l3_weighted_norm(), rel=1e-5)
    scaled = f.with_values(2.0 * f.values)
    assert fun.weighted_lp_norm(scaled, 3.0, -3.0) == pytest.approx(
        2.0 * fun.weighted_lp_norm(f, 3.0, -3.0), rel=1e-12)
    with pytest.raises(ParameterDomainError):
        fun.weighted_lp_norm(f, 0.5, 0.0)


def test_relative_entropy_zero_iff_equal(grid24):
    mu = ll.maxwellian(grid24)
    assert abs(fun.relative_entropy(mu)) < 1e-10


def test_relative_entropy_gaussian_oracle(grid24):
    f = ll.anisotropic_gaussian(grid24, 1.5, 1.0, 0.5)
    assert fun.relative_entropy(f) == pytest.approx(
        oracles.gaussian_kl_divergence((1.5, 1.0, 0.5)), abs=1e-4)
    assert fun.relative_entropy(f) == pytest.approx(0.5 * math.log(4.0 / 3.0),
                                                    abs=1e-4)


def test_relative_entropy_identity(corpus16):
    # H(f|mu) = H(f) - H(mu) + int (f - mu)(|v|^2/2 + 3/2 log 2pi)
    f = corpus16[1]
    g = f.grid
    mu = ll.maxwellian(g)
    lhs = fun.relative_entropy(f)
    corr = ll.integrate(g, (f.values - mu.values)
                        * (0.5 * g.vsq + 1.5 * math.log(2 * math.pi)))
    rhs = fun.entropy(f) - fun.entropy(mu) + corr
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_dissipation_nonnegative_and_zero_at_equilibrium(grid24, corpus16):
    mu = ll.maxwellian(grid24)
    assert abs(fun.dissipation(mu)) < 1e-8
    assert abs(fun.dissipation_crossform(mu)) < 1e-8
    for f in corpus16:
        assert fun.dissipation(f) >= 0.0


def test_dissipation_forms_agree(corpus16):
    for f in corpus16:
        a = fun.dissipation(f)
        b = fun.dissipation_crossform(f)
        assert b == pytest.approx(a, rel=1e-10)


def test_dissipation_forms_agree_general_exponent(corpus16):
    f = corpus16[0]
    for gamma in (-2.0, -1.0, -3.5):
        a = fun.dissipation(f, gamma)
        b = fun.dissipation_crossform(f, gamma)
        assert b == pytest.approx(a, rel=1e-10)


def test_dissipation_quadratic_scaling(corpus16):
    f = corpus16[2]
    doubled = f.with_values(2.0 * f.values)
    assert fun.dissipation(doubled) == pytest.approx(4.0 * fun.dissipation(f),
                                                     rel=1e-12)


def test_dissipation_rejects_bad_gamma(corpus16):
    with pytest.raises(ParameterDomainError):
        fun.dissipation(corpus16[0], gamma=-4.5)


def test_fisher_zero_at_maxwellian(grid24):
    mu = ll.maxwellian(grid24)
    assert fun.weighted_fisher(mu, -3.0) < 1e-6


def test_fisher_anisotropic_oracle(grid24):
    temps = (1.5, 1.0, 0.5)
    f = ll.anisotropic_gaussian(grid24, *temps)
    for alpha in (-3.0, 0.0):
        assert fun.weighted_fisher(f, alpha) == pytest.approx(
            oracles.anisotropic_fisher(temps, alpha), rel=1e-3)


def test_fisher_weight_monotone(corpus16):
    for f in corpus16[:4]:
        assert fun.weighted_fisher(f, 0.0) >= fun.weighted_fisher(f, -3.0)


def test_pressure_tensor_maxwellian(grid24):
    mu = ll.maxwellian(grid24)
    p = fun.pressure_tensor(mu)
    assert np.abs(p - np.eye(3)).max() < 1e-8
    assert fun.pressure_gram_min(p) == pytest.approx(1.0, abs=1e-7)


def test_pressure_tensor_rotated_gaussian(grid24):
    temps = np.array([1.5, 1.0, 0.5])
    theta = 0.7
    rot = np.array([[math.cos(theta), -math.sin(theta), 0.0],
                    [math.sin(theta), math.cos(theta), 0.0],
                    [0.0, 0.0, 1.0]])
    g = grid24
    pts = np.stack([g.v1, g.v2, g.v3])
    local = np.einsum("ji,jabc->iabc", rot, pts)  # rotate before sampling
    q = sum(local[i] ** 2 / temps[i] for i in range(3))
    vals = (2 * math.pi) ** -1.5 / math.sqrt(temps.prod()) * np.exp(-0.5 * q)
    f = ll.from_values(g, vals)
    p = fun.pressure_tensor(f)
    expected = rot @ np.diag(temps) @ rot.T
    assert np.abs(p - expected).max() < 1e-5
    gram = [expected[i, i] * expected[j, j] - expected[i, j] ** 2
            for i in range(3) for j in range(i + 1, 3)]
    assert fun.pressure_gram_min(p) == pytest.approx(min(gram), abs=1e-5)


def test_pressure_positive_semidefinite(corpus16):
    for f in corpus16:
        p = fun.pressure_tensor(f)
        assert np.linalg.eigvalsh(p).min() >= -1e-10
        assert np.trace(p) == pytest.approx(f.energy(), rel=1e-10)


def test_score_cross_symmetries(corpus16):
    f = corpus16[0]
    k, l = (3, 4, 5), (8, 2, 9)
    r01 = fun.score_cross_component(f, k, l, 0, 1)
    assert fun.score_cross_component(f, k, l, 1, 0) == -r01
    assert fun.score_cross_component(f, l, k, 0, 1) == r01
    with pytest.raises(ParameterDomainError):
        fun.score_cross_component(f, k, l, 1, 1)


def test_score_cross_vanishes_at_maxwellian(grid16):
    mu = ll.maxwellian(grid16)
    rng = np.random.default_rng(1)
    n = grid16.points_per_axis
    for _ in range(20):
        k = tuple(rng.integers(0, n, 3))
        l = tuple(rng.integers(0, n, 3))
        if k == l:
            continue
        assert abs(fun.score_cross_component(mu, k, l, 0, 2)) < 1e-10


def test_concentration_saturates_at_mass(corpus16):
    f = corpus16[0]
    big = (2.0 * f.grid.half_extent) ** 3
    assert fun.concentration(f, big + 1.0) == pytest.approx(f.mass(), rel=1e-12)


def test_concentration_peak_cell(grid33):
    mu = ll.maxwellian(grid33)
    h3 = grid33.quad_weight
    assert fun.concentration(mu, h3) == pytest.approx(
        h3 * (2 * math.pi) ** -1.5, abs=1e-12)


def test_concentration_monotone(corpus16):
    f = corpus16[1]
    qs = [0.01, 0.1, 1.0, 10.0]
    vals = [fun.concentration(f, q) for q in qs]
    assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_concentration_entropy_bound(corpus16):
    # sup_{|A| <= q} int_A f <= M q + Hbar'/log M with M = exp(4 Hbar')
    for f in corpus16:
        hbar = max(fun.entropy(f), 1.0)
        m = math.exp(4.0 * hbar)
        for q in (1e-4, 1e-2, 0.5):
            assert fun.concentration(f, q) <= m * q + hbar / math.log(m) + 1e-12


def test_partition_factors_against_radial_oracle(grid64):
    mu = ll.maxwellian(grid64)
    z1, z2 = fun.partition_factors(mu)
    assert z1 == pytest.approx(oracles.maxwellian_z_factor(), rel=1e-5)
    assert z2 == pytest.approx(z1, rel=1e-12)


def test_report_serialization(corpus16):
    rep = fun.report(corpus16[0])
    payload = json.loads(rep.to_json())
    assert payload["mass"] == pytest.approx(1.0, abs=1e-8)
    assert set(payload) >= {"mass", "momentum", "energy", "entropy",
                            "relative_entropy", "dissipation", "fisher",
                            "poly_moments", "exp_moments", "pressure",
                            "pressure_gram_min", "l3_norm", "z_mu", "z_f"}
    row = rep.to_csv_row()
    assert len(row.split(",")) == len(fun.FunctionalReport.csv_header().split(","))


@settings(deadline=None, max_examples=8)
@given(st.floats(min_value=0.25, max_value=4.0))
def test_dissipation_scaling_property(c):
    g = ll.build_grid(5.0, 8)
    f = ll.normalize(ll.gaussian_mixture(
        g, [(0.6, (0.6, 0, 0), 0.8), (0.4, (-0.9, 0, 0), 0.9)]))
    scaled = f.with_values(c * f.values)
    assert fun.dissipation(scaled) == pytest.approx(
        c * c * fun.dissipation(f), rel=1e-11)
