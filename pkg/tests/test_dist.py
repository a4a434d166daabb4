import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import landaulab as ll
from landaulab import dist as dm
from landaulab import functionals as fun
from landaulab.errors import DegenerateDistributionError, GridConfigError


def test_maxwellian_entropy_matches_closed_form(grid33):
    mu = ll.maxwellian(grid33)
    assert fun.entropy(mu) == pytest.approx(-1.5 * (1.0 + math.log(2 * math.pi)),
                                            abs=1e-4)
    assert fun.entropy(mu) == pytest.approx(-4.256815599614018, abs=1e-6)


def test_maxwellian_score_is_minus_v(grid24):
    mu = ll.maxwellian(grid24)
    sx, sy, sz = mu.score
    assert np.abs(sx + grid24.v1).max() < 1e-10
    assert np.abs(sy + grid24.v2).max() < 1e-10
    assert np.abs(sz + grid24.v3).max() < 1e-10


def test_maxwellian_mass_scales(grid24):
    assert ll.maxwellian(grid24, rho=2.0).mass() == pytest.approx(2.0, abs=1e-6)
    assert ll.maxwellian(grid24).energy() == pytest.approx(3.0, abs=1e-6)


def test_maxwellian_rejects_bad_temperature(grid16):
    with pytest.raises(GridConfigError):
        ll.maxwellian(grid16, temperature=0.0)
    with pytest.raises(GridConfigError):
        ll.anisotropic_gaussian(grid16, 1.0, -0.5, 1.0)


def test_isotropic_gaussian_is_maxwellian(grid16):
    a = ll.anisotropic_gaussian(grid16, 1.0, 1.0, 1.0)
    mu = ll.maxwellian(grid16)
    assert np.abs(a.values - mu.values).max() < 1e-15


def test_anisotropic_pressure_and_score(grid24):
    f = ll.anisotropic_gaussian(grid24, 1.5, 1.0, 0.5)
    p = fun.pressure_tensor(f)
    assert np.trace(p) == pytest.approx(3.0, abs=1e-6)
    assert fun.pressure_gram_min(p) == pytest.approx(0.5, abs=1e-5)
    sx, _, sz = f.score
    assert np.abs(sx + grid24.v1 / 1.5).max() < 1e-9
    assert np.abs(sz + grid24.v3 / 0.5).max() < 1e-9


def test_mixture_contracts(grid16):
    with pytest.raises(GridConfigError):
        ll.gaussian_mixture(grid16, [])
    single = ll.gaussian_mixture(grid16, [(1.0, (0, 0, 0), 1.0)])
    assert np.abs(single.values - ll.maxwellian(grid16).values).max() < 1e-15
    t = 1.0 - 1.0 / 3.0
    bim = ll.gaussian_mixture(grid16, [(0.5, (1, 0, 0), t), (0.5, (-1, 0, 0), t)])
    assert np.abs(bim.momentum()).max() < 1e-10


def test_normalize_postcondition(grid16):
    f = ll.normalize(ll.maxwellian(grid16, rho=2.0, u=(1.0, 0.0, 0.0),
                                   temperature=0.5))
    assert f.mass() == pytest.approx(1.0, abs=1e-8)
    assert np.abs(f.momentum()).max() < 1e-8
    assert f.energy() == pytest.approx(3.0, abs=1e-8)


def test_normalize_fixed_point(grid16):
    mu = ll.maxwellian(grid16)
    out = ll.normalize(mu)
    assert np.abs(out.values - mu.values).max() < 1e-8


def test_normalize_anisotropic_nearly_untouched(grid24):
    f = ll.anisotropic_gaussian(grid24, 1.5, 1.0, 0.5)
    out = ll.normalize(f)
    # zero-mean with continuum energy 3: only the mass fix and a dilation of
    # the size of the quadrature energy defect may act
    (comp,) = out.components
    assert abs(comp.weight - 1.0) < 1e-4
    assert np.abs(np.array(comp.mean)).max() < 1e-10
    assert np.allclose(comp.temps, (1.5, 1.0, 0.5), rtol=5e-5)
    assert np.abs(out.values / f.values - 1.0).max() < 1e-3


def test_normalize_grid_only_path(grid16):
    raw = ll.from_values(grid16, ll.maxwellian(
        grid16, rho=1.4, u=(0.3, 0.0, 0.0), temperature=0.9).values)
    out = ll.normalize(raw)
    assert out.mass() == pytest.approx(1.0, abs=1e-8)
    assert np.abs(out.momentum()).max() < 1e-8
    assert out.energy() == pytest.approx(3.0, abs=1e-8)


def test_normalize_rejects_degenerate(grid16):
    with pytest.raises(DegenerateDistributionError):
        ll.normalize(ll.from_values(grid16, np.zeros(grid16.shape)))


@settings(deadline=None, max_examples=10)
@given(st.integers(min_value=0, max_value=10_000))
def test_normalize_idempotent(seed):
    g = ll.build_grid(6.0, 12)
    rng = np.random.default_rng(seed)
    comps = [(w, rng.uniform(-1, 1, 3), rng.uniform(0.4, 1.5))
             for w in rng.dirichlet(np.ones(rng.integers(1, 4)))]
    f = ll.normalize(ll.gaussian_mixture(g, comps))
    again = ll.normalize(f)
    assert np.abs(again.values - f.values).max() < 1e-8


def test_corpus_determinism_and_entropy_bound(grid16):
    a = ll.random_corpus(grid16, seed=3, count=4)
    b = ll.random_corpus(grid16, seed=3, count=4)
    for fa, fb in zip(a, b):
        assert np.array_equal(fa.values, fb.values)
    mu_entropy = -1.5 * (1.0 + math.log(2 * math.pi))
    for f in a:
        h = fun.entropy(f)
        assert mu_entropy - 1e-6 <= h <= 0.0
        assert f.mass() == pytest.approx(1.0, abs=1e-8)
        assert np.abs(f.momentum()).max() < 1e-8
        assert f.energy() == pytest.approx(3.0, abs=1e-8)
        assert f.values.min() >= 0.0


def test_corpus_unreachable_bound_fails_loudly(grid16):
    with pytest.raises(DegenerateDistributionError, match="admissible"):
        ll.random_corpus(grid16, seed=0, count=1, entropy_bound=-10.0)


def test_corpus_gibbs_inequality(corpus16):
    href = -1.5 * (1.0 + math.log(2 * math.pi))
    for f in corpus16:
        assert fun.entropy(f) >= href - 1e-8


def test_snapshot_roundtrip_bit_exact(tmp_path, corpus16):
    f = corpus16[0]
    path = tmp_path / "state.lgrid"
    ll.save_snapshot(path, f, gamma=-3.0, time=0.7528431)
    back, gamma, time = ll.load_snapshot(path)
    assert gamma == -3.0
    assert time == 0.7528431
    assert back.grid.points_per_axis == f.grid.points_per_axis
    assert back.grid.half_extent == f.grid.half_extent
    assert np.array_equal(back.values, f.values)


def test_snapshot_header_layout(tmp_path, grid16):
    mu = ll.maxwellian(grid16)
    path = tmp_path / "mu.lgrid"
    ll.save_snapshot(path, mu, gamma=-3.0, time=0.0)
    raw = path.read_bytes()
    head, rest = raw.split(b"\n", 1)
    assert head == b"LANDAU-GRID 1"
    fields = rest.split(b"\n", 1)[0].split()
    assert int(fields[0]) == 16
    payload = rest.split(b"\n", 1)[1]
    assert len(payload) == 8 * 16 ** 3
    # first velocity axis varies fastest in the payload
    first_two = np.frombuffer(payload[:16], dtype="<f8")
    assert first_two[1] == mu.values[1, 0, 0]


def test_snapshot_rejects_truncated(tmp_path, grid16):
    mu = ll.maxwellian(grid16)
    path = tmp_path / "mu.lgrid"
    ll.save_snapshot(path, mu, gamma=-3.0, time=0.0)
    data = path.read_bytes()
    path.write_bytes(data[:-16])
    with pytest.raises(GridConfigError, match="truncated"):
        ll.load_snapshot(path)


def test_score_finite_on_vacuum(grid16):
    vals = np.zeros(grid16.shape)
    vals[5:9, 5:9, 5:9] = 1.0
    f = ll.from_values(grid16, vals)
    for comp in f.score:
        assert np.all(np.isfinite(comp))
