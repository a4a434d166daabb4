"""Distributions on a velocity grid: Maxwellians, Gaussian mixtures, normalization.

A `GridDistribution` is a nonnegative density sampled at the lattice nodes,
optionally backed by an analytic Gaussian-mixture profile.  The profile makes
the normalizing affine rescaling exact (mixtures are closed under affine maps
of velocity); grid-only data fall back to interpolated resampling.

The score field grad(f)/f is realized as the finite-difference gradient of
log(max(f, FLOOR)).  The floor enters only inside the logarithm, never the
density itself, so moments stay exact while scores remain finite on tails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import grid as gridmod
from .errors import DegenerateDistributionError, GridConfigError, NonFiniteFieldError
from .grid import VelocityGrid, build_grid, gradient, integrate

# Positivity floor used inside logarithms / scores only.
FLOOR = 1e-300
# Below this density, x log x contributions are taken as zero.
ENTROPY_CUT = 1e-30

SNAPSHOT_MAGIC = "LANDAU-GRID"
SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class Maxwellian:
    """Gaussian equilibrium with density rho, mean velocity u and temperature T."""

    density: float
    mean_velocity: tuple[float, float, float]
    temperature: float

    def __post_init__(self):
        if self.temperature <= 0:
            raise GridConfigError(
                f"temperature must be positive, got {self.temperature}")
        if self.density < 0:
            raise GridConfigError(f"density must be >= 0, got {self.density}")

    def __call__(self, v1, v2, v3):
        u = self.mean_velocity
        t = self.temperature
        q = (v1 - u[0]) ** 2 + (v2 - u[1]) ** 2 + (v3 - u[2]) ** 2
        return self.density * (2.0 * math.pi * t) ** -1.5 * np.exp(-q / (2.0 * t))


@dataclass(frozen=True)
class GaussianComponent:
    """One mixture component: weight, mean, per-axis temperatures."""

    weight: float
    mean: tuple[float, float, float]
    temps: tuple[float, float, float]

    def evaluate(self, v1, v2, v3):
        t1, t2, t3 = self.temps
        norm = (2.0 * math.pi) ** -1.5 / math.sqrt(t1 * t2 * t3)
        q = ((v1 - self.mean[0]) ** 2 / t1
             + (v2 - self.mean[1]) ** 2 / t2
             + (v3 - self.mean[2]) ** 2 / t3)
        return self.weight * norm * np.exp(-0.5 * q)


def _sample_components(grid: VelocityGrid, comps) -> np.ndarray:
    out = np.zeros(grid.shape)
    for c in comps:
        out += c.evaluate(grid.v1, grid.v2, grid.v3)
    return out


class GridDistribution:
    """Nonnegative density on a `VelocityGrid`, with a cached score field."""

    def __init__(self, grid: VelocityGrid, values: np.ndarray,
                 components: tuple[GaussianComponent, ...] | None = None):
        if values.shape != grid.shape:
            raise GridConfigError(
                f"values shape {values.shape} does not match grid {grid.shape}")
        if not np.all(np.isfinite(values)):
            raise NonFiniteFieldError("density contains non-finite values")
        if values.min() < 0:
            raise GridConfigError(
                f"density must be nonnegative, min = {values.min()}")
        self.grid = grid
        self.values = values
        self.components = components
        self._score = None

    @property
    def score(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """grad(f)/f, computed as the discrete gradient of log(max(f, FLOOR))."""
        if self._score is None:
            logf = np.log(np.maximum(self.values, FLOOR))
            self._score = gradient(self.grid, logf)
        return self._score

    def mass(self) -> float:
        return integrate(self.grid, self.values)

    def momentum(self) -> np.ndarray:
        g = self.grid
        return np.array([
            integrate(g, self.values * g.v1),
            integrate(g, self.values * g.v2),
            integrate(g, self.values * g.v3),
        ])

    def energy(self) -> float:
        return integrate(self.grid, self.values * self.grid.vsq)

    def with_values(self, values: np.ndarray,
                    components=None) -> "GridDistribution":
        return GridDistribution(self.grid, values, components)


def maxwellian(grid: VelocityGrid, rho: float = 1.0,
               u: tuple[float, float, float] = (0.0, 0.0, 0.0),
               temperature: float = 1.0) -> GridDistribution:
    """Sample the Maxwellian mu_{rho,u,T} at the nodes."""
    m = Maxwellian(rho, tuple(float(x) for x in u), float(temperature))
    comp = GaussianComponent(rho, m.mean_velocity, (temperature,) * 3)
    return GridDistribution(grid, m(grid.v1, grid.v2, grid.v3), (comp,))


def anisotropic_gaussian(grid: VelocityGrid, t1: float, t2: float,
                         t3: float) -> GridDistribution:
    """Centred Gaussian with diagonal temperature matrix diag(t1, t2, t3)."""
    if min(t1, t2, t3) <= 0:
        raise GridConfigError(
            f"temperatures must be positive, got {(t1, t2, t3)}")
    comp = GaussianComponent(1.0, (0.0, 0.0, 0.0),
                             (float(t1), float(t2), float(t3)))
    return GridDistribution(grid, comp.evaluate(grid.v1, grid.v2, grid.v3), (comp,))


def gaussian_mixture(grid: VelocityGrid, components) -> GridDistribution:
    """Weighted sum of Gaussians; components are (weight, mean, temps) triples.

    `temps` may be a scalar (isotropic component) or a 3-sequence.
    """
    if not components:
        raise GridConfigError("mixture needs at least one component")
    comps = []
    for w, u, t in components:
        if w <= 0:
            raise GridConfigError(f"component weight must be positive, got {w}")
        temps = (float(t),) * 3 if np.isscalar(t) else tuple(float(x) for x in t)
        if min(temps) <= 0:
            raise GridConfigError(f"temperatures must be positive, got {temps}")
        comps.append(GaussianComponent(float(w), tuple(float(x) for x in u), temps))
    comps = tuple(comps)
    return GridDistribution(grid, _sample_components(grid, comps), comps)


def from_values(grid: VelocityGrid, values: np.ndarray) -> GridDistribution:
    """Wrap raw node values (no analytic profile)."""
    return GridDistribution(grid, np.asarray(values, dtype=float))


def _discrete_frame(f: GridDistribution):
    m = f.mass()
    if m <= 0:
        raise DegenerateDistributionError(f"mass must be positive, got {m}")
    u = f.momentum() / m
    t = (f.energy() / m - float(u @ u)) / 3.0
    if t <= 1e-14:
        raise DegenerateDistributionError(
            f"temperature about the mean must be positive, got {t}")
    return m, u, t


def _transform_components(comps, m, u, t):
    # g(v) = m^-1 t^(3/2) f(sqrt(t) v + u) maps each Gaussian to a Gaussian.
    st = math.sqrt(t)
    out = []
    for c in comps:
        out.append(GaussianComponent(
            c.weight / m,
            tuple((c.mean[k] - u[k]) / st for k in range(3)),
            tuple(tt / t for tt in c.temps),
        ))
    return tuple(out)


def _moments_close(f: GridDistribution, tol: float) -> bool:
    return (abs(f.mass() - 1.0) < tol
            and np.abs(f.momentum()).max() < tol
            and abs(f.energy() - 3.0) < tol)


def normalize(f: GridDistribution, tol: float = 1e-10,
              max_iter: int = 40) -> GridDistribution:
    """Affine velocity rescaling to discrete moments (mass, momentum, energy) = (1, 0, 3).

    Iterates g(v) = rho^-1 T^(3/2) f(sqrt(T) v + u) on the discrete frame
    (exactly on the mixture parameters when a profile is present, by
    interpolated resampling otherwise), then applies a final multiplicative
    mass fix.
    """
    grid = f.grid
    inner = 0.25 * tol
    cur = f
    if f.components is not None:
        comps = f.components
        for _ in range(max_iter):
            if _moments_close(cur, inner):
                break
            m, u, t = _discrete_frame(cur)
            comps = _transform_components(comps, m, u, t)
            cur = GridDistribution(grid, _sample_components(grid, comps), comps)
        m = cur.mass()
        vals = cur.values / m
        comps = tuple(GaussianComponent(c.weight / m, c.mean, c.temps) for c in comps)
        return GridDistribution(grid, vals, comps)

    # Grid-only path: resample the original values through one accumulated
    # affine map per iteration (single interpolation, no cumulative smearing).
    # The moment response of the interpolated field overshoots, so the
    # corrections are under-relaxed.
    from scipy.interpolate import RegularGridInterpolator

    interp = RegularGridInterpolator(
        (grid.axis, grid.axis, grid.axis), f.values,
        method="linear", bounds_error=False, fill_value=0.0)
    relax = 0.6
    scale, shift, amp = 1.0, np.zeros(3), 1.0
    for _ in range(3 * max_iter):
        if _moments_close(cur, inner):
            break
        m, u, t = _discrete_frame(cur)
        td = t ** relax
        std = math.sqrt(td)
        shift = scale * (relax * u) + shift
        scale = scale * std
        amp = amp * (td ** 1.5 / m ** relax)
        pts = np.stack([
            scale * grid.v1.ravel() + shift[0],
            scale * grid.v2.ravel() + shift[1],
            scale * grid.v3.ravel() + shift[2],
        ], axis=1)
        vals = amp * interp(pts).reshape(grid.shape)
        cur = GridDistribution(grid, np.maximum(vals, 0.0))
    return GridDistribution(grid, cur.values / cur.mass())


def _discrete_entropy(grid: VelocityGrid, values: np.ndarray) -> float:
    x = values
    y = np.where(x > ENTROPY_CUT, x * np.log(np.maximum(x, FLOOR)), 0.0)
    return integrate(grid, y)


def random_corpus(grid: VelocityGrid, seed: int, count: int,
                  entropy_bound: float = 0.0):
    """Seed-deterministic list of normalized mixtures with entropy <= bound.

    Draws mixtures of 1..4 anisotropic Gaussians with randomized means and
    temperatures, normalizes each, and keeps those with discrete entropy
    below the bound.  Fails loudly when fewer than `count` draws are
    admissible within 100*count attempts.
    """
    if count < 1:
        raise GridConfigError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    out = []
    rejected = 0
    attempts = 0
    while len(out) < count:
        if attempts >= 100 * count:
            raise DegenerateDistributionError(
                f"only {len(out)} of {count} draws admissible after {attempts} "
                f"attempts (entropy bound {entropy_bound}, {rejected} rejected)")
        attempts += 1
        ncomp = int(rng.integers(1, 5))
        weights = rng.dirichlet(np.ones(ncomp))
        means = rng.uniform(-1.2, 1.2, size=(ncomp, 3))
        temps = rng.uniform(0.35, 1.8, size=(ncomp, 3))
        comps = [(weights[i], means[i], temps[i]) for i in range(ncomp)]
        cand = normalize(gaussian_mixture(grid, comps))
        if _discrete_entropy(grid, cand.values) <= entropy_bound:
            out.append(cand)
        else:
            rejected += 1
    return out


def save_snapshot(path, dist: GridDistribution, gamma: float, time: float) -> None:
    """Write the LANDAU-GRID v1 snapshot format (bit-exact round-trip).

    ASCII header `LANDAU-GRID 1`, then `N L gamma time`, then N^3 little-endian
    float64 node values with the first velocity axis varying fastest.
    """
    g = dist.grid
    header = (f"{SNAPSHOT_MAGIC} {SNAPSHOT_VERSION}\n"
              f"{g.points_per_axis} {g.half_extent!r} {float(gamma)!r} {float(time)!r}\n")
    payload = np.ascontiguousarray(
        dist.values.ravel(order="F"), dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(payload)


def load_snapshot(path):
    """Read a LANDAU-GRID v1 file; returns (GridDistribution, gamma, time)."""
    with open(path, "rb") as fh:
        magic = fh.readline().decode("ascii").split()
        if magic[:1] != [SNAPSHOT_MAGIC] or magic[1:] != [str(SNAPSHOT_VERSION)]:
            raise GridConfigError(f"not a {SNAPSHOT_MAGIC} {SNAPSHOT_VERSION} file: {path}")
        fields = fh.readline().decode("ascii").split()
        n, L, gamma, time = int(fields[0]), float(fields[1]), float(fields[2]), float(fields[3])
        raw = fh.read(8 * n ** 3)
    if len(raw) != 8 * n ** 3:
        raise GridConfigError(f"truncated snapshot payload in {path}")
    vals = np.frombuffer(raw, dtype="<f8").reshape((n, n, n), order="F").copy()
    return GridDistribution(build_grid(L, n), vals), gamma, time
