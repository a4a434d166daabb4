"""Scalar and tensor functionals of a distribution.

Covers moments (polynomial, stretched-exponential, weighted L^p norms),
entropy and relative entropy, the entropy dissipation in its two equivalent
pairwise forms, the weighted relative Fisher information, the pressure
tensor with its minimal pairwise Gram determinant, small-set concentration,
and the cross-difference field entering the score reconstruction identities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dist import ENTROPY_CUT, FLOOR, GridDistribution, maxwellian
from .errors import GridConfigError, OverflowGuardError, ParameterDomainError
from .grid import integrate

LOG_2PI = math.log(2.0 * math.pi)
# Largest exponent fed to exp() before the stretched weight is refused.
_EXP_GUARD = 700.0


def poly_moment(f: GridDistribution, ell: float) -> float:
    """Weighted mass integral of <v>^ell = (1 + |v|^2)^(ell/2)."""
    w = f.grid.bracket_sq() ** (0.5 * ell)
    return integrate(f.grid, f.values * w)


def stretched_moment(f: GridDistribution, s: float, kappa: float) -> float:
    """Integral of exp(kappa <v>^s) f; refuses weights that overflow."""
    if s <= 0:
        raise ParameterDomainError(f"stretch exponent must be positive, got {s}")
    bmax = 1.0 + 3.0 * f.grid.half_extent ** 2
    if kappa * bmax ** (0.5 * s) > _EXP_GUARD:
        raise OverflowGuardError(
            f"kappa <v>^s reaches {kappa * bmax ** (0.5 * s):.3g} at the corner; "
            "reduce kappa or the domain half-extent")
    w = np.exp(kappa * f.grid.bracket_sq() ** (0.5 * s))
    return integrate(f.grid, f.values * w)


def stretched_moment_series(f: GridDistribution, s: float, kappa: float,
                            rtol: float = 1e-16, max_terms: int = 400) -> float:
    """Same integral through the series sum_j kappa^j M_{js} / j!.

    Terms are added until they are negligible relative to the partial sum.
    """
    if s <= 0:
        raise ParameterDomainError(f"stretch exponent must be positive, got {s}")
    total = 0.0
    term_w = np.ones_like(f.values)
    bat = f.grid.bracket_sq() ** (0.5 * s)
    coeff = 1.0
    for j in range(max_terms):
        term = coeff * integrate(f.grid, f.values * term_w)
        total += term
        if j > 2 and abs(term) < rtol * abs(total):
            return total
        term_w = term_w * bat
        coeff *= kappa / (j + 1)
    return total


def stretched_moment_in_propagation_window(s: float, kappa: float,
                                           gamma: float) -> bool:
    """Whether (s, kappa) lies in the window where stretched moments propagate
    along the flow: s below the critical exponent (2 on the moderately soft
    range, (gamma+4)/|gamma+1| on the very soft range) with any kappa, or at
    the critical exponent with kappa below 1/(e s_crit)."""
    if not (-4.0 < gamma < 0.0):
        raise ParameterDomainError(f"gamma must lie in (-4, 0), got {gamma}")
    if s <= 0 or kappa <= 0:
        return False
    s_crit = 2.0 if gamma >= -2.0 else (gamma + 4.0) / abs(gamma + 1.0)
    if s < s_crit:
        return True
    if s == s_crit:
        return kappa < 1.0 / (math.e * s_crit)
    return False


def weighted_lp_norm(f: GridDistribution, p: float, q: float) -> float:
    """(integral of |f|^p (1+|v|^2)^(pq/2))^(1/p)."""
    if p < 1:
        raise ParameterDomainError(f"p must be >= 1, got {p}")
    w = f.grid.bracket_sq() ** (0.5 * p * q)
    return integrate(f.grid, np.abs(f.values) ** p * w) ** (1.0 / p)


def _xlogx(values: np.ndarray) -> np.ndarray:
    return np.where(values > ENTROPY_CUT,
                    values * np.log(np.maximum(values, FLOOR)), 0.0)


def entropy(f: GridDistribution) -> float:
    """H(f) = integral of f log f, with x log x taken as 0 below the cut."""
    return integrate(f.grid, _xlogx(f.values))


def maxwellian_entropy() -> float:
    """Closed form H(mu) = -(3/2)(1 + log 2 pi) for the reduced equilibrium."""
    return -1.5 * (1.0 + LOG_2PI)


def relative_entropy(f: GridDistribution, ref: GridDistribution | None = None) -> float:
    """H(f|ref) = integral of f log(f/ref); ref defaults to the sampled reduced Maxwellian."""
    if ref is None:
        ref = maxwellian(f.grid)
    logratio = (np.log(np.maximum(f.values, FLOOR))
                - np.log(np.maximum(ref.values, FLOOR)))
    vals = np.where(f.values > ENTROPY_CUT, f.values * logratio, 0.0)
    return integrate(f.grid, vals)


def dissipation(f: GridDistribution, gamma: float = -3.0) -> float:
    """Entropy dissipation, projection form.

    1/2 double sum over node pairs of w w f f |z|^(gamma+2)
    <P(z)(s_k - s_l), s_k - s_l>, z the velocity difference, P the orthogonal
    projection onto the plane normal to z.  Nonnegative by construction.
    """
    _check_gamma(gamma)
    return kernels.dissipation_projection(f, gamma)


def dissipation_crossform(f: GridDistribution, gamma: float = -3.0) -> float:
    """Entropy dissipation, cross-difference form.

    1/4 double sum of w w f f |z|^gamma sum_{i,j} R_ij^2 with
    R_ij = z_i x_j - z_j x_i; algebraically identical to the projection form
    when both use the same score field.
    """
    _check_gamma(gamma)
    return kernels.dissipation_crossform(f, gamma)


def _check_gamma(gamma: float) -> None:
    if not (-4.0 < gamma <= 0.0):
        raise ParameterDomainError(
            f"interaction exponent must lie in (-4, 0], got {gamma}")


def weighted_fisher(f: GridDistribution, alpha: float) -> float:
    """Relative Fisher information of f against the reduced Maxwellian,
    weighted by <v>^alpha: integral of f |s + v|^2 <v>^alpha."""
    g = f.grid
    sx, sy, sz = f.score
    dev = (sx + g.v1) ** 2 + (sy + g.v2) ** 2 + (sz + g.v3) ** 2
    return integrate(g, f.values * dev * g.bracket_sq() ** (0.5 * alpha))


def pressure_tensor(f: GridDistribution) -> np.ndarray:
    """Second velocity moments P_ij = integral of f v_i v_j (momentum-free f)."""
    g = f.grid
    comps = (g.v1, g.v2, g.v3)
    p = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            p[i, j] = p[j, i] = integrate(g, f.values * comps[i] * comps[j])
    return p


def pressure_gram_min(p: np.ndarray) -> float:
    """Minimal pairwise 2x2 Gram determinant P_ii P_jj - P_ij^2 over i != j."""
    vals = [p[i, i] * p[j, j] - p[i, j] ** 2
            for i in range(3) for j in range(i + 1, 3)]
    return float(min(vals))


def score_cross_component(f: GridDistribution, k, l, i: int, j: int) -> float:
    """Cross difference R_ij(v_k, v_l) of grid nodes k and l (multi-indices).

    R_ij = (v_i - w_i)(s_j(v) - s_j(w)) - (v_j - w_j)(s_i(v) - s_i(w));
    antisymmetric in (i, j), symmetric under swapping the two nodes.
    """
    if i == j:
        raise ParameterDomainError("component indices must differ")
    g = f.grid
    comps = (g.v1, g.v2, g.v3)
    s = f.score
    k = tuple(k)
    l = tuple(l)
    return float(
        (comps[i][k] - comps[i][l]) * (s[j][k] - s[j][l])
        - (comps[j][k] - comps[j][l]) * (s[i][k] - s[i][l]))


def concentration(f: GridDistribution, q: float) -> float:
    """Largest mass of f carried by a set of measure <= q.

    Exact on the lattice: node cells are sorted by density and filled
    greedily, the last cell with a fractional share of its weight.
    """
    if q < 0:
        raise ParameterDomainError(f"set measure must be >= 0, got {q}")
    vals = f.values.ravel()
    w = f.grid.weights.ravel()
    order = np.argsort(vals, kind="stable")[::-1]
    vals = vals[order]
    w = w[order]
    cum = np.cumsum(w)
    if q >= cum[-1]:
        return float(np.dot(vals, w))
    idx = int(np.searchsorted(cum, q, side="left"))
    full = float(np.dot(vals[:idx], w[:idx]))
    used = cum[idx - 1] if idx > 0 else 0.0
    return full + float(vals[idx]) * (q - float(used))


def partition_factors(f: GridDistribution) -> tuple[float, float]:
    """Normalizers of the tilted pair: (integral of <v>^-3 mu, integral of <v>^-3 f)."""
    g = f.grid
    w = g.bracket_sq() ** -1.5
    mu = maxwellian(g)
    return integrate(g, w * mu.values), integrate(g, w * f.values)


@dataclass
class FunctionalReport:
    """Every scalar functional of one distribution, JSON/CSV exportable."""

    mass: float
    momentum: list[float]
    energy: float
    entropy: float
    relative_entropy: float
    dissipation: float
    fisher: dict[str, float]
    poly_moments: dict[str, float]
    exp_moments: dict[str, float]
    pressure: list[list[float]]
    pressure_gram_min: float
    l3_norm: float
    z_mu: float
    z_f: float
    gamma: float

    def to_json(self) -> str:
        return json.dumps(self.__dict__, sort_keys=True)

    @staticmethod
    def csv_header() -> str:
        return ("mass,mom1,mom2,mom3,energy,entropy,relative_entropy,"
                "dissipation,fisher_m3,m5,pressure_gram_min,l3_norm,z_mu,z_f")

    def to_csv_row(self) -> str:
        return ",".join(repr(x) for x in (
            self.mass, *self.momentum, self.energy, self.entropy,
            self.relative_entropy, self.dissipation,
            self.fisher.get("-3.0", float("nan")),
            self.poly_moments.get("5.0", float("nan")),
            self.pressure_gram_min, self.l3_norm, self.z_mu, self.z_f))


def report(f: GridDistribution, gamma: float = -3.0,
           alphas=(-3.0, 0.0), ells=(0.0, 2.0, 5.0),
           exp_params=((1.0, 0.1),)) -> FunctionalReport:
    """Evaluate the full functional battery on one distribution.

    Checks the structural invariants (nonnegative dissipation and relative
    entropy, trace of the pressure equal to the energy) before returning.
    """
    p = pressure_tensor(f)
    rep = FunctionalReport(
        mass=f.mass(),
        momentum=[float(x) for x in f.momentum()],
        energy=f.energy(),
        entropy=entropy(f),
        relative_entropy=relative_entropy(f),
        dissipation=dissipation(f, gamma),
        fisher={str(a): weighted_fisher(f, a) for a in alphas},
        poly_moments={str(l): poly_moment(f, l) for l in ells},
        exp_moments={f"{s}:{k}": stretched_moment(f, s, k) for s, k in exp_params},
        pressure=[[float(p[i, j]) for j in range(3)] for i in range(3)],
        pressure_gram_min=pressure_gram_min(p),
        l3_norm=weighted_lp_norm(f, 3.0, -3.0),
        z_mu=partition_factors(f)[0],
        z_f=partition_factors(f)[1],
        gamma=gamma,
    )
    _validate_report(rep)
    return rep


def _validate_report(rep: FunctionalReport) -> None:
    flat = [rep.mass, *rep.momentum, rep.energy, rep.entropy,
            rep.relative_entropy, rep.dissipation, rep.pressure_gram_min,
            rep.l3_norm, rep.z_mu, rep.z_f]
    flat += list(rep.fisher.values()) + list(rep.poly_moments.values())
    flat += list(rep.exp_moments.values())
    if not all(math.isfinite(x) for x in flat):
        raise GridConfigError("functional report contains non-finite entries")
    if rep.dissipation < -1e-12:
        raise GridConfigError(f"dissipation must be >= 0, got {rep.dissipation}")
    if rep.relative_entropy < -1e-8:
        raise GridConfigError(
            f"relative entropy must be >= 0, got {rep.relative_entropy}")
    trace = rep.pressure[0][0] + rep.pressure[1][1] + rep.pressure[2][2]
    if abs(trace - rep.energy) > 1e-8 * max(1.0, abs(rep.energy)):
        raise GridConfigError(
            f"pressure trace {trace} deviates from energy {rep.energy}")
