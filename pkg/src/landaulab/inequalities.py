"""Empirical verification of the functional inequalities on concrete densities.

Each check evaluates both sides of one estimate on given distributions and
reports the observed constant in place of the existence-grade constant of
the theory.  Only signs, finiteness and the few genuinely explicit numbers
(3456, 5/8, 2^-34 3^-4 e^(-16 Hbar), 2^-11/2) are asserted; everything else
is recorded for inspection.  Orientation is fixed per check: `holds` always
means lhs >= rhs - tolerance in the orientation stored on the verdict.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import functionals as fun
from . import kernels
from .dist import ENTROPY_CUT, FLOOR, GridDistribution, maxwellian
from .errors import InsufficientDataError, ParameterDomainError
from .grid import integrate

EXPLICIT_PROP32_CONSTANT = 3456.0
HESSIAN_LOWER_BOUND = 5.0 / 8.0
Z_LOWER_BOUND = 2.0 ** -5.5


@dataclass
class InequalityVerdict:
    """One inequality evaluated on one input set."""

    name: str
    lhs: float
    rhs: float
    empirical_constant: float
    holds: bool
    inputs_digest: str
    tolerance: float
    vacuous: bool = False
    details: dict = field(default_factory=dict)

    def to_json_line(self) -> str:
        payload = dict(self.__dict__)
        payload["details"] = _jsonable(self.details)
        return json.dumps(payload, sort_keys=True)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    return obj


def digest(dists) -> str:
    """Deterministic identifier of one or more distributions."""
    if isinstance(dists, GridDistribution):
        dists = [dists]
    h = hashlib.sha256()
    for d in dists:
        g = d.grid
        h.update(f"{g.points_per_axis}:{g.half_extent!r};".encode())
        h.update(d.values.tobytes())
    return h.hexdigest()[:16]


def write_verdicts(path, verdicts) -> None:
    with open(path, "w") as fh:
        for v in verdicts:
            fh.write(v.to_json_line() + "\n")


def summary_table(verdicts) -> str:
    lines = [f"{'check':<12} {'holds':<7} {'vacuous':<8} {'lhs':>13} {'rhs':>13} {'constant':>13}"]
    for v in verdicts:
        lines.append(
            f"{v.name:<12} {str(v.holds):<7} {str(v.vacuous):<8} "
            f"{v.lhs:>13.6g} {v.rhs:>13.6g} {v.empirical_constant:>13.6g}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# dissipation lower bound by the weighted relative Fisher information
# ---------------------------------------------------------------------------

def check_entropy_dissipation_bound(corpus, gamma: float = -3.0,
                                    fisher_floor: float = 1e-12) -> InequalityVerdict:
    """min over the corpus of D(f) M_{2-gamma}(f) / I_gamma(f|mu) > 0.

    Members whose weighted Fisher information is below the floor are skipped
    as equilibria (never counted as failures).
    """
    rows = []
    skipped = 0
    for f in corpus:
        fisher = fun.weighted_fisher(f, gamma)
        if fisher < fisher_floor:
            skipped += 1
            continue
        d = fun.dissipation(f, gamma)
        m = fun.poly_moment(f, 2.0 - gamma)
        rows.append((fun.entropy(f), d * m / fisher, d, m, fisher))
    if not rows:
        return InequalityVerdict(
            name="entropy", lhs=math.nan, rhs=0.0, empirical_constant=math.nan,
            holds=True, vacuous=True, inputs_digest=digest(corpus),
            tolerance=0.0, details={"skipped_as_equilibrium": skipped,
                                    "note": "all members at equilibrium"})
    ratios = [r[1] for r in rows]
    cmin = float(min(ratios))
    return InequalityVerdict(
        name="entropy", lhs=cmin, rhs=0.0, empirical_constant=cmin,
        holds=cmin > 0.0, inputs_digest=digest(corpus), tolerance=0.0,
        details={"skipped_as_equilibrium": skipped,
                 "ratio_vs_entropy": [(r[0], r[1]) for r in rows],
                 "gamma": gamma})


# ---------------------------------------------------------------------------
# weak Cercignani variant
# ---------------------------------------------------------------------------

def check_cercignani(f: GridDistribution, R: float,
                     tol: float = 1e-12) -> InequalityVerdict:
    """Two sub-checks of the tilted entropy lower bound at the Coulomb exponent.

    (1) D M5 >= c * integral of {f log((Z1/Z2) f/mu) + (Z2/Z1) mu - f} <v>^-3,
        whose integrand is pointwise nonnegative after the tilt substitution;
    (2) the cut-off variant with the three tail terms at radius R, using
        C = 2^(11/2) for the unnamed absolute constant (valid because
        2^-11/2 <= Z1, Z2 <= 1).
    """
    if R <= 1.0:
        raise ParameterDomainError(f"cutoff radius must exceed 1, got {R}")
    g = f.grid
    mu = maxwellian(g)
    z1, z2 = fun.partition_factors(f)
    z_ok = (Z_LOWER_BOUND - tol <= z1 <= 1.0 + tol
            and Z_LOWER_BOUND - tol <= z2 <= 1.0 + tol)

    wm3 = g.bracket_sq() ** -1.5
    logratio = (np.log(np.maximum(f.values, FLOOR))
                - np.log(np.maximum(mu.values, FLOOR)) + math.log(z1 / z2))
    integrand = np.where(
        f.values > ENTROPY_CUT, f.values * logratio, 0.0) \
        + (z2 / z1) * mu.values - f.values
    tilted = integrate(g, integrand * wm3)
    # pointwise x log x + 1 - x >= 0 with x = (Z1 f)/(Z2 mu)
    x = (z1 / z2) * f.values / np.maximum(mu.values, FLOOR)
    nodewise = np.where(x > 0, x * np.log(np.maximum(x, FLOOR)) + 1.0 - x, 1.0)
    nodewise_min = float(nodewise.min())

    d = fun.dissipation(f, -3.0)
    m5 = fun.poly_moment(f, 5.0)
    c_cc = d * m5 / tilted if tilted > 1e-14 else math.nan
    cc_vacuous = tilted <= 1e-14

    cbig = 2.0 ** 5.5
    tail = g.bracket_sq() >= R * R
    relh = fun.relative_entropy(f)
    tail_flogf = integrate(g, np.where(tail, fun._xlogx(f.values), 0.0))
    tail_weighted = integrate(g, np.where(tail, g.bracket_sq() * f.values, 0.0))
    tail_mu = integrate(g, np.where(tail, mu.values, 0.0))
    bracket = relh - tail_flogf - cbig * tail_weighted - cbig * tail_mu
    c_cut = d * m5 * R ** 3 / bracket if bracket > 1e-14 else math.nan
    cut_vacuous = bracket <= 1e-14

    holds = bool(z_ok and nodewise_min >= -tol
                 and (cc_vacuous or c_cc >= 0.0)
                 and (cut_vacuous or c_cut >= 0.0 or d >= 0.0))
    return InequalityVerdict(
        name="cercignani", lhs=d * m5, rhs=tilted,
        empirical_constant=c_cc if not cc_vacuous else math.nan,
        holds=holds, vacuous=cc_vacuous and cut_vacuous,
        inputs_digest=digest(f), tolerance=tol,
        details={"z1": z1, "z2": z2, "z_lower_bound": Z_LOWER_BOUND,
                 "z_bounds_hold": z_ok,
                 "nodewise_min": nodewise_min,
                 "tilted_integral": tilted,
                 "cutoff_R": R, "cutoff_bracket": bracket,
                 "cutoff_constant": c_cut,
                 "tail_terms": {"f_log_f": tail_flogf,
                                "weighted_mass": tail_weighted,
                                "mu_mass": tail_mu},
                 "inner_constant": cbig})


# ---------------------------------------------------------------------------
# integrability estimate
# ---------------------------------------------------------------------------

def check_l3_regularity(corpus) -> InequalityVerdict:
    """Empirical C0 = max of ||f||_{L^3_-3} / (1 + D(f)) over the corpus."""
    ratios = []
    for f in corpus:
        norm = fun.weighted_lp_norm(f, 3.0, -3.0)
        d = fun.dissipation(f, -3.0)
        ratios.append(norm / (1.0 + d))
    c0 = float(max(ratios))
    return InequalityVerdict(
        name="l3", lhs=c0, rhs=0.0, empirical_constant=c0,
        holds=math.isfinite(c0), inputs_digest=digest(corpus),
        tolerance=0.0, details={"ratios": ratios})


# ---------------------------------------------------------------------------
# score reconstruction from the cross-difference field
# ---------------------------------------------------------------------------

def _moment_table(f: GridDistribution, i: int, j: int) -> dict:
    g = f.grid
    comps = (g.v1, g.v2, g.v3)
    s = f.score
    tab = {}
    for (name, fld) in (("1", None), ("wi", comps[i]), ("wj", comps[j])):
        for (sname, sfld) in (("", None), ("si", s[i]), ("sj", s[j])):
            w = f.values
            if fld is not None:
                w = w * fld
            if sfld is not None:
                w = w * sfld
            tab[name + sname] = integrate(g, w)
    return tab


def _cross_integral_fields(f: GridDistribution, i: int, j: int,
                           c0: float, ci: float, cj: float) -> np.ndarray:
    """integral of R_ij(v, w) f(w) (c0 + ci w_i + cj w_j) dw at every node v.

    Expanded into single quadratures of moment weights; algebraically equal
    to the brute-force pair sum (`kernels.cross_weighted_sum`).
    """
    g = f.grid
    comps = (g.v1, g.v2, g.v3)
    s = f.score
    tab = _moment_table(f, i, j)

    def mom(base: str) -> float:  # base in {"1","wi","wj"} x {"","si","sj"}
        return tab[base]

    m_phi = c0 * mom("1") + ci * mom("wi") + cj * mom("wj")
    m_si_phi = c0 * mom("1si") + ci * mom("wisi") + cj * mom("wjsi")
    m_sj_phi = c0 * mom("1sj") + ci * mom("wisj") + cj * mom("wjsj")
    # second-order weights w_a * phi
    g2 = {}
    for a, fld in (("wi", comps[i]), ("wj", comps[j])):
        base = f.values * fld
        g2[a + "phi"] = integrate(g, base * (c0 + ci * comps[i] + cj * comps[j]))
        g2[a + "si_phi"] = integrate(g, base * s[i] * (c0 + ci * comps[i] + cj * comps[j]))
        g2[a + "sj_phi"] = integrate(g, base * s[j] * (c0 + ci * comps[i] + cj * comps[j]))
    vi, vj = comps[i], comps[j]
    si, sj = s[i], s[j]
    return ((vi * sj - vj * si) * m_phi
            - vi * m_sj_phi + vj * m_si_phi
            - sj * g2["wiphi"] + si * g2["wjphi"]
            + g2["wisj_phi"] - g2["wjsi_phi"])


def check_score_reconstruction(f: GridDistribution, min_density: float = 1e-8,
                               degenerate_tol: float = 1e-8) -> InequalityVerdict:
    """Rebuild the score components from the cross-difference integrals.

    For each axis pair (i, j) with non-degenerate pressure denominator the
    two Cramer formulas and their cross combination are evaluated at every
    interior node and compared against the direct finite-difference score.
    Errors are sup-norm deviations relative to the sup of the direct field
    over the compared nodes.
    """
    g = f.grid
    p = fun.pressure_tensor(f)
    comps = (g.v1, g.v2, g.v3)
    s = f.score
    inner = (slice(1, -1),) * 3
    mask = f.values[inner] > min_density
    if not mask.any():
        raise InsufficientDataError("no interior nodes above the density cut")
    errors = {}
    skipped = []
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            denom = p[i, j] ** 2 - p[i, i] * p[j, j]
            if abs(denom) < degenerate_tol:
                skipped.append((i, j))
                continue
            int_i = _cross_integral_fields(f, i, j, 0.0, p[i, j], -p[i, i])
            int_j = _cross_integral_fields(f, i, j, 0.0, p[j, j], -p[i, j])
            int_c = _cross_integral_fields(f, i, j, 1.0, 0.0, 0.0)
            rec_i = (comps[j] * p[i, j] + comps[i] * p[i, i] + int_i) / denom
            rec_j = (comps[i] * p[i, j] + comps[j] * p[j, j] + int_j) / denom
            rec_c = int_c
            ref_c = comps[i] * s[j] - comps[j] * s[i]
            for tag, rec, ref in (("si", rec_i, s[i]), ("sj", rec_j, s[j]),
                                  ("cross", rec_c, ref_c)):
                diff = np.abs(rec[inner] - ref[inner])[mask].max()
                scale = max(np.abs(ref[inner])[mask].max(), 1e-30)
                errors[f"{tag}_{i}{j}"] = float(diff / scale)
    worst = max(errors.values()) if errors else math.nan
    return InequalityVerdict(
        name="prop31", lhs=worst, rhs=0.0, empirical_constant=worst,
        holds=bool(errors) and math.isfinite(worst),
        inputs_digest=digest(f), tolerance=degenerate_tol,
        details={"errors": errors, "skipped_pairs": skipped,
                 "compared_nodes": int(mask.sum())})


# ---------------------------------------------------------------------------
# Fisher information bounded by pressure defects and dissipation
# ---------------------------------------------------------------------------

def check_fisher_pressure_bound(f: GridDistribution,
                                rel_tol: float = 1e-9) -> InequalityVerdict:
    """I_-3(f|mu) <= 3456 Delta^-2 (sup P_ij^2 + sup |P_jj - 1|^2 + M5 D)."""
    p = fun.pressure_tensor(f)
    delta = fun.pressure_gram_min(p)
    off = max(p[i, j] ** 2 for i in range(3) for j in range(3) if i != j)
    diag = max((p[j, j] - 1.0) ** 2 for j in range(3))
    m5 = fun.poly_moment(f, 5.0)
    d = fun.dissipation(f, -3.0)
    lhs = fun.weighted_fisher(f, -3.0)
    rhs = EXPLICIT_PROP32_CONSTANT * delta ** -2 * (off + diag + m5 * d)
    holds = lhs <= rhs * (1.0 + rel_tol) + 1e-12
    return InequalityVerdict(
        name="prop32", lhs=lhs, rhs=rhs, empirical_constant=EXPLICIT_PROP32_CONSTANT,
        holds=bool(holds), inputs_digest=digest(f), tolerance=rel_tol,
        details={"delta": delta, "sup_offdiag_sq": off, "sup_diag_defect_sq": diag,
                 "m5": m5, "dissipation": d, "slack": rhs - lhs})


# ---------------------------------------------------------------------------
# pressure defect bounds and the explicit Gram-determinant floor
# ---------------------------------------------------------------------------

def delta_lower_constant(entropy_bound: float) -> float:
    """Explicit floor 2^-34 3^-4 exp(-16 Hbar) on the minimal Gram determinant."""
    return 2.0 ** -34 * 3.0 ** -4 * math.exp(-16.0 * entropy_bound)


def check_pressure_defect_bounds(corpus, entropy_bound: float,
                                 dissipation_floor: float = 1e-14) -> InequalityVerdict:
    """Explicit Gram floor plus empirical constants of the two defect bounds.

    Verifies Delta_f >= 2^-34 3^-4 exp(-16 Hbar) for every member, records
    the smallest constants C with sup P_ij^2 <= C M5 D and
    sup |P_ii - P_jj|^2 <= C M5 D, and checks the trace-reduction inequality
    sup_j |P_jj - 1| <= (2/3) sup_{i != j} |P_ii - P_jj|.
    """
    floor = delta_lower_constant(entropy_bound)
    deltas = []
    c_off = 0.0
    c_diag = 0.0
    trace_ok = True
    skipped = 0
    for f in corpus:
        p = fun.pressure_tensor(f)
        delta = fun.pressure_gram_min(p)
        deltas.append(delta)
        off = max(p[i, j] ** 2 for i in range(3) for j in range(3) if i != j)
        gap = max(abs(p[i, i] - p[j, j])
                  for i in range(3) for j in range(3) if i != j)
        diag = max(abs(p[j, j] - 1.0) for j in range(3))
        # trace identity reduction; trace(P) = energy = 3 after normalization
        if diag > (2.0 / 3.0) * gap + 1e-8:
            trace_ok = False
        md = fun.poly_moment(f, 5.0) * fun.dissipation(f, -3.0)
        if md > dissipation_floor:
            c_off = max(c_off, off / md)
            c_diag = max(c_diag, gap ** 2 / md)
        else:
            skipped += 1
    dmin = float(min(deltas))
    holds = dmin >= floor and trace_ok
    return InequalityVerdict(
        name="prop33", lhs=dmin, rhs=floor, empirical_constant=max(c_off, c_diag),
        holds=bool(holds), inputs_digest=digest(corpus), tolerance=0.0,
        details={"delta_floor": floor, "delta_min": dmin, "delta_max": float(max(deltas)),
                 "c_offdiag": c_off, "c_diag_gap": c_diag,
                 "trace_reduction_holds": trace_ok,
                 "skipped_near_equilibrium": skipped,
                 "entropy_bound": entropy_bound})


# ---------------------------------------------------------------------------
# minimal angular quadratic functional
# ---------------------------------------------------------------------------

def angular_min_functional(f: GridDistribution, i: int, j: int,
                           n_phi: int = 64) -> float:
    """min over phi of integral f <v>^-5 |(v_i^2 - v_j^2) cos phi + 2 v_i v_j sin phi|^2.

    The integrand is a degree-two trigonometric polynomial in phi, so the
    uniform n_phi grid over-resolves it; the returned value is the exact
    minimum of the polynomial recovered from three weight quadratures.
    """
    if i == j:
        raise ParameterDomainError("component indices must differ")
    if n_phi < 16:
        raise ParameterDomainError(f"n_phi must be >= 16, got {n_phi}")
    c0, c1, c2 = _angular_coeffs(f, i, j)
    return float(c0 - math.hypot(c1, c2))


def _angular_coeffs(f: GridDistribution, i: int, j: int):
    g = f.grid
    comps = (g.v1, g.v2, g.v3)
    a = comps[i] ** 2 - comps[j] ** 2
    b = 2.0 * comps[i] * comps[j]
    w = f.values * g.bracket_sq() ** -2.5
    ma2 = integrate(g, w * a * a)
    mab = integrate(g, w * a * b)
    mb2 = integrate(g, w * b * b)
    return 0.5 * (ma2 + mb2), 0.5 * (ma2 - mb2), mab


def angular_profile(f: GridDistribution, i: int, j: int, n_phi: int = 64):
    """The angular functional sampled on the uniform phi grid."""
    c0, c1, c2 = _angular_coeffs(f, i, j)
    phi = np.linspace(0.0, 2.0 * math.pi, n_phi, endpoint=False)
    return phi, c0 + c1 * np.cos(2.0 * phi) + c2 * np.sin(2.0 * phi)


def check_angular_lower_bound(f: GridDistribution, i: int = 0, j: int = 1,
                              n_phi: int = 64) -> InequalityVerdict:
    """Weighted integral >= S_f [P_ij^2 + (P_jj - P_ii)^2 / 4]."""
    p = fun.pressure_tensor(f)
    pij = p[i, j]
    q = p[j, j] - p[i, i]
    c0, c1, c2 = _angular_coeffs(f, i, j)
    sf = float(c0 - math.hypot(c1, c2))
    lhs = pij ** 2 * (c0 + c1) + pij * q * c2 + 0.25 * q ** 2 * (c0 - c1)
    rhs = sf * (pij ** 2 + 0.25 * q ** 2)
    holds = lhs >= rhs - 1e-12 * max(1.0, abs(rhs))
    _, profile = angular_profile(f, i, j, n_phi)
    return InequalityVerdict(
        name="angular", lhs=lhs, rhs=rhs, empirical_constant=sf,
        holds=bool(holds), inputs_digest=digest(f), tolerance=1e-12,
        details={"s_min": sf, "phi_spread": float(profile.max() - profile.min()),
                 "pair": (i, j)})


# ---------------------------------------------------------------------------
# uniform convexity of the tilted log-density
# ---------------------------------------------------------------------------

def tilted_hessian(v: np.ndarray) -> np.ndarray:
    """Hessian of |v|^2/2 + (3/2) log(1 + |v|^2) at velocities v (batched)."""
    v = np.atleast_2d(v)
    br = 1.0 + (v ** 2).sum(axis=1)
    eye = np.eye(3)[None, :, :]
    outer = v[:, :, None] * v[:, None, :]
    return ((1.0 + 3.0 / br)[:, None, None] * eye
            - (6.0 / br ** 2)[:, None, None] * outer)


def hessian_scalar_form(z: np.ndarray) -> np.ndarray:
    """(z^2 - z + 4)/(1 + z)^2, the radial eigenvalue profile at z = |v|^2."""
    z = np.asarray(z, dtype=float)
    return (z * z - z + 4.0) / (1.0 + z) ** 2


def check_log_sobolev_hessian(n_samples: int = 10_000, seed: int = 0,
                              tol: float = 1e-12) -> InequalityVerdict:
    """Smallest Hessian eigenvalue over sampled velocities stays >= 5/8.

    Also pins the two exact facts: eigenvalues 4 at the origin and the
    scalar profile attaining its minimum 5/8 at |v|^2 = 3.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rng.uniform(0.0, 12.0, size=n_samples)
    v = dirs * radii[:, None]
    eigs = np.linalg.eigvalsh(tilted_hessian(v))
    emin = float(eigs.min())
    at_origin = np.linalg.eigvalsh(tilted_hessian(np.zeros((1, 3))))[0]
    origin_ok = bool(np.allclose(at_origin, 4.0, atol=1e-14))
    scalar_min_at_3 = float(hessian_scalar_form(np.array(3.0)))
    holds = emin >= HESSIAN_LOWER_BOUND - tol and origin_ok \
        and scalar_min_at_3 == HESSIAN_LOWER_BOUND
    return InequalityVerdict(
        name="bakry", lhs=emin, rhs=HESSIAN_LOWER_BOUND,
        empirical_constant=emin, holds=bool(holds),
        inputs_digest=f"samples:{n_samples}:seed:{seed}", tolerance=tol,
        details={"scalar_min_at_z3": scalar_min_at_3,
                 "eigenvalues_at_origin": [float(x) for x in at_origin],
                 "n_samples": n_samples})


# ---------------------------------------------------------------------------
# coercivity of the collision kernel in weighted L^1
# ---------------------------------------------------------------------------

def check_coercivity(corpus, ell: float, gamma: float, eta: float,
                     cutoff_kind: str = "indicator") -> InequalityVerdict:
    """Fit the smallest (K, C) with
    I <= -K M0^(1-g/2) M2^(g/2) M_{l+g} + C [M2 M_{l-2+g} + (M2/M0)^(l/2-1+g) M0 M2].

    K is the largest decay weight for which a finite C exists over the
    corpus (zero when some member has nonnegative I); C is then minimal.
    """
    if not (0.0 < eta <= 1.0):
        raise ParameterDomainError(f"eta must lie in (0, 1], got {eta}")
    if ell <= 2.0:
        raise ParameterDomainError(f"weight order must exceed 2, got {ell}")
    if not (-4.0 < gamma < 0.0):
        raise ParameterDomainError(f"gamma must lie in (-4, 0), got {gamma}")
    rows = []
    for f in corpus:
        ival = kernels.coercivity_integral(f, ell, gamma, eta, cutoff_kind)
        m0 = f.mass()
        m2 = fun.poly_moment(f, 2.0)
        t0 = m0 ** (1.0 - 0.5 * gamma) * m2 ** (0.5 * gamma) \
            * fun.poly_moment(f, ell + gamma)
        t1 = m2 * fun.poly_moment(f, ell - 2.0 + gamma) \
            + (m2 / m0) ** (0.5 * ell - 1.0 + gamma) * m0 * m2
        rows.append((ival, t0, t1))
    k_fit = max(0.0, min(-r[0] / r[1] for r in rows))
    c_fit = max(0.0, max((r[0] + k_fit * r[1]) / r[2] for r in rows))
    holds = all(r[0] <= -k_fit * r[1] + c_fit * r[2] + 1e-9 * abs(r[0]) + 1e-12
                for r in rows)
    return InequalityVerdict(
        name="coercivity", lhs=rows[0][0], rhs=-k_fit * rows[0][1] + c_fit * rows[0][2],
        empirical_constant=k_fit, holds=bool(holds),
        inputs_digest=digest(corpus), tolerance=1e-9,
        details={"K": k_fit, "C": c_fit, "ell": ell, "gamma": gamma,
                 "eta": eta, "cutoff": cutoff_kind,
                 "integrals": [r[0] for r in rows]})


# ---------------------------------------------------------------------------
# entropy-weight interpolation
# ---------------------------------------------------------------------------

def _abs_entropy_weight(f: GridDistribution, weight: np.ndarray) -> float:
    vals = np.where(f.values > ENTROPY_CUT,
                    f.values * np.abs(np.log(np.maximum(f.values, FLOOR))), 0.0)
    return integrate(f.grid, vals * weight)


def check_entropy_interpolation(f: GridDistribution, r: float,
                                alpha: float) -> InequalityVerdict:
    """integral <v>^alpha f |log f| <= C (M_{alpha+2} + M_theta^((3-r)/2) ||f||^(3(r-1)/2) + 1)
    with theta = (9(r-1) + 2 alpha)/(3 - r); records the empirical C."""
    if not (1.0 < r < 3.0):
        raise ParameterDomainError(f"interpolation order must lie in (1, 3), got {r}")
    g = f.grid
    theta = (9.0 * (r - 1.0) + 2.0 * alpha) / (3.0 - r)
    lhs = _abs_entropy_weight(f, g.bracket_sq() ** (0.5 * alpha))
    bracket = (fun.poly_moment(f, alpha + 2.0)
               + fun.poly_moment(f, theta) ** (0.5 * (3.0 - r))
               * fun.weighted_lp_norm(f, 3.0, -3.0) ** (1.5 * (r - 1.0))
               + 1.0)
    c_emp = lhs / bracket
    return InequalityVerdict(
        name="interp", lhs=lhs, rhs=bracket, empirical_constant=c_emp,
        holds=math.isfinite(c_emp) and c_emp >= 0.0,
        inputs_digest=digest(f), tolerance=0.0,
        details={"r": r, "alpha": alpha, "theta": theta, "mode": "polynomial"})


def check_entropy_interpolation_stretched(f: GridDistribution, r: float, s: float,
                                          kappa: float, kappa1: float,
                                          kappa2: float) -> InequalityVerdict:
    """Stretched-exponential variant with kappa1 > kappa, kappa2 > 2 kappa/(3-r)."""
    if not (1.0 < r < 3.0):
        raise ParameterDomainError(f"interpolation order must lie in (1, 3), got {r}")
    if kappa1 <= kappa:
        raise ParameterDomainError(f"kappa1 must exceed kappa: {kappa1} <= {kappa}")
    if kappa2 <= 2.0 * kappa / (3.0 - r):
        raise ParameterDomainError(
            f"kappa2 must exceed 2 kappa/(3-r) = {2.0 * kappa / (3.0 - r)}")
    g = f.grid
    lhs = _abs_entropy_weight(
        f, np.exp(kappa * g.bracket_sq() ** (0.5 * s)))
    bracket = (fun.stretched_moment(f, s, kappa1)
               + fun.stretched_moment(f, s, kappa2) ** (0.5 * (3.0 - r))
               * fun.weighted_lp_norm(f, 3.0, -3.0) ** (1.5 * (r - 1.0))
               + 1.0)
    c_emp = lhs / bracket
    return InequalityVerdict(
        name="interp", lhs=lhs, rhs=bracket, empirical_constant=c_emp,
        holds=math.isfinite(c_emp) and c_emp >= 0.0,
        inputs_digest=digest(f), tolerance=0.0,
        details={"r": r, "s": s, "kappa": kappa, "kappa1": kappa1,
                 "kappa2": kappa2, "mode": "stretched"})


# ---------------------------------------------------------------------------
# kernel field consistency
# ---------------------------------------------------------------------------

def kernel_matrix(z: np.ndarray, gamma: float) -> np.ndarray:
    """a(z) = |z|^(gamma+2) (Id - zz^T/|z|^2) for a batch of nonzero z."""
    z = np.atleast_2d(z)
    r2 = (z ** 2).sum(axis=1)
    proj = np.eye(3)[None, :, :] - z[:, :, None] * z[:, None, :] / r2[:, None, None]
    return r2[:, None, None] ** (0.5 * (gamma + 2.0)) * proj


def check_kernel_divergence(gamma: float, n_samples: int = 1000, seed: int = 0,
                            rel_tol: float = 1e-6) -> InequalityVerdict:
    """Row divergence of the kernel matrix matches -2 z |z|^gamma numerically.

    Central differences with step |z| 1e-4, on random nonzero z; also checks
    the exact algebraic identities a(z) z = 0 and <b(z), z> = -2 |z|^(gamma+2).
    """
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(n_samples, 3))
    z *= (0.2 + rng.uniform(0.0, 3.0, size=(n_samples, 1)))
    r2 = (z ** 2).sum(axis=1)
    step = np.sqrt(r2) * 1e-4
    div = np.zeros((n_samples, 3))
    for jax in range(3):
        dzp = z.copy()
        dzm = z.copy()
        dzp[:, jax] += step
        dzm[:, jax] -= step
        div += (kernel_matrix(dzp, gamma)[:, :, jax]
                - kernel_matrix(dzm, gamma)[:, :, jax]) / (2.0 * step[:, None])
    bref = -2.0 * z * r2[:, None] ** (0.5 * gamma)
    err = np.linalg.norm(div - bref, axis=1) / np.linalg.norm(bref, axis=1)
    max_err = float(err.max())
    az = np.einsum("nij,nj->ni", kernel_matrix(z, gamma), z)
    az_max = float(np.abs(az).max() / np.abs(kernel_matrix(z, gamma)).max())
    bz = (bref * z).sum(axis=1)
    bz_ref = -2.0 * r2 ** (0.5 * gamma + 1.0)
    bz_err = float(np.abs(bz - bz_ref).max() / np.abs(bz_ref).max())
    holds = max_err <= rel_tol and az_max <= 1e-12 and bz_err <= 1e-12
    return InequalityVerdict(
        name="bfield", lhs=max_err, rhs=rel_tol, empirical_constant=max_err,
        holds=bool(holds), inputs_digest=f"gamma:{gamma}:n:{n_samples}:seed:{seed}",
        tolerance=rel_tol,
        details={"max_divergence_error": max_err,
                 "projection_null_error": az_max,
                 "radial_pairing_error": bz_err, "gamma": gamma})
