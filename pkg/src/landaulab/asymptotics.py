"""Moment envelopes, admissible decay schedules, and explicit comparison bounds.

Post-processing for solver trajectories: affine-in-time moment envelopes,
the admissible window of the time-weight exponent entering the decay
argument, the closed-form bound produced by the generalized integral
comparison (Gronwall-type) inequality, and least-squares decay fits of the
relative entropy in algebraic or stretched-exponential form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDataError, ParameterDomainError


# ---------------------------------------------------------------------------
# moment envelopes
# ---------------------------------------------------------------------------

def theoretical_slope_scale(ell: float, gamma: float) -> float:
    """Scale l^e of the linear-in-time moment growth rate.

    e = (l + gamma)/2 on the moderately soft range (gamma >= -2) and
    e = (l - 6)|gamma + 1|/(gamma + 4) - gamma on the very soft range;
    the two expressions agree at gamma = -2.
    """
    if not (-4.0 < gamma < 0.0):
        raise ParameterDomainError(f"gamma must lie in (-4, 0), got {gamma}")
    if gamma >= -2.0:
        e = 0.5 * (ell + gamma)
    else:
        e = (ell - 6.0) * abs(gamma + 1.0) / (gamma + 4.0) - gamma
    return float(ell ** e)


@dataclass
class MomentEnvelope:
    """Affine-in-time envelope A + B t dominating sampled moment values."""

    order: float | tuple[float, float]   # ell, or (s, kappa)
    times: np.ndarray
    samples: np.ndarray
    intercept: float
    slope: float
    theory_slope_scale: float | None = None

    def dominates(self, margin: float = 1e-12) -> bool:
        env = self.intercept + self.slope * self.times
        return bool(np.all(self.samples <= env + margin))


def fit_affine_envelope(times, samples) -> tuple[float, float]:
    """Least dominating affine envelope: minimal slope anchored at the start,
    then the minimal intercept for that slope."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(samples, dtype=float)
    if t.size < 2:
        raise InsufficientDataError("need at least two samples for an envelope")
    if np.any(np.diff(t) <= 0):
        raise ParameterDomainError("sample times must be strictly increasing")
    secants = (y[1:] - y[0]) / (t[1:] - t[0])
    slope = max(0.0, float(secants.max()))
    intercept = float((y - slope * t).max())
    return intercept, slope


def power_envelope_coeff(times, samples, exponent: float) -> float:
    """Smallest C with samples <= C (1 + t)^exponent at every sample."""
    t = np.asarray(times, dtype=float)
    y = np.asarray(samples, dtype=float)
    return float((y / (1.0 + t) ** exponent).max())


def track_moments(trajectory, orders=(5.0, 10.0), gamma: float = -3.0):
    """Affine envelopes of the recorded moment columns of a trajectory.

    Uses the diagnostics columns (M5 and the configured tracked order); the
    envelope existence with finite slope is the at-most-linear growth claim.
    """
    records = trajectory.records
    if not records:
        raise InsufficientDataError("trajectory has no records")
    times = trajectory.times
    out = []
    for ell in orders:
        if ell == 5.0:
            samples = trajectory.column("M5")
        elif ell == trajectory.track_ell:
            samples = trajectory.column("Ml")
        else:
            raise ParameterDomainError(
                f"moment order {ell} was not tracked by this trajectory")
        a, b = fit_affine_envelope(times, samples)
        out.append(MomentEnvelope(
            order=ell, times=times, samples=samples, intercept=a, slope=b,
            theory_slope_scale=theoretical_slope_scale(ell, gamma)))
    return out


# ---------------------------------------------------------------------------
# decay schedules
# ---------------------------------------------------------------------------

def decay_exponent_ell(ell: float) -> float:
    """Supremum of admissible algebraic decay exponents, l-form."""
    return (2.0 * ell ** 2 - 25.0 * ell + 57.0) / (9.0 * (ell - 2.0))


def decay_exponent_k(k: float) -> float:
    """Same supremum in k-form, with l = (9 + 3k)/2."""
    return (k / 3.0) * (3.0 * k - 1.0) / (3.0 * k + 5.0) - 2.0 / 3.0


@dataclass(frozen=True)
class Schedule:
    """Admissible algebraic-decay schedule for a given moment order."""

    ell: float
    k: float
    nu: float
    nu_window: tuple[float, float]
    a: float
    b: float

    @property
    def decay_exponent(self) -> float:
        return self.b - self.a


def schedule_window(ell: float) -> tuple[float, float, float]:
    """Admissible open window for the time-weight exponent nu.

    Requires ell > 19/2.  With k = (2 ell - 9)/3, nu must satisfy
    nu k > 2/3 and nu < (1/3)(3k - 1)/(3k + 5); the window is empty exactly
    when the moment order is too low.
    """
    k = (2.0 * ell - 9.0) / 3.0
    lo = 2.0 / (3.0 * k) if k > 0 else math.inf
    hi = (1.0 / 3.0) * (3.0 * k - 1.0) / (3.0 * k + 5.0) if k > 0 else 0.0
    if not (ell > 9.5) or lo >= hi:
        raise ParameterDomainError(
            f"empty schedule window for moment order {ell}: "
            f"requires ell > 19/2 (window ({lo}, {hi}))")
    return lo, hi, k


def choose_schedule(ell: float, position: float = 0.5) -> Schedule:
    """Pick nu inside the admissible window (midpoint by default)."""
    lo, hi, k = schedule_window(ell)
    if not (0.0 < position < 1.0):
        raise ParameterDomainError("position must lie strictly inside (0, 1)")
    nu = lo + position * (hi - lo)
    a = 3.0 * nu + 6.0 / (5.0 + 3.0 * k)
    b = 3.0 * nu + nu * k + 6.0 / (5.0 + 3.0 * k) - 2.0 / 3.0
    return Schedule(ell=ell, k=k, nu=nu, nu_window=(lo, hi), a=a, b=b)


def stretched_schedule(s: float, kappa: float) -> tuple[float, float, float]:
    """Exponent triple (s/(3+s), 3/(3+s), q = -3/(3+s)) for stretched decay.

    Admissible for 0 < s < 1/2 with kappa > 0, or s = 1/2 with
    0 < kappa < 2/e (the propagation window of stretched moments at the
    Coulomb exponent).
    """
    if not (0.0 < s <= 0.5):
        raise ParameterDomainError(f"stretch exponent must lie in (0, 1/2], got {s}")
    if kappa <= 0.0:
        raise ParameterDomainError(f"kappa must be positive, got {kappa}")
    if s == 0.5 and kappa >= 2.0 / math.e:
        raise ParameterDomainError(
            f"kappa must be below 2/e for s = 1/2, got {kappa}")
    return s / (3.0 + s), 3.0 / (3.0 + s), -3.0 / (3.0 + s)


# ---------------------------------------------------------------------------
# generalized Gronwall comparison bound
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GronwallParams:
    """Data of x(t) + c1 int (1+s)^-a x <= c0 + c2 int (1+s)^-b, 0 < a < 1 < ..."""

    c0: float
    c1: float
    c2: float
    a: float
    b: float

    def __post_init__(self):
        if not (0.0 < self.a < 1.0):
            raise ParameterDomainError(f"a must lie in (0, 1), got {self.a}")
        if self.b <= self.a:
            raise ParameterDomainError(f"b must exceed a, got b = {self.b} <= a = {self.a}")
        if min(self.c0, self.c1) <= 0 or self.c2 < 0:
            raise ParameterDomainError("constants must satisfy c0, c1 > 0, c2 >= 0")


def gronwall_bound(p: GronwallParams, t) -> np.ndarray:
    """Explicit closed-form upper bound for the comparison inequality.

    Every step of the chain is a genuine upper estimate, so the returned
    value dominates the exact solution of the equality ODE
    x' = -c1 (1+t)^-a x + c2 (1+t)^-b, x(0) = c0, for all t >= 0:

        bound(t) = c0 E(0,t)
                 + (c2/c1) [ (1+t)^(a-b)
                             + (b-a) (t/2) ( E(t/2,t) + (1+t/2)^(a-b-1) ) ]

    with E(r,t) = exp(-c1 ((1+t)^(1-a) - (1+r)^(1-a))/(1-a)).
    """
    t = np.asarray(t, dtype=float)
    one_a = 1.0 - p.a

    def ee(r, tt):
        return np.exp(-p.c1 * ((1.0 + tt) ** one_a - (1.0 + r) ** one_a) / one_a)

    term0 = p.c0 * ee(0.0, t)
    if p.c2 == 0.0:
        return term0
    tail = ((1.0 + t) ** (p.a - p.b)
            + (p.b - p.a) * 0.5 * t * (ee(0.5 * t, t)
                                       + (1.0 + 0.5 * t) ** (p.a - p.b - 1.0)))
    return term0 + (p.c2 / p.c1) * tail


def gronwall_ode_rhs(p: GronwallParams):
    """Right-hand side of the equality ODE, for numeric comparison solves."""

    def rhs(t, x):
        return -p.c1 * (1.0 + t) ** -p.a * x + p.c2 * (1.0 + t) ** -p.b

    return rhs


# ---------------------------------------------------------------------------
# decay fits
# ---------------------------------------------------------------------------

@dataclass
class DecayFit:
    """Fitted decay of the relative entropy along a trajectory."""

    mode: str                    # "algebraic" | "stretched"
    exponent: float              # beta, or the stretched rate c
    amplitude: float             # fitted prefactor
    envelope_amplitude: float    # prefactor shifted to dominate all samples
    residual: float              # rms residual in log space
    power: float | None = None       # s/(3+s) for stretched fits
    log_power: float | None = None   # 3/(3+s) for stretched fits


def _fit_weights(times: np.ndarray) -> np.ndarray:
    # uniform weight in log(1+t): trapezoid increments of log(1+t)
    lt = np.log1p(times)
    w = np.empty_like(lt)
    w[1:-1] = 0.5 * (lt[2:] - lt[:-2])
    w[0] = 0.5 * (lt[1] - lt[0]) if lt.size > 1 else 1.0
    w[-1] = 0.5 * (lt[-1] - lt[-2]) if lt.size > 1 else 1.0
    return np.maximum(w, 0.0)


def fit_decay(times, rel_entropy, mode: str = "algebraic",
              s: float = 0.5, min_samples: int = 10) -> DecayFit:
    """Least-squares decay fit of H(f(t)|mu) in log space.

    Algebraic mode fits log H = log C - beta log(1+t); stretched mode fits
    log H = log C - c (1+t)^(s/(3+s)) (log(1+t))^(-3/(3+s)).  Samples are
    weighted uniformly in log(1+t) and the fitted curve is also shifted up
    to an exact envelope of the samples (the theory gives one-sided bounds).
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(rel_entropy, dtype=float)
    keep = y > 1e-12
    if mode == "stretched":
        keep &= t > 0.0
    t, y = t[keep], y[keep]
    if t.size < min_samples:
        raise InsufficientDataError(
            f"need >= {min_samples} samples with relative entropy above 1e-12, "
            f"got {t.size}")
    logy = np.log(y)
    w = _fit_weights(t)
    if mode == "algebraic":
        x = -np.log1p(t)
    elif mode == "stretched":
        if s <= 0:
            raise ParameterDomainError(f"stretch exponent must be positive, got {s}")
        power = s / (3.0 + s)
        log_power = 3.0 / (3.0 + s)
        x = -(1.0 + t) ** power * np.log1p(t) ** -log_power
    else:
        raise ParameterDomainError(f"unknown decay mode {mode!r}")
    wsum = w.sum()
    xm = (w * x).sum() / wsum
    ym = (w * logy).sum() / wsum
    slope = float((w * (x - xm) * (logy - ym)).sum() / (w * (x - xm) ** 2).sum())
    intercept = ym - slope * xm
    resid = logy - (intercept + slope * x)
    fit = DecayFit(
        mode=mode,
        exponent=slope,
        amplitude=math.exp(intercept),
        envelope_amplitude=math.exp(intercept + resid.max()),
        residual=float(np.sqrt((w * resid ** 2).sum() / wsum)),
    )
    if mode == "stretched":
        fit.power = s / (3.0 + s)
        fit.log_power = 3.0 / (3.0 + s)
    return fit


# ---------------------------------------------------------------------------
# differential-inequality monitor
# ---------------------------------------------------------------------------

@dataclass
class MonitorResult:
    """Fitted constants of D >= c1 (1+t)^-a H - c2 (1+t)^-b along a run."""

    schedule: Schedule
    c1: float
    c2: float
    bound_params: GronwallParams
    times: np.ndarray
    measured: np.ndarray
    bound: np.ndarray

    @property
    def dominated(self) -> bool:
        return bool(np.all(self.measured <= self.bound * (1.0 + 1e-9) + 1e-300))


def monitor_dissipation_inequality(trajectory, ell: float,
                                   safety: float = 0.95) -> MonitorResult:
    """Fit (c1, c2) so the dissipation inequality holds at every snapshot,
    then assemble the comparison bound with those constants.

    c1 is the (safety-scaled) smallest observed ratio (1+t)^a D / H, which
    makes the inequality hold with c2 = 0; the resulting closed-form bound
    is evaluated against the measured relative entropy.
    """
    sched = choose_schedule(ell)
    t = trajectory.times
    d = trajectory.column("D")
    h = trajectory.column("relH")
    valid = h > 1e-12
    if valid.sum() < 2:
        raise InsufficientDataError("trajectory has no relative-entropy range")
    ratios = (1.0 + t[valid]) ** sched.a * d[valid] / h[valid]
    c1 = safety * float(ratios.min())
    if c1 <= 0:
        raise InsufficientDataError(
            "dissipation vanishes along the run; no positive c1 exists")
    c2 = 0.0
    params = GronwallParams(c0=float(h[0]), c1=c1, c2=c2,
                            a=sched.a, b=sched.b)
    bound = gronwall_bound(params, t)
    return MonitorResult(schedule=sched, c1=c1, c2=c2, bound_params=params,
                         times=t, measured=h, bound=bound)
