"""Independent oracles used to freeze expected values.

Everything here deliberately avoids the lattice quadrature under test:
radial integrals go through adaptive 1-D quadrature, Gaussian expectations
through tensor Gauss-Hermite rules, comparison ODEs through an adaptive
stiff integrator.
"""

import math

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import quad, solve_ivp

SQRT_2PI = math.sqrt(2.0 * math.pi)


def radial_maxwellian_integral(radial_weight, rmax=40.0):
    """integral over R^3 of w(|v|) mu(v) dv via adaptive radial quadrature."""

    def integrand(r):
        return 4.0 * math.pi * r * r * (2.0 * math.pi) ** -1.5 \
            * math.exp(-0.5 * r * r) * radial_weight(r)

    val, err = quad(integrand, 0.0, rmax, limit=200, epsabs=1e-13, epsrel=1e-12)
    assert err < 1e-8 * max(1.0, abs(val))
    return val


def maxwellian_poly_moment(ell: float) -> float:
    return radial_maxwellian_integral(lambda r: (1.0 + r * r) ** (0.5 * ell))


def maxwellian_z_factor() -> float:
    return radial_maxwellian_integral(lambda r: (1.0 + r * r) ** -1.5)


def maxwellian_l3_weighted_norm() -> float:
    """||mu||_{L^3_-3}: cube root of integral of mu^3 <v>^-9."""

    def integrand(r):
        mu = (2.0 * math.pi) ** -1.5 * math.exp(-0.5 * r * r)
        return 4.0 * math.pi * r * r * mu ** 3 * (1.0 + r * r) ** -4.5

    val, err = quad(integrand, 0.0, 40.0, limit=200, epsabs=1e-14, epsrel=1e-12)
    assert err < 1e-10
    return val ** (1.0 / 3.0)


def gauss_hermite_expectation(temps, func, order=48):
    """E[func(v)] for a centred Gaussian with diagonal temperatures."""
    x, w = hermegauss(order)
    w = w / SQRT_2PI
    t1, t2, t3 = temps
    x1 = x * math.sqrt(t1)
    x2 = x * math.sqrt(t2)
    x3 = x * math.sqrt(t3)
    v1, v2, v3 = np.meshgrid(x1, x2, x3, indexing="ij")
    ww = w[:, None, None] * w[None, :, None] * w[None, None, :]
    return float((ww * func(v1, v2, v3)).sum())


def anisotropic_fisher(temps, alpha: float) -> float:
    """Closed-form weighted Fisher information of a diagonal Gaussian:
    sum_i (1/T_i - 1)^2 E[v_i^2 <v>^alpha]."""
    total = 0.0
    for i, t in enumerate(temps):
        def func(v1, v2, v3, i=i):
            comps = (v1, v2, v3)
            br = (1.0 + v1 ** 2 + v2 ** 2 + v3 ** 2) ** (0.5 * alpha)
            return comps[i] ** 2 * br

        total += (1.0 / t - 1.0) ** 2 * gauss_hermite_expectation(temps, func)
    return total


def gaussian_kl_divergence(temps) -> float:
    """KL divergence of a centred diagonal Gaussian from the unit Gaussian."""
    return 0.5 * sum(t - 1.0 - math.log(t) for t in temps)


def comparison_ode_solution(params, t_eval):
    """High-accuracy solution of x' = -c1 (1+t)^-a x + c2 (1+t)^-b."""

    def rhs(t, x):
        return -params.c1 * (1.0 + t) ** -params.a * x \
            + params.c2 * (1.0 + t) ** -params.b

    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), [params.c0],
                    t_eval=t_eval, rtol=1e-10, atol=1e-300, method="LSODA")
    assert sol.success
    return sol.y[0]


def maxwell_molecule_pressure(p0: np.ndarray, t: float) -> np.ndarray:
    """Pressure tensor of the gamma = 0 dynamics: P(t) = I + (P0 - I) e^(-12 t).

    Second-moment closure of the collision operator at the Maxwellian-molecule
    exponent for unit mass, zero momentum and energy 3.
    """
    eye = np.eye(3)
    return eye + (p0 - eye) * math.exp(-12.0 * t)
