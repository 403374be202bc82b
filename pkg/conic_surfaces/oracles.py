# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
oracles

Reference values computed independently of the solvers they check:

* Bessel zeros j_{nu,n} from the ascending series and bisection, for flat cone spectra.
* The football conformal factor: the K-suspension with two antipodal cones written over the
  round unit sphere, in closed form and by integrating its 1-D ODE.
"""

import math
from typing import List
from typing import Optional

import numpy as np
from scipy import integrate
from scipy import optimize

from .logger import setup_logger

logger = setup_logger(name="oracles")

SERIES_TERMS = 80
ZERO_SCAN_STEP = 0.05


def bessel_j(nu: float, x: float) -> float:
    """
    J_nu(x) from the ascending series sum_m (-1)^m (x/2)^(2m+nu) / (m! Gamma(m+nu+1)).
    Accurate enough for x up to ~25.
    """
    if x == 0.0:
        return 1.0 if nu == 0.0 else 0.0
    half = 0.5 * x
    log_half = math.log(half)
    total = 0.0
    for m in range(SERIES_TERMS):
        log_term = (2 * m + nu) * log_half - math.lgamma(m + 1) - math.lgamma(m + nu + 1)
        term = math.exp(log_term)
        total += -term if m % 2 else term
        if m > half and term < 1e-18 * max(1.0, abs(total)):
            break
    return total


def bessel_zeros(nu: float, count: int) -> List[float]:
    """
    First `count` positive zeros of J_nu, bracketed by a sign scan and refined by bisection.
    """
    zeros: List[float] = []
    x = max(nu, ZERO_SCAN_STEP)
    previous = bessel_j(nu, x)
    while len(zeros) < count:
        x_next = x + ZERO_SCAN_STEP
        value = bessel_j(nu, x_next)
        if previous == 0.0:
            zeros.append(x)
        elif previous * value < 0.0:
            zeros.append(optimize.bisect(lambda t: bessel_j(nu, t), x, x_next, xtol=1e-14))
        x, previous = x_next, value
    logger.debug(f"Bessel zeros nu={nu}: {zeros}")
    return zeros


def football_polar_angle(sigma, beta: float):
    """
    Polar coordinate t of the unit football (K = 1) at round-sphere distance sigma from the cone:
    tan(t/2) = tan(sigma/2)^(1+beta).
    """
    sigma = np.asarray(sigma, dtype=float)
    return 2.0 * np.arctan(np.tan(0.5 * sigma) ** (1.0 + beta))


def football_log_factor(sigma, beta: float):
    """
    u with e^(2u) * round = unit football near the cone: e^u = (1+beta) sin t / sin sigma.
    """
    sigma = np.asarray(sigma, dtype=float)
    t = football_polar_angle(sigma, beta)
    return np.log((1.0 + beta) * np.sin(t) / np.sin(sigma))


def football_regular_part(sigma, beta: float):
    """
    u - beta*log(sigma), continuous at sigma = 0 with limit log(1+beta) - beta*log(2).
    """
    sigma = np.asarray(sigma, dtype=float)
    c = 1.0 + beta
    limit = math.log(c) - beta * math.log(2.0)
    small = sigma < 1e-6
    safe = np.where(small, 1e-6, sigma)
    value = football_log_factor(safe, beta) - beta * np.log(safe)
    return np.where(small, limit, value)


def football_polar_angle_ode(sigma_samples, beta: float):
    """
    Same map obtained by integrating dt/dsigma = (1+beta) sin t / sin sigma from the equator,
    where t(pi/2) = pi/2 by symmetry.
    """
    sigma_samples = np.asarray(sigma_samples, dtype=float)
    c = 1.0 + beta

    def rhs(s, t):
        return c * np.sin(t) / np.sin(s)

    result = np.empty_like(sigma_samples)
    below = sigma_samples < 0.5 * math.pi
    for mask in (below, ~below):
        points = sigma_samples[mask]
        if points.size == 0:
            continue
        order = np.argsort(np.abs(points - 0.5 * math.pi))
        targets = points[order]
        end = targets[-1]
        if end == 0.5 * math.pi:
            result[mask] = 0.5 * math.pi
            continue
        solution = integrate.solve_ivp(
            rhs,
            (0.5 * math.pi, end),
            [0.5 * math.pi],
            t_eval=targets,
            rtol=1e-12,
            atol=1e-14,
            method="DOP853",
        )
        values = np.empty_like(targets)
        values[:] = solution.y[0]
        unsorted = np.empty_like(values)
        unsorted[order] = values
        result[mask] = unsorted
    return result


def football_conformal_factor(sigma_near, beta: float, curvature: Optional[float] = None):
    """
    Regular part of the log conformal factor of the unit-area football over the round sphere,
    relative to the near cone distance sigma_near (the far cone is handled by symmetry).
    The curvature of the unit-area football is 4*pi*(1+beta).
    """
    if curvature is None:
        curvature = 4.0 * math.pi * (1.0 + beta)
    return football_regular_part(sigma_near, beta) - 0.5 * math.log(curvature)
