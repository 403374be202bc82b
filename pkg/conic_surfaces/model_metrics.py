# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
model_metrics

Closed-form model geometries: the constant curvature cones dr^2 + f(r)^2 dy^2, their conformal
flat form |z|^(2 beta)|dz|^2, footballs (suspensions of a circle) and the hyperbolic cusp
dr^2/r^2 + r^2 dy^2.

Classes:
    Chart: coordinate chart of a model metric.
    ModelMetric: (beta, K, chart) triple.
    WarpedMetricSample: f and its first two derivatives at a radius.
"""

import math
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import model_validator
from scipy import integrate

from .exceptions import OutOfChart
from .logger import setup_logger

logger = setup_logger(name="model_metrics")


class Chart(Enum):
    POLAR = "Polar"
    CONFORMAL_FLAT = "ConformalFlat"
    SUSPENSION = "Suspension"
    CUSP = "Cusp"


class ModelMetric(BaseModel):
    """
    Model conic metric with cone parameter beta and curvature K. beta = 0 is admitted (smooth
    pole) so that round-sphere limits can be taken.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    beta: float = Field(gt=-1.0, le=0.0)
    curvature: float
    chart: Chart = Chart.POLAR

    @model_validator(mode="after")
    def check_chart(self):
        if not math.isfinite(self.curvature):
            raise ValueError("curvature must be finite")
        if self.chart == Chart.SUSPENSION and not self.curvature > 0:
            raise ValueError("the suspension chart needs K > 0")
        if self.chart == Chart.CONFORMAL_FLAT and self.curvature != 0:
            raise ValueError("the conformal flat chart is only used for K = 0")
        if self.chart == Chart.CUSP and self.curvature != -1:
            raise ValueError("the cusp model has curvature -1")
        return self

    @property
    def cone_factor(self) -> float:
        return 1.0 + self.beta

    def domain(self) -> Tuple[float, float]:
        """
        Open radial interval of the chart (the cusp chart is (0, 1], closed at r = 1).
        """
        if self.chart == Chart.CUSP:
            return 0.0, 1.0
        if self.curvature > 0:
            return 0.0, math.pi / math.sqrt(self.curvature)
        return 0.0, math.inf

    def contains(self, r: float) -> bool:
        lo, hi = self.domain()
        if self.chart == Chart.CUSP:
            return lo < r <= hi
        return lo < r < hi


class WarpedMetricSample(BaseModel):
    """
    Evaluation record for g = dr^2 + f(r)^2 dy^2.
    """

    model_config = ConfigDict(frozen=True)

    r: float
    f: float
    fp: float
    fpp: float

    @property
    def curvature(self) -> float:
        return -self.fpp / self.f


def warp_profile(metric: ModelMetric, r) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Vectorized f, f', f'' of the polar/suspension warp. No domain checks.
    """
    r = np.asarray(r, dtype=float)
    c = metric.cone_factor
    K = metric.curvature
    if K > 0:
        s = math.sqrt(K)
        return c * np.sin(s * r) / s, c * np.cos(s * r), -c * s * np.sin(s * r)
    if K < 0:
        s = math.sqrt(-K)
        return c * np.sinh(s * r) / s, c * np.cosh(s * r), c * s * np.sinh(s * r)
    return c * r, np.full_like(r, c), np.zeros_like(r)


def conformal_to_polar(rho: float, beta: float) -> float:
    """
    Radius r = rho^(1+beta)/(1+beta) turning |z|^(2 beta)|dz|^2 into dr^2 + (1+beta)^2 r^2 dy^2.
    """
    if not rho > 0:
        raise OutOfChart(f"rho={rho} is not positive")
    c = 1.0 + beta
    return rho**c / c


def polar_to_conformal(r: float, beta: float) -> float:
    if not r > 0:
        raise OutOfChart(f"r={r} is not positive")
    c = 1.0 + beta
    return (c * r) ** (1.0 / c)


def conformal_pullback(rho, beta: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Coefficients (g_rr, g_yy) of |z|^(2 beta)|dz|^2 written in the polar radius r of
    conformal_to_polar. They equal (1, (1+beta)^2 r^2).
    """
    rho = np.asarray(rho, dtype=float)
    density = rho ** (2.0 * beta)
    dr_drho = rho**beta
    return density / dr_drho**2, density * rho**2


def evaluate_model(metric: ModelMetric, r: float) -> WarpedMetricSample:
    """
    Warp value and derivatives at r. For the cusp chart r is the cusp coordinate in (0, 1] and
    derivatives are taken with respect to arclength s = log(1/r); for the conformal flat chart r
    is the conformal radius rho.
    """
    if metric.chart == Chart.CUSP:
        if not metric.contains(r):
            raise OutOfChart(f"r={r} is outside the cusp chart (0, 1]")
        return WarpedMetricSample(r=r, f=r, fp=-r, fpp=r)
    if metric.chart == Chart.CONFORMAL_FLAT:
        r = conformal_to_polar(r, metric.beta)
    if not metric.contains(r):
        lo, hi = metric.domain()
        raise OutOfChart(f"r={r} is outside the open chart ({lo}, {hi})")
    f, fp, fpp = warp_profile(metric, r)
    return WarpedMetricSample(r=float(r), f=float(f), fp=float(fp), fpp=float(fpp))


def football_geodesic_diameter(beta: float, K: float) -> float:
    """
    Pole to pole distance of the K-suspension, the extremal diameter. Independent of beta.
    """
    if not K > 0:
        raise ValueError(f"football curvature must be positive, got {K}")
    return math.pi / math.sqrt(K)


def diameter_bound(K: float) -> float:
    """
    Upper bound pi/sqrt(K) on the diameter of a surface with curvature >= K > 0 and all cone
    angles below 2*pi. Only the football with two equal cones attains it.
    """
    if not K > 0:
        raise ValueError(f"diameter bound needs positive curvature, got {K}")
    return math.pi / math.sqrt(K)


def football_distance(
    beta: float, K: float, p: Tuple[float, float], q: Tuple[float, float]
) -> float:
    """
    Geodesic distance between two points (r, theta) of the K-suspension with cone angle
    2*pi*(1+beta) at both poles, r measured from the first pole.

    Cutting along a meridian develops the football onto a lune of the round sphere with opening
    (1+beta) times the angular gap. That opening is at most pi, so the spherical law of cosines
    applies and a minimizing geodesic never passes through a pole in its interior.
    """
    if not -1.0 < beta <= 0.0:
        raise ValueError(f"football cone angle must be at most 2*pi, got beta={beta}")
    diameter = football_geodesic_diameter(beta, K)
    for r, _ in (p, q):
        if not 0.0 <= r <= diameter:
            raise OutOfChart(f"r={r} is outside the football [0, {diameter}]")
    gap = abs(p[1] - q[1]) % (2.0 * math.pi)
    opening = (1.0 + beta) * min(gap, 2.0 * math.pi - gap)
    s = math.sqrt(K)
    cosine = math.cos(s * p[0]) * math.cos(s * q[0]) + math.sin(s * p[0]) * math.sin(
        s * q[0]
    ) * math.cos(opening)
    return math.acos(min(1.0, max(-1.0, cosine))) / s


def football_area(beta: float, K: float) -> float:
    if not K > 0:
        raise ValueError(f"football curvature must be positive, got {K}")
    return 4.0 * math.pi * (1.0 + beta) / K


def football_area_quadrature(beta: float, K: float) -> float:
    """
    2*pi times the integral of the warp over [0, pi/sqrt(K)], by adaptive quadrature.
    """
    metric = ModelMetric(beta=beta, curvature=K, chart=Chart.SUSPENSION)
    value, error = integrate.quad(
        lambda t: float(warp_profile(metric, t)[0]), 0.0, football_geodesic_diameter(beta, K)
    )
    logger.debug(f"Football area quadrature beta={beta} K={K}: {value} (+- {error})")
    return 2.0 * math.pi * value
