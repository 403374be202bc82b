# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
geometry

Cone-angle combinatorics: Euler characteristic with angle defects, Gauss-Bonnet, Troyanov
region membership, the existence trichotomy and the deformation-dimension formulas.

All functions are pure and safe to call from any thread.
"""

import math
from fractions import Fraction
from typing import Optional
from typing import Sequence
from typing import Tuple

from .datatypes import ConeAngleVector
from .datatypes import ConicSurfaceSpec
from .datatypes import DimensionReport
from .datatypes import GeometryClass
from .datatypes import GeometryTag
from .exceptions import NotSpherical
from .logger import setup_logger

logger = setup_logger(name="geometry")

# Absolute tolerance on chi for the Euclidean case (floating point input only)
EUCLIDEAN_TOLERANCE = 1e-12


def euler_characteristic(genus: int) -> int:
    return 2 - 2 * genus


def chi_beta(spec: ConicSurfaceSpec) -> float:
    """
    Euler characteristic with angle defects, 2 - 2*genus + sum(beta).
    """
    return euler_characteristic(spec.genus) + math.fsum(spec.betas)


def _exact_chi(spec: ConicSurfaceSpec) -> Optional[Fraction]:
    exact = spec.angles.exact()
    if exact is None:
        return None
    return euler_characteristic(spec.genus) + sum(exact, Fraction(0))


def troyanov_violation(betas: Sequence[float]) -> Optional[int]:
    """
    Returns the 1-based index of the first j with sum_{i != j} beta_i >= beta_j, or None when
    every Troyanov inequality holds.
    """
    total = math.fsum(betas)
    for j, beta in enumerate(betas):
        if not (total - beta < beta):
            return j + 1
    return None


def _exact_troyanov_violation(betas: Sequence[Fraction]) -> Optional[int]:
    total = sum(betas, Fraction(0))
    for j, beta in enumerate(betas):
        if not (total - beta < beta):
            return j + 1
    return None


def classify(spec: ConicSurfaceSpec) -> GeometryClass:
    """
    Existence trichotomy for constant curvature conic metrics. Never raises for a valid spec.
    """
    chi = chi_beta(spec)
    exact_chi = _exact_chi(spec)
    if exact_chi is not None:
        sign = (exact_chi > 0) - (exact_chi < 0)
    elif abs(chi) <= EUCLIDEAN_TOLERANCE:
        sign = 0
    else:
        sign = 1 if chi > 0 else -1

    if sign < 0:
        return GeometryClass(tag=GeometryTag.HYPERBOLIC, chi_beta=chi)
    if sign == 0:
        return GeometryClass(tag=GeometryTag.EUCLIDEAN, chi_beta=chi)

    k = spec.k
    if k >= 3:
        exact = spec.angles.exact()
        if exact is not None:
            violated = _exact_troyanov_violation(exact)
        else:
            violated = troyanov_violation(spec.betas)
        if violated is None:
            return GeometryClass(tag=GeometryTag.SPHERICAL, chi_beta=chi)
        return GeometryClass(
            tag=GeometryTag.OUTSIDE_TROYANOV, chi_beta=chi, violated_index=violated
        )
    if k == 2:
        b1, b2 = spec.betas
        if b1 == b2:
            return GeometryClass(tag=GeometryTag.SPHERICAL, chi_beta=chi)
        return GeometryClass(tag=GeometryTag.TWO_CONE_UNEQUAL, chi_beta=chi)
    return GeometryClass(tag=GeometryTag.NOT_COVERED, chi_beta=chi)


def gauss_bonnet_pair(spec: ConicSurfaceSpec, area: float) -> float:
    """
    Constant curvature forced by Gauss-Bonnet for a metric of the given total area.
    """
    if not area > 0:
        raise ValueError(f"area must be positive, got {area}")
    classification = classify(spec)
    if classification.tag == GeometryTag.EUCLIDEAN:
        return 0.0
    return 2.0 * math.pi * classification.chi_beta / area


def sph_to_euc_projection(betas: ConeAngleVector) -> Tuple[float, ConeAngleVector]:
    """
    Writes a spherical cone-angle vector on the 2-sphere as lambda * euc with euc on the
    Euclidean slice sum(euc) = -2. Returns (lambda, euc).

    The two-cone football is Spherical but its projection (-1, -1) leaves the admissible box,
    so it is rejected as well.
    """
    spec = ConicSurfaceSpec(genus=0, angles=betas)
    classification = classify(spec)
    if classification.tag != GeometryTag.SPHERICAL:
        raise NotSpherical(f"{list(betas.betas)} classifies as {classification.tag.value}")
    if betas.k < 3:
        raise NotSpherical(
            f"{list(betas.betas)} is a football; its Euclidean projection has no admissible "
            "cone angles"
        )
    lam = -math.fsum(betas.betas) / 2.0
    euc = ConeAngleVector(betas=tuple(b / lam for b in betas.betas))
    logger.debug(f"Projected {list(betas.betas)} to lambda={lam}")
    return lam, euc


def dimension_report(spec: ConicSurfaceSpec) -> DimensionReport:
    genus, k = spec.genus, spec.k
    clamped = False
    if genus > 1:
        dim_tt = 6 * genus - 6
        dim_tt_sing = dim_tt + 2 * k
    elif genus == 1:
        dim_tt = 2
        dim_tt_sing = 2 * k
    else:
        dim_tt = 0
        dim_tt_sing = 2 * k - 3
        if dim_tt_sing < 0:
            dim_tt_sing = 0
            clamped = True
    dim_teich_conic = 6 * genus - 6 + 3 * k
    dim_slice = dim_teich_conic + 1
    dim_fiber = 6 * genus - 6 + 2 * k
    return DimensionReport(
        dim_tt=dim_tt,
        dim_tt_sing=dim_tt_sing,
        dim_slice=dim_slice,
        dim_teich_conic=dim_teich_conic,
        dim_fiber=dim_fiber,
        formula_negative=min(dim_slice, dim_teich_conic, dim_fiber) < 0,
        tt_sing_clamped=clamped,
    )
