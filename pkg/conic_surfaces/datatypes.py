# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
datatypes

Defines the types shared by various modules: cone data, geometry verdicts, dimension counts and
solver options.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Any
from typing import Optional
from typing import Tuple

from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import ValidationInfo
from pydantic import field_validator
from pydantic import model_validator

# Two cone points closer than this are considered the same point
POSITION_TOLERANCE = 1e-12


class GeometryTag(Enum):
    HYPERBOLIC = "Hyperbolic"
    EUCLIDEAN = "Euclidean"
    SPHERICAL = "Spherical"
    OUTSIDE_TROYANOV = "OutsideTroyanov"
    TWO_CONE_UNEQUAL = "TwoConeUnequal"
    NOT_COVERED = "NotCoveredByTheorem"


# Tags for which a constant curvature conic metric exists (and is unique)
UNIFORMIZABLE_TAGS = frozenset(
    [GeometryTag.HYPERBOLIC, GeometryTag.EUCLIDEAN, GeometryTag.SPHERICAL]
)


def _parse_beta(value: Any) -> Tuple[float, Optional[Fraction]]:
    if isinstance(value, Fraction):
        return float(value), value
    if isinstance(value, str):
        exact = Fraction(value.strip())
        return float(exact), exact
    return float(value), None


class ConeAngleVector(BaseModel):
    """
    Ordered cone-angle parameters. The cone angle at p_j is 2*pi*(1 + beta_j), so every beta_j
    lies strictly inside (-1, 0).

    Values may be given as exact rationals written as strings ("-1/2"); they are kept in
    `rationals` so that the Euclidean case can be detected without rounding.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    betas: Tuple[float, ...] = Field(default=())
    rationals: Optional[Tuple[str, ...]] = Field(default=None, repr=False)

    @model_validator(mode="before")
    @classmethod
    def parse_betas(cls, data: Any) -> Any:
        if isinstance(data, (list, tuple)):
            data = {"betas": data}
        if not isinstance(data, dict) or "betas" not in data:
            return data
        parsed = [_parse_beta(b) for b in data["betas"]]
        data = dict(data)
        data["betas"] = tuple(value for value, _ in parsed)
        if data.get("rationals") is None and parsed and all(e is not None for _, e in parsed):
            data["rationals"] = tuple(str(e) for _, e in parsed)
        return data

    @model_validator(mode="after")
    def check_range(self):
        for j, beta in enumerate(self.betas):
            if not math.isfinite(beta) or not (-1.0 < beta < 0.0):
                raise ValueError(f"beta_{j + 1}={beta} is outside the open interval (-1, 0)")
        if self.rationals is not None:
            if len(self.rationals) != len(self.betas):
                raise ValueError("rationals must match betas one to one")
            for j, text in enumerate(self.rationals):
                exact = Fraction(text)
                if not (-1 < exact < 0) or abs(float(exact) - self.betas[j]) > 1e-15:
                    raise ValueError(f"rational beta_{j + 1}={text} does not match betas")
        return self

    @property
    def k(self) -> int:
        return len(self.betas)

    def exact(self) -> Optional[Tuple[Fraction, ...]]:
        if self.rationals is None:
            return None
        return tuple(Fraction(text) for text in self.rationals)

    def scaled(self, factor: float) -> "ConeAngleVector":
        return ConeAngleVector(betas=tuple(factor * b for b in self.betas))


class ConicSurfaceSpec(BaseModel):
    """
    A compact oriented surface of genus `genus` with cone points of the given angles. Positions
    are unit vectors on the round sphere (genus 0) or coordinates in the unit square of the flat
    torus (genus 1).

    The command line JSON shape {"genus": g, "betas": [...], "positions": [...]} is accepted.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    genus: int = Field(ge=0)
    angles: ConeAngleVector = Field(default_factory=ConeAngleVector)
    positions: Optional[Tuple[Tuple[float, ...], ...]] = Field(default=None)

    @model_validator(mode="before")
    @classmethod
    def accept_flat_betas(cls, data: Any) -> Any:
        if isinstance(data, dict) and "betas" in data:
            if "angles" in data:
                raise ValueError("give either 'betas' or 'angles', not both")
            data = dict(data)
            data["angles"] = {"betas": data.pop("betas")}
        return data

    @field_validator("positions")
    @classmethod
    def normalize_positions(cls, positions, info: ValidationInfo):
        if positions is None:
            return positions
        genus = info.data.get("genus")
        normalized = []
        for point in positions:
            if genus == 0:
                if len(point) != 3:
                    raise ValueError("genus 0 positions are 3-vectors on the unit sphere")
                norm = math.sqrt(sum(x * x for x in point))
                if not math.isfinite(norm) or norm == 0.0:
                    raise ValueError(f"position {point} cannot be normalized")
                normalized.append(tuple(x / norm for x in point))
            elif genus == 1:
                if len(point) != 2:
                    raise ValueError("genus 1 positions are 2-vectors in the unit square")
                normalized.append(tuple(x - math.floor(x) for x in point))
            else:
                raise ValueError("positions are only supported for genus 0 and 1")
        return tuple(normalized)

    @model_validator(mode="after")
    def check_positions(self):
        if self.positions is None:
            return self
        if len(self.positions) != self.angles.k:
            raise ValueError(
                f"{len(self.positions)} positions given for {self.angles.k} cone points"
            )
        for i in range(len(self.positions)):
            for j in range(i):
                if self.point_distance(i, j) <= POSITION_TOLERANCE:
                    raise ValueError(f"cone points {j + 1} and {i + 1} coincide")
        return self

    @property
    def k(self) -> int:
        return self.angles.k

    @property
    def betas(self) -> Tuple[float, ...]:
        return self.angles.betas

    def point_distance(self, i: int, j: int) -> float:
        """
        Chordal distance on the sphere, minimum-image distance on the torus.
        """
        p, q = self.positions[i], self.positions[j]
        if self.genus == 1:
            d = [(a - b) - round(a - b) for a, b in zip(p, q)]
        else:
            d = [a - b for a, b in zip(p, q)]
        return math.sqrt(sum(x * x for x in d))

    def with_angles(self, angles: ConeAngleVector) -> "ConicSurfaceSpec":
        return ConicSurfaceSpec(genus=self.genus, angles=angles, positions=self.positions)


class GeometryClass(BaseModel):
    """
    Verdict of the Gauss-Bonnet / Troyanov trichotomy. `violated_index` is 1-based.
    """

    model_config = ConfigDict(frozen=True)

    tag: GeometryTag
    chi_beta: float
    violated_index: Optional[int] = Field(default=None)

    @property
    def uniformizable(self) -> bool:
        return self.tag in UNIFORMIZABLE_TAGS


class DimensionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    dim_tt: int
    dim_tt_sing: int
    dim_slice: int
    dim_teich_conic: int
    dim_fiber: int
    formula_negative: bool = False
    tt_sing_clamped: bool = False


class SolverOptions(BaseModel):
    """
    Options for the uniformization solver.
    """

    model_config = ConfigDict(extra="forbid")

    mesh_level: int = Field(default=4, ge=1, le=7)
    grading_rings: int = Field(default=12, ge=1)
    tol_res: float = Field(default=1e-8, gt=0)
    tol_step: float = Field(default=1e-10, gt=0)
    max_iterations: int = Field(default=60, ge=1)
    max_line_search: int = Field(default=10, ge=1)
    eigen_floor: float = Field(default=1e-4, gt=0)
    singular_floor: float = Field(default=1e-10, gt=0)
    quadrature_order: int = Field(default=4, ge=2, le=12)
    inner_radius_factor: float = Field(default=0.05, gt=0, lt=1)
    continuation_steps: int = Field(default=4, ge=1)

    @model_validator(mode="after")
    def check_floors(self):
        if self.singular_floor >= self.eigen_floor:
            raise ValueError("singular_floor must be below eigen_floor")
        return self
