# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
mode_spectral

Fourier-mode spectra of the Friedrichs Laplacian on model geometries: flat cones with a Dirichlet
outer boundary, footballs (two poles) and the hyperbolic cusp.

Every problem is written in Sturm-Liouville form -(p u')' + q u - shift * w u = lambda w u:

* warped metrics dr^2 + f^2 dy^2 on mode k: p = w = f, q = k^2 / f
* the cusp dr^2/r^2 + r^2 dy^2 on mode j: p = r^2, w = 1, q = j^2 / r^2 (the +2 of the cusp
  operator enters as shift = -2)

The discretization is vertex-centred finite volumes: cell integrals of w and q by Gauss-Legendre,
flux coefficients p at cell faces. At a pole the mode-0 equation is the integrated form over
the half cell, which keeps only the bounded branch; other modes vanish at the pole.
"""

import asyncio
import math
from enum import Enum
from typing import Callable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from pydantic import field_validator
from pydantic import model_validator
from scipy import linalg

from .exceptions import BoundViolated
from .exceptions import DegenerateFit
from .exceptions import GridTooCoarse
from .exceptions import NoDiscreteSpectrum
from .logger import setup_logger
from .model_metrics import Chart
from .model_metrics import ModelMetric
from .model_metrics import warp_profile
from .pool import SolvePool

logger = setup_logger(name="mode_spectral")

MIN_GRID_POINTS = 64
GAUSS_POINTS = 4
# Eigenvalues below this (relative to K) are the constant mode
ZERO_EIGENVALUE = 1e-8
# Correlation with cos(sqrt(K) t) required for rigidity
PROFILE_CORRELATION = 1.0 - 1e-6


class InnerBoundary(Enum):
    FRIEDRICHS = "FriedrichsSelect"
    # Pins the pole value for mode 0 too, admitting the log branch at grid scale
    PINNED = "Pinned"


class OuterBoundary(Enum):
    DIRICHLET = "Dirichlet"
    SECOND_POLE = "SecondPole"
    NONE = "None"


class ModeEigenproblem(BaseModel):
    """
    Radial problem for one Fourier mode. A grid starting at r = 0 on a warped geometry starts at
    the cone point; any other first node is a Dirichlet truncation.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    geometry: ModelMetric
    mode: int
    grid: np.ndarray
    inner_bc: InnerBoundary = InnerBoundary.FRIEDRICHS
    outer_bc: OuterBoundary = OuterBoundary.DIRICHLET
    shift: float = 0.0

    @field_validator("grid", mode="before")
    @classmethod
    def as_array(cls, grid):
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be a 1-D array with at least two nodes")
        if not np.all(np.isfinite(grid)) or not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be finite and strictly increasing")
        return grid

    @model_validator(mode="after")
    def check_chart(self):
        geometry = self.geometry
        if geometry.chart == Chart.CONFORMAL_FLAT:
            raise ValueError("mode problems are posed in the polar, suspension or cusp chart")
        lo, hi = geometry.domain()
        if geometry.chart == Chart.CUSP:
            if self.grid[0] <= 0.0 or self.grid[-1] > hi:
                raise ValueError("cusp grids must lie in (0, 1]")
        elif self.grid[0] < lo or self.grid[-1] > hi * (1.0 + 1e-14):
            raise ValueError(f"grid leaves the chart [{lo}, {hi}]")
        if self.outer_bc == OuterBoundary.SECOND_POLE:
            if geometry.curvature <= 0 or abs(self.grid[-1] - hi) > 1e-12 * hi:
                raise ValueError("a second pole needs K > 0 and a grid ending at pi/sqrt(K)")
        return self

    @property
    def n(self) -> int:
        return self.grid.size

    @property
    def starts_at_pole(self) -> bool:
        return self.geometry.chart != Chart.CUSP and self.grid[0] == 0.0

    def refined(self) -> "ModeEigenproblem":
        """
        Same problem on the grid with every cell halved.
        """
        grid = np.empty(2 * self.n - 1)
        grid[::2] = self.grid
        grid[1::2] = 0.5 * (self.grid[:-1] + self.grid[1:])
        grid[-1] = self.grid[-1]
        return self.model_copy(update={"grid": grid})


class RadialOperator(BaseModel):
    """
    Discretized mode operator on the unknown nodes: symmetric tridiagonal stiffness
    (diagonal, off_diagonal) and diagonal mass.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    nodes: np.ndarray
    indices: np.ndarray
    diagonal: np.ndarray
    off_diagonal: np.ndarray
    mass: np.ndarray

    def dense(self) -> Tuple[np.ndarray, np.ndarray]:
        stiffness = (
            np.diag(self.diagonal)
            + np.diag(self.off_diagonal, 1)
            + np.diag(self.off_diagonal, -1)
        )
        return stiffness, np.diag(self.mass)

    def symmetric_tridiagonal(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Diagonals of M^{-1/2} K M^{-1/2}.
        """
        scale = np.sqrt(self.mass)
        return self.diagonal / self.mass, self.off_diagonal / (scale[:-1] * scale[1:])

    def apply(self, u: np.ndarray) -> np.ndarray:
        result = self.diagonal * u
        result[:-1] += self.off_diagonal * u[1:]
        result[1:] += self.off_diagonal * u[:-1]
        return result

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        banded = np.zeros((3, self.diagonal.size))
        banded[0, 1:] = self.off_diagonal
        banded[1] = self.diagonal
        banded[2, :-1] = self.off_diagonal
        return linalg.solve_banded((1, 1), banded, rhs)


def _coefficients(problem: ModeEigenproblem):
    geometry = problem.geometry
    k2 = float(problem.mode) ** 2
    if geometry.chart == Chart.CUSP:

        def p(r):
            return r * r

        def q(r):
            return k2 / (r * r)

        def w(r):
            return np.ones_like(r)

        return p, q, w

    def f(r):
        return warp_profile(geometry, r)[0]

    def q(r):
        return k2 / f(r)

    return f, q, f


def _cell_integrals(g: Callable, lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """
    Gauss-Legendre integral of g over each [lower_i, upper_i] (zero-length cells give zero).
    """
    points, weights = leggauss(GAUSS_POINTS)
    half = 0.5 * (upper - lower)
    mid = 0.5 * (upper + lower)
    x = mid[:, None] + half[:, None] * points[None, :]
    safe = np.where(half[:, None] > 0, x, 1.0)
    values = np.where(half[:, None] > 0, g(safe), 0.0)
    return half * (values @ weights)


def _control_volume_integrals(g: Callable, grid: np.ndarray) -> np.ndarray:
    faces = 0.5 * (grid[:-1] + grid[1:])
    lower = np.concatenate([[grid[0]], faces])
    upper = np.concatenate([faces, [grid[-1]]])
    return _cell_integrals(g, lower, grid) + _cell_integrals(g, grid, upper)


def _kept_nodes(problem: ModeEigenproblem) -> np.ndarray:
    keep = np.ones(problem.n, dtype=bool)
    if problem.starts_at_pole:
        if problem.mode != 0 or problem.inner_bc == InnerBoundary.PINNED:
            keep[0] = False
    else:
        keep[0] = False
    if problem.outer_bc != OuterBoundary.SECOND_POLE or problem.mode != 0:
        keep[-1] = False
    return np.flatnonzero(keep)


def assemble_mode(problem: ModeEigenproblem) -> RadialOperator:
    """
    Symmetric discretization of the mode operator with respect to the discrete w dr inner
    product.
    """
    if problem.n < MIN_GRID_POINTS:
        raise GridTooCoarse(f"{problem.n} grid nodes, at least {MIN_GRID_POINTS} needed")
    p, q, w = _coefficients(problem)
    grid = problem.grid
    faces = 0.5 * (grid[:-1] + grid[1:])
    flux = p(faces) / np.diff(grid)

    mass = _control_volume_integrals(w, grid)
    potential = _control_volume_integrals(q, grid)
    diagonal = potential - problem.shift * mass
    diagonal[:-1] += flux
    diagonal[1:] += flux

    kept = _kept_nodes(problem)
    off_full = -flux
    # Off-diagonal entries between consecutive kept nodes (kept nodes are contiguous)
    off_diagonal = off_full[kept[:-1]]
    operator = RadialOperator(
        nodes=grid[kept],
        indices=kept,
        diagonal=diagonal[kept],
        off_diagonal=off_diagonal,
        mass=mass[kept],
    )
    logger.debug(
        f"Assembled mode {problem.mode} on {problem.geometry.chart.value} "
        f"(beta={problem.geometry.beta}, K={problem.geometry.curvature}): {kept.size} unknowns"
    )
    return operator


# --------------------------------------------------------------------------------------------
# Spectra


class SpectralEntry(BaseModel):
    """
    One eigenvalue: Richardson-extrapolated value with error bar, plus the raw values on the
    grids n and 2n. `index` counts from 1 within the mode.
    """

    mode: int
    index: int
    value: float
    error_bar: float
    coarse: float
    fine: float


class SpectrumResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    mode: int
    grid_n: int
    entries: List[SpectralEntry]
    nodes: np.ndarray = Field(repr=False)
    eigenfunctions: np.ndarray = Field(repr=False)
    mass: np.ndarray = Field(repr=False)

    @property
    def eigenvalues(self) -> List[Tuple[float, int, int]]:
        return [(e.value, e.mode, e.index) for e in self.entries]

    @property
    def richardson_estimate(self) -> List[Tuple[float, float]]:
        return [(e.value, e.error_bar) for e in self.entries]


def _lowest(operator: RadialOperator, count: int) -> Tuple[np.ndarray, np.ndarray]:
    if count > operator.diagonal.size:
        size = operator.diagonal.size
        raise ValueError(f"asked for {count} eigenvalues of a {size}-node problem")
    d, e = operator.symmetric_tridiagonal()
    values, vectors = linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1))
    return values, vectors / np.sqrt(operator.mass)[:, None]


def solve_spectrum(problem: ModeEigenproblem, count: int) -> SpectrumResult:
    """
    Lowest `count` eigenvalues of the mode, extrapolated from grids n and 2n.
    """
    if problem.outer_bc == OuterBoundary.NONE:
        raise NoDiscreteSpectrum("the open cusp has continuous spectrum; set an outer boundary")
    if count < 1:
        raise ValueError("count must be positive")
    coarse, _ = _lowest(assemble_mode(problem), count)
    fine_operator = assemble_mode(problem.refined())
    fine, vectors = _lowest(fine_operator, count)
    entries = []
    for i, (lc, lf) in enumerate(zip(coarse, fine)):
        delta = (lf - lc) / 3.0
        entries.append(
            SpectralEntry(
                mode=problem.mode,
                index=i + 1,
                value=float(lf + delta),
                error_bar=float(abs(delta)),
                coarse=float(lc),
                fine=float(lf),
            )
        )
    logger.debug(f"Mode {problem.mode}: {[round(e.value, 10) for e in entries]}")
    return SpectrumResult(
        mode=problem.mode,
        grid_n=problem.n,
        entries=entries,
        nodes=fine_operator.nodes,
        eigenfunctions=vectors,
        mass=fine_operator.mass,
    )


async def solve_spectra(
    problems: Sequence[ModeEigenproblem], count: int, max_concurrency: int = 4
) -> List[SpectrumResult]:
    """
    Solves independent mode problems concurrently; results come back ordered by (mode, position
    in `problems`).
    """
    pool = SolvePool(max_concurrency=max_concurrency)
    jobs = [
        ((problem.mode, i), solve_spectrum, (problem, count))
        for i, problem in enumerate(problems)
    ]
    return [result for _, result in await pool.run_all(jobs)]


def solve_spectra_sync(
    problems: Sequence[ModeEigenproblem], count: int, max_concurrency: int = 4
) -> List[SpectrumResult]:
    return asyncio.run(solve_spectra(problems, count, max_concurrency))


# --------------------------------------------------------------------------------------------
# Problem builders


def uniform_grid(a: float, b: float, n: int) -> np.ndarray:
    return np.linspace(a, b, n)


def graded_grid(
    a: float, b: float, first: float, ratio: float = 1.05, max_spacing: Optional[float] = None
) -> np.ndarray:
    """
    Nodes from a with spacings first, first*ratio, ... up to max_spacing, then uniform to b.
    """
    if max_spacing is None:
        max_spacing = (b - a) / 400.0
    nodes = [a]
    spacing = first
    while nodes[-1] + spacing < b and spacing < max_spacing:
        nodes.append(nodes[-1] + spacing)
        spacing *= ratio
    remaining = b - nodes[-1]
    cells = max(1, int(math.ceil(remaining / max_spacing)))
    tail = np.linspace(nodes[-1], b, cells + 1)[1:]
    return np.concatenate([np.asarray(nodes), tail])


def cone_problem(
    beta: float,
    mode: int,
    n: int = 256,
    r_max: float = 1.0,
    inner_bc: InnerBoundary = InnerBoundary.FRIEDRICHS,
) -> ModeEigenproblem:
    """
    Flat cone of angle 2*pi*(1+beta), Dirichlet at r_max.
    """
    return ModeEigenproblem(
        geometry=ModelMetric(beta=beta, curvature=0.0),
        mode=mode,
        grid=uniform_grid(0.0, r_max, n),
        inner_bc=inner_bc,
        outer_bc=OuterBoundary.DIRICHLET,
    )


def football_problem(beta: float, K: float, mode: int, n: int = 256) -> ModeEigenproblem:
    geometry = ModelMetric(beta=beta, curvature=K, chart=Chart.SUSPENSION)
    return ModeEigenproblem(
        geometry=geometry,
        mode=mode,
        grid=uniform_grid(0.0, geometry.domain()[1], n),
        outer_bc=OuterBoundary.SECOND_POLE,
    )


def cusp_problem(
    j: int, r_min: float = 0.02, r0: float = 1.0, n: int = 2000
) -> ModeEigenproblem:
    """
    Cusp mode j truncated to [r_min, r0] with nodes uniform in 1/r, where e^{-c/r} is smooth.
    """
    inverse = np.linspace(1.0 / r0, 1.0 / r_min, n)
    return ModeEigenproblem(
        geometry=ModelMetric(beta=0.0, curvature=-1.0, chart=Chart.CUSP),
        mode=j,
        grid=np.sort(1.0 / inverse),
        outer_bc=OuterBoundary.NONE,
        shift=-2.0,
    )


# --------------------------------------------------------------------------------------------
# First eigenvalue bound on footballs


class ModeBound(BaseModel):
    mode: int
    lambda1: float
    error_bar: float
    tolerance: float
    margin: float
    equality: bool
    profile_correlation: Optional[float] = None


class BoundReport(BaseModel):
    beta: float
    K: float
    modes: List[ModeBound]
    equality_modes: List[int]
    min_nonzero_mode_margin: Optional[float] = None

    @property
    def rigid(self) -> bool:
        return self.equality_modes in ([], [0])


def _first_nonzero(result: SpectrumResult, K: float) -> Tuple[SpectralEntry, int]:
    for i, entry in enumerate(result.entries):
        if abs(entry.value) > ZERO_EIGENVALUE * K:
            return entry, i
    raise ArithmeticError(f"no nonzero eigenvalue among {len(result.entries)} computed")


def verify_eigenvalue_bound(
    beta: float, K: float, modes: Sequence[int] = range(0, 4), n: int = 256
) -> BoundReport:
    """
    Checks lambda_1 >= 2K on each mode of the K-football, with equality only on mode 0 and only
    for the cos(sqrt(K) t) profile.
    """
    if not K > 0:
        raise ValueError(f"football curvature must be positive, got {K}")
    bounds = []
    for mode in modes:
        result = solve_spectrum(football_problem(beta, K, mode, n), count=2)
        entry, position = _first_nonzero(result, K)
        tolerance = max(10.0 * entry.error_bar, 1e-10 * K)
        margin = entry.value - 2.0 * K
        if margin < -tolerance:
            raise BoundViolated(
                f"mode {mode}: lambda_1={entry.value} below 2K={2 * K} (tol {tolerance})", mode
            )
        equality = abs(margin) <= tolerance
        correlation = None
        if mode == 0:
            u = result.eigenfunctions[:, position]
            profile = np.cos(math.sqrt(K) * result.nodes)
            inner = np.sum(result.mass * u * profile)
            correlation = float(
                abs(inner)
                / math.sqrt(np.sum(result.mass * u * u) * np.sum(result.mass * profile * profile))
            )
            if equality and correlation < PROFILE_CORRELATION:
                raise BoundViolated(
                    f"mode 0 attains 2K but its eigenfunction is not cos(sqrt(K) t) "
                    f"(correlation {correlation})",
                    mode,
                )
        elif equality and beta < 0:
            raise BoundViolated(f"mode {mode} attains 2K; only mode 0 may", mode)
        bounds.append(
            ModeBound(
                mode=mode,
                lambda1=entry.value,
                error_bar=entry.error_bar,
                tolerance=tolerance,
                margin=margin,
                equality=equality,
                profile_correlation=correlation,
            )
        )
        logger.info(f"Football beta={beta} K={K} mode {mode}: lambda_1={entry.value:.10f}")
    nonzero_margins = [b.margin for b in bounds if b.mode != 0]
    return BoundReport(
        beta=beta,
        K=K,
        modes=bounds,
        equality_modes=[b.mode for b in bounds if b.equality],
        min_nonzero_mode_margin=min(nonzero_margins) if nonzero_margins else None,
    )


# --------------------------------------------------------------------------------------------
# Expansion exponents at the pole


class ExpansionFit(BaseModel):
    """
    `generic_predicted` is the leading exponent when the right-hand side also has a mode-1
    component, min(2 + e, 1/(1+beta)); for e = -1 this is min(1, 1/(1+beta)).
    """

    beta: float
    mode: int
    slope: float
    predicted: float
    generic_predicted: float
    a0: float
    fit_residual: float
    window: Tuple[float, float]

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.predicted) / self.predicted


def predicted_expansion_exponent(beta: float, mode: int, rhs_exponent: float = 0.0) -> float:
    """
    Leading exponent of u - u(0) for a right-hand side behaving like r^rhs_exponent: the
    particular solution grows like r^(2 + rhs_exponent), the homogeneous Friedrichs branch of
    mode k like r^(|k|/(1+beta)).
    """
    particular = 2.0 + rhs_exponent
    if mode == 0:
        return particular
    return min(abs(mode) / (1.0 + beta), particular)


def friedrichs_expansion_fit(
    beta: float,
    mode: int,
    rhs: Callable[[np.ndarray], np.ndarray],
    rhs_exponent: float = 0.0,
    r_max: float = 1.0,
    window: Tuple[float, float] = (1e-4, 1e-3),
) -> ExpansionFit:
    """
    Solves the mode problem (Delta u = rhs) on the flat cone with Friedrichs selection at the pole
    and Dirichlet at r_max, then fits log|u - a0| against log r on `window`.
    """
    grid = graded_grid(0.0, r_max, first=1e-6, ratio=1.05, max_spacing=r_max / 400.0)
    problem = ModeEigenproblem(
        geometry=ModelMetric(beta=beta, curvature=0.0),
        mode=mode,
        grid=grid,
        outer_bc=OuterBoundary.DIRICHLET,
    )
    operator = assemble_mode(problem)
    _, _, w = _coefficients(problem)
    load = _control_volume_integrals(lambda r: rhs(r) * w(r), grid)[operator.indices]
    u = np.zeros_like(grid)
    u[operator.indices] = operator.solve(load)

    a0 = float(u[0]) if mode == 0 else 0.0
    mask = (grid >= window[0]) & (grid <= window[1])
    difference = np.abs(u[mask] - a0)
    if mask.sum() < 3 or not np.all(np.isfinite(difference)) or np.any(difference < 1e-300):
        raise DegenerateFit(f"u - a0 vanishes or underflows on {window}")
    x, y = np.log(grid[mask]), np.log(difference)
    slope, intercept = np.polyfit(x, y, 1)
    fit_residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    fit = ExpansionFit(
        beta=beta,
        mode=mode,
        slope=float(slope),
        predicted=predicted_expansion_exponent(beta, mode, rhs_exponent),
        generic_predicted=min(2.0 + rhs_exponent, 1.0 / (1.0 + beta)),
        a0=a0,
        fit_residual=fit_residual,
        window=window,
    )
    logger.debug(f"Expansion fit beta={beta} mode={mode}: {fit.slope} vs {fit.predicted}")
    return fit


# --------------------------------------------------------------------------------------------
# Cusp modes


def cusp_zero_mode_roots() -> Tuple[float, float]:
    """
    Characteristic exponents of -r^2 u'' - 2 r u' + 2 u = 0, i.e. roots of
    -zeta(zeta - 1) - 2 zeta + 2.
    """
    roots = np.roots([-1.0, -1.0, 2.0])
    if np.max(np.abs(roots.imag)) > 1e-12:
        raise ArithmeticError(f"complex cusp exponents {roots}")
    first, second = sorted(roots.real.tolist(), reverse=True)
    return first, second


class CuspDecayReport(BaseModel):
    """
    `bound_constant` is the smallest A with |u_j| <= A j^-2 e^{-c/r} on the grid;
    `barrier_constant` is the supersolution constant a j^2 / (2 + (j^2 - c^2)/r0^2) and
    `uniform_constant` its j-independent majorant a / (1 - c^2).
    """

    j: int
    c: float
    a: float
    amplitude: float
    bound_constant: float
    barrier_constant: float
    uniform_constant: float

    @property
    def holds(self) -> bool:
        return self.bound_constant <= self.barrier_constant * (1.0 + 1e-3)


def cusp_mode_decay_check(
    j: int,
    c: float,
    a: float,
    rhs: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    r_min: float = 0.02,
    r0: float = 1.0,
    n: int = 2000,
) -> CuspDecayReport:
    """
    Solves (-r^2 d^2/dr^2 - 2r d/dr + j^2/r^2 + 2) u = f with |f| <= a e^{-c/r}, Dirichlet at
    r_min and r0, and measures the decay constant of u against e^{-c/r}.
    """
    if abs(j) < 1:
        raise ValueError("cusp decay is stated for |j| >= 1")
    if not 0.0 < c < 1.0:
        raise ValueError(f"c={c} is outside (0, 1)")
    if not a >= 0.0:
        raise ValueError(f"a={a} must be nonnegative")
    if not 0.0 < r0 <= 1.0:
        raise ValueError(f"r0={r0} must lie in (0, 1]")
    if rhs is None:

        def rhs(r):
            return a * np.exp(-c / r)

    problem = cusp_problem(j, r_min=r_min, r0=r0, n=n)
    operator = assemble_mode(problem)
    load = _control_volume_integrals(rhs, problem.grid)[operator.indices]
    u = operator.solve(load)
    amplitude = float(np.max(np.abs(u) * np.exp(c / operator.nodes))) if u.size else 0.0
    j2 = float(j * j)
    report = CuspDecayReport(
        j=j,
        c=c,
        a=a,
        amplitude=amplitude,
        bound_constant=j2 * amplitude,
        barrier_constant=a * j2 / (2.0 + (j2 - c * c) / (r0 * r0)),
        uniform_constant=a / (1.0 - c * c),
    )
    logger.debug(f"Cusp mode {j}: A={report.bound_constant} barrier={report.barrier_constant}")
    return report
