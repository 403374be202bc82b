# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
liouville

Uniformization of conic surfaces: solves Delta phi - K_bg + K e^(2 phi) = 0 for the conformal
factor over a singular background e^(2 psi) gbar, where gbar is the round unit sphere or the
unit flat torus and psi = sum_j beta_j chi_j log sigma_j carries the cone singularities.

Discretely (P1 elements, integrated against the hat functions N_i):

    F(phi) = -S phi - b + K m e^(2 phi)

with S the cotangent stiffness, b_i = int (K_gbar - Delta psi) N_i and m_i = int e^(2 psi) N_i.
"""

import math
from enum import Enum
from typing import Callable
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from scipy import sparse
from scipy.sparse.linalg import eigsh
from scipy.sparse.linalg import spsolve

from .datatypes import ConeAngleVector
from .datatypes import ConicSurfaceSpec
from .datatypes import GeometryClass
from .datatypes import GeometryTag
from .datatypes import SolverOptions
from .exceptions import DegenerateFit
from .exceptions import GateRejection
from .exceptions import MeshTooCoarse
from .exceptions import NewtonDiverged
from .exceptions import NotUniformizable
from .exceptions import SingularLinearization
from .geometry import classify
from .geometry import gauss_bonnet_pair
from .geometry import sph_to_euc_projection
from .logger import OnceLogger
from .logger import setup_logger
from .mesh import FaceQuadrature
from .mesh import SurfaceKind
from .mesh import SurfaceMesh
from .mesh import build_mesh
from .mesh import cotangent_stiffness
from .mesh import face_quadrature
from .mesh import sphere_distance
from .mesh import torus_distance
from .oracles import football_conformal_factor

logger = setup_logger(name="liouville")
once_logger = OnceLogger(logger)

ARMIJO = 1e-4
# Below this sigma the sphere curvature term uses its Taylor series
SERIES_RADIUS = 1e-3
AUDIT_DECADES = 2.0
MIN_AUDIT_RINGS = 8


# --------------------------------------------------------------------------------------------
# Background


def smoothstep(t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Quintic 6t^5 - 15t^4 + 10t^3 on [0, 1] with its first two derivatives, clamped outside.
    """
    t = np.clip(t, 0.0, 1.0)
    value = t**3 * (10.0 - 15.0 * t + 6.0 * t * t)
    first = 30.0 * t * t * (1.0 - t) ** 2
    second = 60.0 * t * (1.0 - t) * (1.0 - 2.0 * t)
    return value, first, second


def cutoff(sigma: np.ndarray, inner: float, outer: float):
    """
    chi = 1 for sigma <= inner, 0 for sigma >= outer, with chi' and chi''.
    """
    width = outer - inner
    value, first, second = smoothstep((sigma - inner) / width)
    return 1.0 - value, -first / width, -second / width**2


class BackgroundGeometry(BaseModel):
    """
    Base surface with the singular profile split off. Inside the cutoff disk of p_j, sigma_j is
    the geodesic distance to p_j; the cutoff disks are pairwise disjoint.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    spec: ConicSurfaceSpec
    classification: GeometryClass
    mesh: SurfaceMesh = Field(repr=False)
    base_curvature: float
    stiffness: sparse.csr_matrix = Field(repr=False)
    quadrature: FaceQuadrature = Field(repr=False)
    singular_quadrature: FaceQuadrature = Field(repr=False)
    hat_area: np.ndarray = Field(repr=False)
    hat_source: np.ndarray = Field(repr=False)
    hat_weight: np.ndarray = Field(repr=False)

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices

    @property
    def cutoff_radii(self) -> List[Tuple[float, float]]:
        return [(cone.cutoff_inner, cone.cutoff_outer) for cone in self.mesh.cones]

    def cutoffs_disjoint(self) -> bool:
        for i in range(self.spec.k):
            for j in range(i):
                gap = self.cone_distance(i, j)
                if self.mesh.cones[i].cutoff_outer + self.mesh.cones[j].cutoff_outer >= gap:
                    return False
        return True

    def cone_distance(self, i: int, j: int) -> float:
        p = np.asarray(self.spec.positions, dtype=float)
        return float(self._distance(p[i], p[j]))

    def _distance(self, points: np.ndarray, center: np.ndarray) -> np.ndarray:
        if self.mesh.kind == SurfaceKind.SPHERE:
            return sphere_distance(points, center)
        return torus_distance(points, center)

    def sigma(self, points: np.ndarray, j: int) -> np.ndarray:
        center = np.asarray(self.spec.positions[j], dtype=float)
        return self._distance(points, center)

    def singular_profile(self, points: np.ndarray) -> np.ndarray:
        """
        psi = sum_j beta_j chi_j log sigma_j (-inf at the cone points).
        """
        psi = np.zeros(points.shape[:-1])
        for j, beta in enumerate(self.spec.betas):
            cone = self.mesh.cones[j]
            sigma = self.sigma(points, j)
            chi, _, _ = cutoff(sigma, cone.cutoff_inner, cone.cutoff_outer)
            near = chi > 0.0
            with np.errstate(divide="ignore"):
                psi[near] += beta * chi[near] * np.log(sigma[near])
        return psi

    def source_curvature(self, points: np.ndarray) -> np.ndarray:
        """
        K_gbar - Delta psi, the regular part (the Dirac masses at the cones give the angles).
        """
        result = np.full(points.shape[:-1], self.base_curvature)
        spherical = self.mesh.kind == SurfaceKind.SPHERE
        for j, beta in enumerate(self.spec.betas):
            cone = self.mesh.cones[j]
            sigma = self.sigma(points, j)
            inside = sigma < cone.cutoff_outer
            s = sigma[inside]
            chi, chi1, chi2 = cutoff(s, cone.cutoff_inner, cone.cutoff_outer)
            log_s = np.log(s)
            if spherical:
                mean = 1.0 / np.tan(s)
                # (sigma cot sigma - 1) / sigma^2
                curvature_term = np.empty_like(s)
                small = s < SERIES_RADIUS
                curvature_term[small] = -1.0 / 3.0 - s[small] ** 2 / 45.0
                big = ~small
                curvature_term[big] = (s[big] * mean[big] - 1.0) / s[big] ** 2
            else:
                mean = 1.0 / s
                curvature_term = np.zeros_like(s)
            laplacian = chi2 * log_s + chi1 * (2.0 / s + mean * log_s) + chi * curvature_term
            result[inside] -= beta * laplacian
        return result

    def conformal_curvature(self, points: np.ndarray) -> np.ndarray:
        """
        Gauss curvature of the singular background e^(2 psi) gbar, bounded away from the cones.
        """
        return np.exp(-2.0 * self.singular_profile(points)) * self.source_curvature(points)

    def chi_beta(self) -> float:
        return self.classification.chi_beta

    def balance_direction(self) -> Optional[np.ndarray]:
        if self.mesh.kind != SurfaceKind.SPHERE or self.spec.k != 2:
            return None
        p = np.asarray(self.spec.positions, dtype=float)
        d = p[0] - p[1]
        return d / np.linalg.norm(d)


def build_background(
    spec: ConicSurfaceSpec,
    options: Optional[SolverOptions] = None,
    require_gate: bool = True,
    mesh: Optional[SurfaceMesh] = None,
) -> BackgroundGeometry:
    """
    Meshes the base surface, splits off the singular profile and integrates the hat-function
    data. With require_gate the spec must classify as Hyperbolic, Euclidean or Spherical.
    """
    options = options or SolverOptions()
    if spec.positions is None:
        raise ValueError("uniformization needs cone positions")
    if spec.genus > 1:
        raise ValueError(f"genus {spec.genus} surfaces are not meshed")
    classification = classify(spec)
    if require_gate and not classification.uniformizable:
        raise NotUniformizable(
            f"{list(spec.betas)} on genus {spec.genus} classifies as {classification.tag.value}",
            tag=classification.tag,
        )
    mesh = mesh or build_mesh(spec, options)
    order = options.quadrature_order
    exponents = np.zeros(mesh.n_faces)
    for cone in mesh.cones:
        exponents[mesh.face_cone == cone.cone_index] = 2.0 * spec.betas[cone.cone_index]
    quadrature = face_quadrature(mesh, order)
    singular = face_quadrature(mesh, order, exponents)

    background = BackgroundGeometry(
        spec=spec,
        classification=classification,
        mesh=mesh,
        base_curvature=1.0 if mesh.kind == SurfaceKind.SPHERE else 0.0,
        stiffness=cotangent_stiffness(mesh),
        quadrature=quadrature,
        singular_quadrature=singular,
        hat_area=np.zeros(0),
        hat_source=np.zeros(0),
        hat_weight=np.zeros(0),
    )
    background.hat_area = quadrature.integrate_hats(np.ones(quadrature.weights.shape), mesh)
    background.hat_source = quadrature.integrate_hats(
        background.source_curvature(quadrature.points), mesh
    )
    background.hat_weight = singular.integrate_hats(
        np.exp(2.0 * background.singular_profile(singular.points)), mesh
    )
    logger.info(
        f"Background for {classification.tag.value} spec {list(spec.betas)}: "
        f"area {background.hat_area.sum():.12f}, int K_src {background.hat_source.sum():.12f}"
    )
    return background


# --------------------------------------------------------------------------------------------
# Residual and Newton


class ExponentFit(BaseModel):
    """
    Fitted growth exponents of phi - phi(p_j) in the background distance sigma. Powers of the
    cone radius r of the model metric are these divided by 1 + beta; `radius_reference` is the
    r-exponent min(1, 1/(1+beta)) of the expansion a0 + a1 r + a2 r^(1/(1+beta)).
    """

    cone_index: int
    beta: float
    rings: int
    slope: float
    predicted: float
    radius_slope: float
    radius_predicted: float
    radius_reference: float
    mode1_slope: Optional[float] = None
    mode1_predicted: float = 1.0

    @property
    def relative_error(self) -> float:
        return abs(self.slope - self.predicted) / self.predicted

    @property
    def radius_reference_error(self) -> float:
        return abs(self.radius_slope - self.radius_reference) / self.radius_reference


def radius_reference_exponent(beta: float) -> float:
    return min(1.0, 1.0 / (1.0 + beta))


class NewtonDiagnostics(BaseModel):
    area: float
    area_quadrature: float
    gb_residual: float
    min_phi: float
    max_phi: float
    multiplier: float
    # background-area mean of the solved metric's nodal curvature
    mean_curvature: float
    # sum of the hat-integrated source, 2 pi chi_beta up to quadrature
    total_curvature: float
    iterations: int
    residual_sup: float
    min_eigenvalue: Optional[float] = None
    exponent_fits: List[ExponentFit] = Field(default_factory=list)


class ConformalSolution(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    background: BackgroundGeometry = Field(repr=False)
    phi: np.ndarray = Field(repr=False)
    K_target: float
    newton_history: List[float]
    diagnostics: NewtonDiagnostics

    @property
    def mesh(self) -> SurfaceMesh:
        return self.background.mesh

    def payload(self) -> dict:
        return {
            "genus": self.background.spec.genus,
            "betas": list(self.background.spec.betas),
            "K_target": self.K_target,
            "vertices": self.mesh.n_vertices,
            "newton_history": self.newton_history,
            "diagnostics": self.diagnostics.model_dump(),
        }


class ConstraintKind(Enum):
    NONE = "None"
    UNIT_AREA = "UnitArea"
    BALANCE = "Balance"


def _raw_residual(bg: BackgroundGeometry, phi: np.ndarray, K_target: float) -> np.ndarray:
    with np.errstate(over="ignore"):
        nonlinear = K_target * bg.hat_weight * np.exp(2.0 * phi)
    return -(bg.stiffness @ phi) - bg.hat_source + nonlinear


def residual(bg: BackgroundGeometry, phi: np.ndarray, K_target: float) -> np.ndarray:
    """
    Pointwise residual Delta phi - K_src + K_target e^(2 psi + 2 phi) at the vertices, recovered
    from the hat-integrated equation by dividing by m_i = int e^(2 psi) N_i.
    """
    phi = np.asarray(phi, dtype=float)
    return _raw_residual(bg, phi, K_target) / bg.hat_weight


def _constraint_kind(bg: BackgroundGeometry, K_target: float) -> ConstraintKind:
    if K_target == 0.0:
        return ConstraintKind.UNIT_AREA
    if K_target > 0 and bg.balance_direction() is not None:
        return ConstraintKind.BALANCE
    return ConstraintKind.NONE


class _NewtonSystem:
    """
    Discrete equation with its optional scalar constraint and multiplier mu:
    unit area (F + mu A, sum m e^(2 phi) = 1) or balancing of the dilation kernel
    (F + mu A x.d, sum m e^(2 phi) x.d = 0).
    """

    def __init__(self, bg: BackgroundGeometry, K_target: float):
        self.bg = bg
        self.K = K_target
        self.kind = _constraint_kind(bg, K_target)
        if self.kind == ConstraintKind.BALANCE:
            self.height = bg.mesh.positions3() @ bg.balance_direction()
            self.column = bg.hat_area * self.height
        elif self.kind == ConstraintKind.UNIT_AREA:
            self.height = np.ones(bg.n_vertices)
            self.column = bg.hat_area

    @property
    def bordered(self) -> bool:
        return self.kind != ConstraintKind.NONE

    def evaluate(self, phi: np.ndarray, mu: float) -> Tuple[np.ndarray, float]:
        F = _raw_residual(self.bg, phi, self.K)
        if not self.bordered:
            return F, 0.0
        with np.errstate(over="ignore"):
            weighted = self.bg.hat_weight * np.exp(2.0 * phi)
        target = 1.0 if self.kind == ConstraintKind.UNIT_AREA else 0.0
        return F + mu * self.column, float(np.sum(weighted * self.height) - target)

    def merit(self, F: np.ndarray, g: float) -> float:
        return math.sqrt(float(F @ F) + g * g)

    def sup(self, F: np.ndarray, g: float) -> float:
        return max(float(np.max(np.abs(F / self.bg.hat_weight))), abs(g))

    def jacobian(self, phi: np.ndarray) -> sparse.csc_matrix:
        weighted = self.bg.hat_weight * np.exp(2.0 * phi)
        J = -self.bg.stiffness + sparse.diags(2.0 * self.K * weighted)
        if not self.bordered:
            return J.tocsc()
        row = 2.0 * weighted * self.height
        column = sparse.csr_matrix(self.column[:, None])
        return sparse.bmat([[J, column], [sparse.csr_matrix(row[None, :]), None]], format="csc")


def smallest_eigenvalue(J: sparse.spmatrix, area: np.ndarray) -> float:
    """
    Eigenvalue of smallest modulus of J v = lambda diag(area) v by shift-invert at 0. A factor
    that cannot be formed counts as 0.
    """
    try:
        values = eigsh(
            J.tocsc(),
            k=1,
            M=sparse.diags(area).tocsc(),
            sigma=0.0,
            which="LM",
            return_eigenvectors=False,
        )
    except RuntimeError as e:
        logger.warning(f"Shift-invert failed ({e}); linearization treated as singular")
        return 0.0
    return float(values[0])


def newton_solve(
    bg: BackgroundGeometry,
    K_target: float,
    phi0: Optional[np.ndarray] = None,
    options: Optional[SolverOptions] = None,
) -> ConformalSolution:
    """
    Damped Newton iteration with Armijo backtracking on the residual norm. Converged when
    sup |F/m| < tol_res and the step is below tol_step.
    """
    options = options or SolverOptions()
    n = bg.n_vertices
    phi = np.zeros(n) if phi0 is None else np.array(phi0, dtype=float)
    if phi.shape != (n,) or not np.all(np.isfinite(phi)):
        raise ValueError(f"initial phi must be a finite vector of length {n}")
    system = _NewtonSystem(bg, K_target)
    if K_target <= 0.0:
        # start at unit area; for K > 0 the scale is fixed by the equation
        phi -= 0.5 * math.log(float(np.sum(bg.hat_weight * np.exp(2.0 * phi))))
    monitor = K_target > 0 and not system.bordered
    mu = 0.0
    min_eigenvalue = None

    F, g = system.evaluate(phi, mu)
    norm = system.merit(F, g)
    history = [norm]
    converged = False
    iterations = 0
    for iterations in range(1, options.max_iterations + 1):
        J = system.jacobian(phi)
        damping = 1.0
        if monitor:
            eigenvalue = smallest_eigenvalue(J, bg.hat_area)
            if min_eigenvalue is None or abs(eigenvalue) < min_eigenvalue:
                min_eigenvalue = abs(eigenvalue)
            if abs(eigenvalue) < options.singular_floor:
                raise SingularLinearization(
                    f"linearization eigenvalue {eigenvalue:.3e} at iteration {iterations}"
                )
            if abs(eigenvalue) < options.eigen_floor:
                once_logger.warning(
                    "near_singular",
                    f"Linearization eigenvalue {eigenvalue:.3e} below {options.eigen_floor}; "
                    "damping Newton steps",
                )
                damping = 0.5
        rhs = -F if not system.bordered else -np.concatenate([F, [g]])
        delta = spsolve(J, rhs)
        if not np.all(np.isfinite(delta)):
            raise NewtonDiverged(f"non-finite Newton step at iteration {iterations}")
        d_phi = delta[:n]
        d_mu = float(delta[n]) if system.bordered else 0.0
        sup = system.sup(F, g)
        if sup < options.tol_res and damping * float(np.max(np.abs(d_phi))) < options.tol_step:
            converged = True
            break

        alpha = damping
        accepted = False
        for _ in range(options.max_line_search + 1):
            trial_phi, trial_mu = phi + alpha * d_phi, mu + alpha * d_mu
            trial_F, trial_g = system.evaluate(trial_phi, trial_mu)
            trial_norm = system.merit(trial_F, trial_g)
            if math.isfinite(trial_norm) and trial_norm <= (1.0 - ARMIJO * alpha) * norm:
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            if sup < options.tol_res:
                converged = True
                break
            raise NewtonDiverged(
                f"line search failed at iteration {iterations}: |F| = {norm:.3e}, "
                f"sup residual {sup:.3e}"
            )
        phi, mu, F, g, norm = trial_phi, trial_mu, trial_F, trial_g, trial_norm
        history.append(norm)
        logger.debug(f"Newton iteration {iterations}: |F| = {norm:.3e}, step {alpha}")
    if not converged:
        if system.sup(F, g) >= options.tol_res:
            raise NewtonDiverged(
                f"no convergence in {options.max_iterations} iterations (|F| = {norm:.3e})"
            )

    diagnostics = _diagnostics(bg, phi, K_target, mu, iterations, system.sup(F, g))
    diagnostics.min_eigenvalue = min_eigenvalue
    logger.info(
        f"Newton converged in {iterations} iterations: K={K_target:.10f}, "
        f"gb_residual={diagnostics.gb_residual:.3e}"
    )
    return ConformalSolution(
        background=bg,
        phi=phi,
        K_target=K_target,
        newton_history=history,
        diagnostics=diagnostics,
    )


def nodal_curvature(bg: BackgroundGeometry, phi: np.ndarray) -> np.ndarray:
    """
    Gauss curvature of e^(2 psi + 2 phi) gbar at the vertices, (b + S phi) / (m e^(2 phi)).
    Equal to K_target at a solution up to the residual.
    """
    phi = np.asarray(phi, dtype=float)
    with np.errstate(over="ignore"):
        return (bg.hat_source + bg.stiffness @ phi) / (bg.hat_weight * np.exp(2.0 * phi))


def _diagnostics(
    bg: BackgroundGeometry,
    phi: np.ndarray,
    K_target: float,
    mu: float,
    iterations: int,
    sup: float,
) -> NewtonDiagnostics:
    area = float(np.sum(bg.hat_weight * np.exp(2.0 * phi)))
    quadrature = bg.singular_quadrature
    phi_nodes = quadrature.interpolate(phi, bg.mesh)
    area_quadrature = quadrature.integrate(
        np.exp(2.0 * (bg.singular_profile(quadrature.points) + phi_nodes))
    )
    curvature = nodal_curvature(bg, phi)
    return NewtonDiagnostics(
        area=area,
        area_quadrature=area_quadrature,
        gb_residual=abs(K_target * area - 2.0 * math.pi * bg.chi_beta()),
        min_phi=float(phi.min()),
        max_phi=float(phi.max()),
        multiplier=mu,
        mean_curvature=float(bg.hat_area @ curvature) / float(bg.hat_area.sum()),
        total_curvature=float(bg.hat_source.sum()),
        iterations=iterations,
        residual_sup=sup,
    )


# --------------------------------------------------------------------------------------------
# Exponents at the cones


def _slope(radii: np.ndarray, values: np.ndarray) -> Optional[float]:
    if np.any(values <= 1e-300) or not np.all(np.isfinite(values)):
        return None
    slope, _ = np.polyfit(np.log(radii), np.log(values), 1)
    return float(slope)


def exponent_audit(sol: ConformalSolution) -> List[ExponentFit]:
    """
    Per cone, fits log max|phi - phi(p_j)| over each ring against log sigma on the two finest
    decades of rings, and the same for the first angular Fourier coefficient.
    """
    fits = []
    for cone in sol.mesh.cones:
        beta = sol.background.spec.betas[cone.cone_index]
        finest = cone.radii.min()
        rings = np.flatnonzero(cone.radii <= finest * 10.0**AUDIT_DECADES * (1.0 + 1e-12))
        if rings.size < MIN_AUDIT_RINGS:
            raise MeshTooCoarse(
                f"cone {cone.cone_index + 1}: {rings.size} rings on the audit window, "
                f"{MIN_AUDIT_RINGS} needed"
            )
        center = sol.phi[cone.vertex]
        radii = cone.radii[rings]
        amplitude = np.array(
            [np.max(np.abs(sol.phi[cone.ring_vertices[m]] - center)) for m in rings]
        )
        mode1 = np.array(
            [
                abs(np.sum(sol.phi[cone.ring_vertices[m]] * np.exp(1j * cone.ring_angles(m))))
                * 2.0
                / cone.n_theta
                for m in rings
            ]
        )
        slope = _slope(radii, amplitude)
        if slope is None:
            raise DegenerateFit(f"phi is constant on the rings of cone {cone.cone_index + 1}")
        mode1_slope = _slope(radii, mode1) if mode1.max() > 1e-12 * amplitude.max() else None
        predicted = min(1.0, 2.0 * (1.0 + beta))
        fits.append(
            ExponentFit(
                cone_index=cone.cone_index,
                beta=beta,
                rings=int(rings.size),
                slope=slope,
                predicted=predicted,
                radius_slope=slope / (1.0 + beta),
                radius_predicted=predicted / (1.0 + beta),
                radius_reference=radius_reference_exponent(beta),
                mode1_slope=mode1_slope,
            )
        )
        logger.info(
            f"Cone {cone.cone_index + 1} (beta={beta}): slope {slope:.4f} in sigma, "
            f"{slope / (1.0 + beta):.4f} in r (reference {radius_reference_exponent(beta):.4f})"
        )
    return fits


# --------------------------------------------------------------------------------------------
# Drivers


def uniformize(
    spec: ConicSurfaceSpec,
    options: Optional[SolverOptions] = None,
    mesh: Optional[SurfaceMesh] = None,
    phi0: Optional[np.ndarray] = None,
) -> ConformalSolution:
    """
    Gate, K from unit area, Newton. Spherical specs with k >= 3 that fail from a cold start are
    reached by continuation from their Euclidean projection.
    """
    options = options or SolverOptions()
    bg = build_background(spec, options, mesh=mesh)
    K_target = gauss_bonnet_pair(spec, 1.0)
    try:
        solution = newton_solve(bg, K_target, phi0, options)
    except (NewtonDiverged, SingularLinearization) as e:
        if bg.classification.tag != GeometryTag.SPHERICAL or spec.k < 3:
            raise
        logger.warning(f"Cold start failed ({e}); continuing from the Euclidean projection")
        solution = _continue_from_euclidean(spec, options, bg.mesh)
    try:
        solution.diagnostics.exponent_fits = exponent_audit(solution)
    except (MeshTooCoarse, DegenerateFit) as e:
        logger.info(f"Exponent audit skipped: {e}")
    return solution


def _continue_from_euclidean(
    spec: ConicSurfaceSpec, options: SolverOptions, mesh: SurfaceMesh
) -> ConformalSolution:
    lam, euclidean = sph_to_euc_projection(spec.angles)
    start = np.asarray(euclidean.betas)

    def path(t):
        return start * (1.0 + t * (lam - 1.0))

    t_values = np.linspace(0.0, 1.0, options.continuation_steps + 1)
    sweep = family_sweep(spec, path, t_values, options, mesh=mesh)
    if sweep.rejected_index is not None or not sweep.solutions:
        raise NewtonDiverged("continuation from the Euclidean projection left the region")
    return sweep.solutions[-1]


class SweepPoint(BaseModel):
    index: int
    t: float
    betas: List[float]
    tag: GeometryTag
    K_target: Optional[float] = None
    mean_curvature: Optional[float] = None
    gb_residual: Optional[float] = None


class SweepResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: List[SweepPoint]
    rejected_index: Optional[int] = None
    k_zero: Optional[float] = None
    mean_curvature_zero: Optional[float] = None
    solutions: List[ConformalSolution] = Field(default_factory=list, repr=False)

    def payload(self) -> dict:
        return self.model_dump(exclude={"solutions"}, mode="json")


def zero_crossing(t: Sequence[float], values: Sequence[float]) -> Optional[float]:
    """
    First zero of the piecewise linear interpolant of values(t).
    """
    for i in range(len(values)):
        if values[i] == 0.0:
            return float(t[i])
        if i + 1 < len(values) and values[i] * values[i + 1] < 0.0:
            return float(t[i] - values[i] * (t[i + 1] - t[i]) / (values[i + 1] - values[i]))
    return None


def linear_path(start: Sequence[float], end: Sequence[float]) -> Callable[[float], np.ndarray]:
    start, end = np.asarray(start, dtype=float), np.asarray(end, dtype=float)

    def path(t: float) -> np.ndarray:
        return (1.0 - t) * start + t * end

    return path


def family_sweep(
    spec: ConicSurfaceSpec,
    path: Callable[[float], Sequence[float]],
    t_values: Sequence[float],
    options: Optional[SolverOptions] = None,
    mesh: Optional[SurfaceMesh] = None,
) -> SweepResult:
    """
    Continuation along beta = path(t) at fixed positions with unit area. Every point is
    re-gated; the first rejection stops the sweep and is recorded.
    """
    options = options or SolverOptions()
    points: List[SweepPoint] = []
    solutions: List[ConformalSolution] = []
    rejected_index = None
    phi = None
    for index, t in enumerate(t_values):
        betas = [float(b) for b in path(float(t))]
        try:
            current = spec.with_angles(ConeAngleVector(betas=betas))
        except ValueError as e:
            logger.info(f"Sweep point {index} (t={t}) leaves the admissible angles: {e}")
            points.append(SweepPoint(index=index, t=t, betas=betas, tag=GeometryTag.NOT_COVERED))
            rejected_index = index
            break
        tag = classify(current).tag
        try:
            bg = build_background(current, options, mesh=mesh)
        except GateRejection:
            logger.info(f"Sweep point {index} (t={t}) rejected by the gate: {tag.value}")
            points.append(SweepPoint(index=index, t=t, betas=betas, tag=tag))
            rejected_index = index
            break
        mesh = bg.mesh
        K_target = gauss_bonnet_pair(current, 1.0)
        solution = newton_solve(bg, K_target, phi, options)
        phi = solution.phi
        solutions.append(solution)
        points.append(
            SweepPoint(
                index=index,
                t=t,
                betas=betas,
                tag=tag,
                K_target=K_target,
                mean_curvature=solution.diagnostics.mean_curvature,
                gb_residual=solution.diagnostics.gb_residual,
            )
        )
        logger.info(f"Sweep point {index} (t={t}): {tag.value}, K={K_target:.10f}")

    solved = [p for p in points if p.K_target is not None]
    ts = [p.t for p in solved]
    return SweepResult(
        points=points,
        rejected_index=rejected_index,
        k_zero=zero_crossing(ts, [p.K_target for p in solved]),
        mean_curvature_zero=zero_crossing(ts, [p.mean_curvature for p in solved]),
        solutions=solutions,
    )


# --------------------------------------------------------------------------------------------
# Football reference


def football_reference(bg: BackgroundGeometry) -> np.ndarray:
    """
    Exact phi at the vertices for two antipodal equal cones on the sphere: the unit-area
    football written over the round sphere, minus the singular profile.
    """
    spec = bg.spec
    if spec.genus != 0 or spec.k != 2 or spec.betas[0] != spec.betas[1]:
        raise ValueError("the football reference needs two equal cones on the sphere")
    p = np.asarray(spec.positions, dtype=float)
    if np.linalg.norm(p[0] + p[1]) > 1e-9:
        raise ValueError("the football reference needs antipodal cone points")
    beta = spec.betas[0]
    K = gauss_bonnet_pair(spec, 1.0)
    x = bg.mesh.vertices
    sigma = np.stack([bg.sigma(x, 0), bg.sigma(x, 1)])
    nearest = np.argmin(sigma, axis=0)
    near = sigma[nearest, np.arange(x.shape[0])]
    cone = bg.mesh.cones[0]
    chi, _, _ = cutoff(near, cone.cutoff_inner, cone.cutoff_outer)
    phi = football_conformal_factor(near, beta, K)
    outside = near > 0.0
    phi[outside] += beta * (1.0 - chi[outside]) * np.log(near[outside])
    return phi


def football_error(sol: ConformalSolution) -> float:
    return float(np.max(np.abs(sol.phi - football_reference(sol.background))))
