# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
indicial

Indicial calculus at a cone point of angle 2*pi*(1+beta).

An operator of weight w maps r^zeta * Phi * e^{iky} to r^(zeta - w) * A_k(zeta) Phi * e^{iky},
where zeta stands for the symbol of r d/dr and A_k is a small matrix polynomial. Computations run
in the complex exponential basis; reported eigensections are real (cos ky, sin ky) coefficient
pairs.

Bases:
    1-forms: eta = eta_1 dr + eta_2 (1+beta) r dy
    symmetric 2-tensors: phi_1 g + phi_2 (dr^2 - (1+beta)^2 r^2 dy^2)
                         + phi_3 (1+beta) r (dr dy + dy dr)

delta_star uses the Lie derivative normalization eta -> L_{eta#} g, so that P = Bianchi o
delta_star holds exactly.
"""

import math
from enum import Enum
from typing import Iterable
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from scipy import linalg
from scipy.special import comb

from .datatypes import ConeAngleVector
from .exceptions import InvalidNu
from .exceptions import NotIndicialRoot
from .logger import setup_logger

logger = setup_logger(name="indicial")

# Absolute tolerance for "is a root", window endpoints and the log rank test
ROOT_TOLERANCE = 1e-12
# Relative singular value threshold for kernels of mode matrices
KERNEL_TOLERANCE = 1e-10


class OperatorName(Enum):
    SCALAR = "ScalarLaplacian"
    P = "P"
    L = "L"
    DELTA = "delta"
    DELTA_STAR = "delta_star"
    CONFORMAL_KILLING = "ConformalKilling"
    BIANCHI = "Bianchi"
    TRACE = "trace"


class RootFamily(Enum):
    SCALAR = "scalar"
    ONE_FORM = "oneform"
    TRACE = "trace"
    TRACE_FREE = "trace_free"


class MatrixPolynomial:
    """
    A(zeta) = sum_j coefficients[j] * zeta^j with complex matrix coefficients, together with the
    radial weight of the operator it realizes.
    """

    def __init__(self, coefficients, weight: int):
        coefficients = np.asarray(coefficients, dtype=complex)
        if coefficients.ndim != 3:
            raise ValueError("coefficients must have shape (degree + 1, rows, cols)")
        self.coefficients = coefficients
        self.weight = weight

    @property
    def shape(self) -> Tuple[int, int]:
        return self.coefficients.shape[1], self.coefficients.shape[2]

    @property
    def degree(self) -> int:
        return self.coefficients.shape[0] - 1

    def __call__(self, zeta: complex) -> np.ndarray:
        result = np.zeros(self.shape, dtype=complex)
        for coefficient in self.coefficients[::-1]:
            result = result * zeta + coefficient
        return result

    def derivative(self) -> "MatrixPolynomial":
        if self.degree == 0:
            return MatrixPolynomial(np.zeros_like(self.coefficients), self.weight)
        powers = np.arange(1, self.degree + 1)[:, None, None]
        return MatrixPolynomial(self.coefficients[1:] * powers, self.weight)

    def shifted(self, s: float) -> "MatrixPolynomial":
        """
        The polynomial zeta -> A(zeta - s).
        """
        result = np.zeros_like(self.coefficients)
        for j, coefficient in enumerate(self.coefficients):
            for i in range(j + 1):
                result[i] += coefficient * comb(j, i, exact=True) * (-s) ** (j - i)
        return MatrixPolynomial(result, self.weight)

    def compose(self, inner: "MatrixPolynomial") -> "MatrixPolynomial":
        """
        Realization of (self o inner): zeta -> self(zeta - w_inner) @ inner(zeta).
        """
        outer = self.shifted(inner.weight).coefficients
        rows, cols = self.shape[0], inner.shape[1]
        result = np.zeros((outer.shape[0] + inner.degree, rows, cols), dtype=complex)
        for i, a in enumerate(outer):
            for j, b in enumerate(inner.coefficients):
                result[i + j] += a @ b
        return MatrixPolynomial(result, self.weight + inner.weight)

    def distance(self, other: "MatrixPolynomial") -> float:
        """
        Largest entrywise coefficient difference.
        """
        degree = max(self.degree, other.degree)
        a = np.zeros((degree + 1,) + self.shape, dtype=complex)
        b = np.zeros((degree + 1,) + other.shape, dtype=complex)
        a[: self.degree + 1] = self.coefficients
        b[: other.degree + 1] = other.coefficients
        return float(np.max(np.abs(a - b)))


class ModeOperatorMatrix(BaseModel):
    """
    Mode-reduced realization of an operator on the model cone. `entries` holds the matrix
    polynomial in the r d/dr symbol; `zeroth_order` and `first_order` are its constant and
    linear coefficients.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    operator: OperatorName
    mode: int
    beta: float
    entries: MatrixPolynomial

    @property
    def weight(self) -> int:
        return self.entries.weight

    @property
    def zeroth_order(self) -> np.ndarray:
        return self.entries.coefficients[0]

    @property
    def first_order(self) -> np.ndarray:
        if self.entries.degree < 1:
            return np.zeros(self.entries.shape, dtype=complex)
        return self.entries.coefficients[1]

    @property
    def second_order(self) -> np.ndarray:
        if self.entries.degree < 2:
            return np.zeros(self.entries.shape, dtype=complex)
        return self.entries.coefficients[2]

    def at(self, zeta: complex) -> np.ndarray:
        return self.entries(zeta)


def _kappa(beta: float, mode: int) -> float:
    return mode / (1.0 + beta)


def _polynomial(operator: OperatorName, kappa: float) -> MatrixPolynomial:
    ik = 1j * kappa
    if operator == OperatorName.SCALAR:
        return MatrixPolynomial([[[kappa**2]], [[0.0]], [[-1.0]]], weight=2)
    if operator == OperatorName.P:
        zeroth = (1.0 + kappa**2) * np.eye(2) + np.array([[0, 2 * ik], [-2 * ik, 0]])
        return MatrixPolynomial([zeroth, np.zeros((2, 2)), -np.eye(2)], weight=2)
    if operator == OperatorName.L:
        zeroth = np.zeros((3, 3), dtype=complex)
        zeroth[0, 0] = kappa**2
        zeroth[1:, 1:] = (4.0 + kappa**2) * np.eye(2) + np.array([[0, 4 * ik], [-4 * ik, 0]])
        return MatrixPolynomial([zeroth, np.zeros((3, 3)), -np.eye(3)], weight=2)
    if operator == OperatorName.DELTA:
        zeroth = [[0, -2, -ik], [-ik, ik, -2]]
        first = [[-1, -1, 0], [0, 0, -1]]
        return MatrixPolynomial([zeroth, first], weight=1)
    if operator == OperatorName.DELTA_STAR:
        zeroth = [[1, ik], [-1, -ik], [ik, -1]]
        first = [[1, 0], [1, 0], [0, 1]]
        return MatrixPolynomial([zeroth, first], weight=1)
    if operator == OperatorName.CONFORMAL_KILLING:
        zeroth = [[0, 0], [-1, -ik], [ik, -1]]
        first = [[0, 0], [1, 0], [0, 1]]
        return MatrixPolynomial([zeroth, first], weight=1)
    if operator == OperatorName.BIANCHI:
        zeroth = [[0, -2, -ik], [0, ik, -2]]
        first = [[0, -1, 0], [0, 0, -1]]
        return MatrixPolynomial([zeroth, first], weight=1)
    if operator == OperatorName.TRACE:
        return MatrixPolynomial([[[1, 0, 0]]], weight=0)
    raise ValueError(f"Unknown operator {operator}")


def mode_matrix(
    op_name: Union[OperatorName, str], beta: float, mode: int
) -> ModeOperatorMatrix:
    """
    Exact mode-reduced matrix of an operator on Fourier mode `mode`.
    """
    operator = OperatorName(op_name)
    if not -1.0 < beta < 0.0:
        raise ValueError(f"beta={beta} is outside (-1, 0)")
    return ModeOperatorMatrix(
        operator=operator,
        mode=mode,
        beta=beta,
        entries=_polynomial(operator, _kappa(beta, mode)),
    )


# --------------------------------------------------------------------------------------------
# Root tables


class IndicialRoot(BaseModel):
    """
    One solution family r^value * Phi(y). `eigensections` lists real sections as arrays of shape
    (components, 2) holding the (cos ky, sin ky) coefficients of each component, with k = mode.
    `multiplicity` is the number of real sections.
    """

    value: float
    mode: int
    branch: int = 0
    family: RootFamily
    multiplicity: int
    log_multiplicity: int = 0
    eigensections: List[List[List[float]]] = Field(default_factory=list)

    @property
    def eigensection(self) -> np.ndarray:
        return np.asarray(self.eigensections[0])


class IndicialRootTable(BaseModel):
    operator: OperatorName
    beta: float
    window: Tuple[float, float]
    roots: List[IndicialRoot]

    def values(self) -> List[float]:
        distinct: List[float] = []
        for root in self.roots:
            if not distinct or abs(root.value - distinct[-1]) > ROOT_TOLERANCE:
                distinct.append(root.value)
        return distinct

    def multiplicity(self, value: float) -> int:
        return sum(r.multiplicity for r in self.roots if abs(r.value - value) <= ROOT_TOLERANCE)

    def log_multiplicity(self, value: float) -> int:
        return sum(
            r.log_multiplicity for r in self.roots if abs(r.value - value) <= ROOT_TOLERANCE
        )


def _branch_modes(offset: float, c: float, window: Tuple[float, float]) -> Iterable[int]:
    lo, hi = window
    k_min = math.ceil((lo - offset - ROOT_TOLERANCE) * c)
    k_max = math.floor((hi - offset + ROOT_TOLERANCE) * c)
    for k in range(k_min, k_max + 1):
        value = offset + k / c
        if lo - ROOT_TOLERANCE <= value <= hi + ROOT_TOLERANCE:
            yield k


def _as_complex(section: np.ndarray, mode: int) -> np.ndarray:
    if mode == 0:
        return section[:, 0].astype(complex)
    return section[:, 0] - 1j * section[:, 1]


def section_residual(
    matrix: ModeOperatorMatrix, zeta: float, section, derivative: bool = False
) -> float:
    """
    Sup norm of A_k(zeta) Phi (or A_k'(zeta) Phi) for a real section Phi.
    """
    poly = matrix.entries.derivative() if derivative else matrix.entries
    v = _as_complex(np.asarray(section, dtype=float), matrix.mode)
    return float(np.max(np.abs(poly(zeta) @ v)))


def _scalar_sections(mode: int, components: int, slot: int) -> List[np.ndarray]:
    sections = []
    for trig in ((1.0, 0.0), (0.0, 1.0)) if mode != 0 else ((1.0, 0.0),):
        section = np.zeros((components, 2))
        section[slot] = trig
        sections.append(section)
    return sections


def _paired_sections(epsilon: int, components: int, first_slot: int) -> List[np.ndarray]:
    first = np.zeros((components, 2))
    first[first_slot] = (1.0, 0.0)
    first[first_slot + 1] = (0.0, epsilon)
    second = np.zeros((components, 2))
    second[first_slot] = (0.0, -1.0)
    second[first_slot + 1] = (epsilon, 0.0)
    return [first, second]


def _make_root(
    operator: OperatorName,
    beta: float,
    family: RootFamily,
    value: float,
    mode: int,
    branch: int,
    sections: List[np.ndarray],
) -> IndicialRoot:
    matrix = mode_matrix(operator, beta, mode)
    residual = max(section_residual(matrix, value, s) for s in sections)
    if residual > ROOT_TOLERANCE * max(1.0, value * value):
        raise ArithmeticError(f"eigensection residual {residual} at zeta={value}, mode={mode}")
    log_multiplicity = 0
    if abs(value) <= ROOT_TOLERANCE and all(
        section_residual(matrix, value, s, derivative=True) <= ROOT_TOLERANCE for s in sections
    ):
        log_multiplicity = 1
    return IndicialRoot(
        value=0.0 if abs(value) <= ROOT_TOLERANCE else value,
        mode=mode,
        branch=branch,
        family=family,
        multiplicity=len(sections),
        log_multiplicity=log_multiplicity,
        eigensections=[s.tolist() for s in sections],
    )


def _scalar_family(
    operator: OperatorName, beta: float, window, components: int, family: RootFamily
) -> List[IndicialRoot]:
    c = 1.0 + beta
    roots = []
    for k in _branch_modes(0.0, c, window):
        mode = abs(k)
        roots.append(
            _make_root(
                operator,
                beta,
                family,
                k / c,
                mode,
                int(np.sign(k)),
                _scalar_sections(mode, components, 0),
            )
        )
    return roots


def _paired_family(
    operator: OperatorName,
    beta: float,
    window,
    offset: float,
    components: int,
    first_slot: int,
    family: RootFamily,
) -> List[IndicialRoot]:
    # Branch (eps, k): root eps*offset + k/c with complex eigenvector psi_k [1, -eps i].
    # At zeta = 0 the branches (eps, k) and (-eps, -k) coalesce into one log pair.
    c = 1.0 + beta
    roots = []
    for epsilon in (1, -1):
        for k in _branch_modes(epsilon * offset, c, window):
            value = epsilon * offset + k / c
            if abs(value) <= ROOT_TOLERANCE and k < 0:
                continue
            roots.append(
                _make_root(
                    operator,
                    beta,
                    family,
                    value,
                    k,
                    epsilon,
                    _paired_sections(epsilon, components, first_slot),
                )
            )
    return roots


def _table(operator: OperatorName, beta: float, window, roots) -> IndicialRootTable:
    if not -1.0 < beta < 0.0:
        raise ValueError(f"beta={beta} is outside (-1, 0)")
    roots = sorted(roots, key=lambda r: (r.value, r.family.value, r.mode, r.branch))
    logger.debug(f"{operator.value} beta={beta} window={window}: {len(roots)} root entries")
    return IndicialRootTable(operator=operator, beta=beta, window=tuple(window), roots=roots)


def _check_window(window) -> Tuple[float, float]:
    lo, hi = float(window[0]), float(window[1])
    if not lo <= hi:
        raise ValueError(f"empty window [{lo}, {hi}]")
    return lo, hi


def roots_scalar(beta: float, window) -> IndicialRootTable:
    """
    Roots k/(1+beta) of the scalar Laplacian; zeta = 0 is a double root (constant and log r).
    """
    window = _check_window(window)
    roots = _scalar_family(OperatorName.SCALAR, beta, window, 1, RootFamily.SCALAR)
    return _table(OperatorName.SCALAR, beta, window, roots)


def roots_oneform(beta: float, window) -> IndicialRootTable:
    """
    Roots +-1 + k/(1+beta) of P on 1-forms.
    """
    window = _check_window(window)
    roots = _paired_family(OperatorName.P, beta, window, 1.0, 2, 0, RootFamily.ONE_FORM)
    return _table(OperatorName.P, beta, window, roots)


def roots_symmetric2(beta: float, window) -> IndicialRootTable:
    """
    Roots of L: the trace part repeats the scalar roots, the trace-free part has
    +-2 + k/(1+beta).
    """
    window = _check_window(window)
    roots = _scalar_family(OperatorName.L, beta, window, 3, RootFamily.TRACE)
    roots += _paired_family(OperatorName.L, beta, window, 2.0, 3, 1, RootFamily.TRACE_FREE)
    return _table(OperatorName.L, beta, window, roots)


def closed_form_roots(op_name: Union[OperatorName, str], beta: float, mode: int) -> List[float]:
    """
    All roots of det A_k(zeta) = 0 for the second order operators, with repetition.
    """
    operator = OperatorName(op_name)
    kappa = _kappa(beta, mode)
    if operator == OperatorName.SCALAR:
        roots = [kappa, -kappa]
    elif operator == OperatorName.P:
        roots = [kappa + 1, -(kappa + 1), kappa - 1, -(kappa - 1)]
    elif operator == OperatorName.L:
        roots = [kappa, -kappa, kappa + 2, -(kappa + 2), kappa - 2, -(kappa - 2)]
    else:
        raise ValueError(f"{operator.value} has no indicial roots of its own")
    return sorted(roots)


def eigen_roots(op_name: Union[OperatorName, str], beta: float, mode: int) -> List[float]:
    """
    Same roots from the eigenvalues mu of the Hermitian zeroth-order block: A_k(zeta) is
    -zeta^2 + Z_k, so the roots are +-sqrt(mu).
    """
    matrix = mode_matrix(op_name, beta, mode)
    if matrix.entries.degree != 2:
        raise ValueError(f"{matrix.operator.value} is not a second order operator")
    mu = linalg.eigvalsh(matrix.zeroth_order)
    mu = np.clip(mu, 0.0, None)
    return sorted(np.concatenate([np.sqrt(mu), -np.sqrt(mu)]).tolist())


# --------------------------------------------------------------------------------------------
# Intertwining


class IntertwiningDirection(Enum):
    BIANCHI = "bianchi"  # B L = P B
    KILLING = "killing"  # L D = D P


class IntertwiningReport(BaseModel):
    beta: float
    mode: int
    zeta: float
    direction: IntertwiningDirection
    target_zeta: float
    kernel_dim: int
    image_norms: List[float]
    residuals: List[float]
    identity_residual: float

    @property
    def max_residual(self) -> float:
        return max(self.residuals + [self.identity_residual])


def _intertwining_operators(direction: IntertwiningDirection):
    if direction == IntertwiningDirection.BIANCHI:
        return OperatorName.L, OperatorName.BIANCHI, OperatorName.P
    return OperatorName.P, OperatorName.CONFORMAL_KILLING, OperatorName.L


def intertwining_identity_residual(
    beta: float, mode: int, direction: Union[IntertwiningDirection, str]
) -> float:
    """
    Coefficientwise distance between link o source and target o link as polynomials in the
    r d/dr symbol.
    """
    source, link, target = _intertwining_operators(IntertwiningDirection(direction))
    a = mode_matrix(link, beta, mode).entries.compose(mode_matrix(source, beta, mode).entries)
    b = mode_matrix(target, beta, mode).entries.compose(mode_matrix(link, beta, mode).entries)
    return a.distance(b)


def check_intertwining(
    beta: float,
    mode: int,
    zeta: float,
    direction: Union[IntertwiningDirection, str] = IntertwiningDirection.BIANCHI,
) -> IntertwiningReport:
    """
    For every Phi in the kernel of the source operator at (zeta, mode), maps r^zeta Phi through
    the link operator and evaluates the target operator on the image at zeta - 1.
    """
    direction = IntertwiningDirection(direction)
    source, link, target = _intertwining_operators(direction)
    source_matrix = mode_matrix(source, beta, mode).at(zeta)
    scale = max(1.0, float(np.max(np.abs(source_matrix))))
    singular_values = linalg.svdvals(source_matrix)
    if singular_values[-1] > KERNEL_TOLERANCE * scale:
        raise NotIndicialRoot(
            f"zeta={zeta} is not an indicial root of {source.value} on mode {mode} "
            f"(smallest singular value {singular_values[-1]:.3e})"
        )
    kernel = linalg.null_space(source_matrix, rcond=KERNEL_TOLERANCE)
    link_matrix = mode_matrix(link, beta, mode)
    target_zeta = zeta - link_matrix.weight
    target_matrix = mode_matrix(target, beta, mode).at(target_zeta)
    image_norms, residuals = [], []
    for phi in kernel.T:
        image = link_matrix.at(zeta) @ phi
        image_norms.append(float(np.linalg.norm(image)))
        residuals.append(float(np.max(np.abs(target_matrix @ image))))
    return IntertwiningReport(
        beta=beta,
        mode=mode,
        zeta=zeta,
        direction=direction,
        target_zeta=target_zeta,
        kernel_dim=kernel.shape[1],
        image_norms=image_norms,
        residuals=residuals,
        identity_residual=intertwining_identity_residual(beta, mode, direction),
    )


# --------------------------------------------------------------------------------------------
# X_beta -> Y_beta


class XYMap(BaseModel):
    beta: float
    zeta_x: float
    zeta_y: float
    matrix: List[List[float]]
    determinant: float
    residual: float


def _flatten_real(section: np.ndarray) -> np.ndarray:
    return np.asarray(section, dtype=float).reshape(-1)


def xbeta_ybeta_map(beta: float) -> XYMap:
    """
    Matrix of the conformal Killing operator D from X_beta (roots -1 + 1/(1+beta) of P on modes
    +-1) to Y_beta (trace-free roots -2 + 1/(1+beta) of L), in the real eigensection bases of
    the (eps = -1, k = 1) branches. It equals (2/(1+beta) - 2) * identity.
    """
    if not -1.0 < beta < 0.0:
        raise ValueError(f"beta={beta} is outside (-1, 0)")
    c = 1.0 + beta
    zeta_x = -1.0 + 1.0 / c
    zeta_y = zeta_x - 1.0
    x_sections = _paired_sections(-1, 2, 0)
    y_sections = _paired_sections(-1, 3, 1)
    p_matrix = mode_matrix(OperatorName.P, beta, 1)
    l_matrix = mode_matrix(OperatorName.L, beta, 1)
    d_matrix = mode_matrix(OperatorName.CONFORMAL_KILLING, beta, 1)

    y_basis = np.stack([_flatten_real(s) for s in y_sections], axis=1)
    columns, residual = [], 0.0
    for section in x_sections:
        residual = max(residual, section_residual(p_matrix, zeta_x, section))
        image = d_matrix.at(zeta_x) @ _as_complex(section, 1)
        real_image = np.stack([image.real, -image.imag], axis=1)
        residual = max(residual, section_residual(l_matrix, zeta_y, real_image))
        target = _flatten_real(real_image)
        coefficients, *_ = np.linalg.lstsq(y_basis, target, rcond=None)
        residual = max(residual, float(np.max(np.abs(y_basis @ coefficients - target))))
        columns.append(coefficients)
    matrix = np.stack(columns, axis=1)
    return XYMap(
        beta=beta,
        zeta_x=zeta_x,
        zeta_y=zeta_y,
        matrix=matrix.tolist(),
        determinant=float(np.linalg.det(matrix)),
        residual=residual,
    )


# --------------------------------------------------------------------------------------------
# Geometric labels and regularization


class GeometricLabel(BaseModel):
    operator: OperatorName
    family: RootFamily
    root: float
    mode: int
    label: str


def geometric_labels(beta: float) -> List[GeometricLabel]:
    """
    Geometric meaning of the roots near zero: metric scaling and cone angle change (scalar
    double root), dilation and rotation (P at 1), and the growth rates of smooth and singular
    transverse-traceless tensors (trace-free L).
    """
    if not -1.0 < beta < 0.0:
        raise ValueError(f"beta={beta} is outside (-1, 0)")
    c = 1.0 + beta
    return [
        GeometricLabel(
            operator=OperatorName.SCALAR,
            family=RootFamily.SCALAR,
            root=0.0,
            mode=0,
            label="scale",
        ),
        GeometricLabel(
            operator=OperatorName.SCALAR,
            family=RootFamily.SCALAR,
            root=0.0,
            mode=0,
            label="cone-angle change",
        ),
        GeometricLabel(
            operator=OperatorName.P,
            family=RootFamily.ONE_FORM,
            root=1.0,
            mode=0,
            label="dilation r d/dr",
        ),
        GeometricLabel(
            operator=OperatorName.P,
            family=RootFamily.ONE_FORM,
            root=1.0,
            mode=0,
            label="rotation d/dy",
        ),
        GeometricLabel(
            operator=OperatorName.L,
            family=RootFamily.TRACE_FREE,
            root=-2.0 + 2.0 / c,
            mode=2,
            label="smooth-tensor rate",
        ),
        GeometricLabel(
            operator=OperatorName.L,
            family=RootFamily.TRACE_FREE,
            root=-2.0 + 1.0 / c,
            mode=1,
            label="singular-TT rate",
        ),
    ]


class Regularization(Enum):
    IDENTITY = "Identity"
    SUBTRACT_CONFORMAL_KILLING = "SubtractConformalKilling"


class ConeRegularization(BaseModel):
    index: int
    beta: float
    decision: Regularization
    exponent: Optional[float] = None


def regularization_plan(betas: ConeAngleVector, nu: float) -> List[ConeRegularization]:
    """
    Per-cone decision for the regularization map at weight nu. Cones with beta < -1/2 decay fast
    enough on their own as long as nu < -2 + 1/(1+beta); the others need a conformal Killing
    term of exponent -1 + 1/(1+beta) subtracted.
    """
    if not 0.0 < nu < 1.0:
        raise InvalidNu(f"nu={nu} is outside (0, 1)")
    offending = [
        (j, -2.0 + 1.0 / (1.0 + b))
        for j, b in enumerate(betas.betas)
        if b < -0.5 and nu >= -2.0 + 1.0 / (1.0 + b)
    ]
    if offending:
        max_admissible = min(bound for _, bound in offending)
        raise InvalidNu(
            f"nu={nu} is too large for cones {[j + 1 for j, _ in offending]}; "
            f"largest admissible value is below {max_admissible}",
            max_admissible=max_admissible,
        )
    plan = []
    for j, b in enumerate(betas.betas):
        if b < -0.5:
            plan.append(ConeRegularization(index=j + 1, beta=b, decision=Regularization.IDENTITY))
        else:
            plan.append(
                ConeRegularization(
                    index=j + 1,
                    beta=b,
                    decision=Regularization.SUBTRACT_CONFORMAL_KILLING,
                    exponent=-1.0 + 1.0 / (1.0 + b),
                )
            )
    return plan
