import math

import numpy as np
import pytest
from hypothesis import assume
from hypothesis import given
from hypothesis import settings
from hypothesis import strategies as st

from conic_surfaces.datatypes import ConeAngleVector
from conic_surfaces.exceptions import InvalidNu
from conic_surfaces.exceptions import NotIndicialRoot
from conic_surfaces.indicial import OperatorName
from conic_surfaces.indicial import Regularization
from conic_surfaces.indicial import RootFamily
from conic_surfaces.indicial import check_intertwining
from conic_surfaces.indicial import closed_form_roots
from conic_surfaces.indicial import eigen_roots
from conic_surfaces.indicial import geometric_labels
from conic_surfaces.indicial import intertwining_identity_residual
from conic_surfaces.indicial import mode_matrix
from conic_surfaces.indicial import regularization_plan
from conic_surfaces.indicial import roots_oneform
from conic_surfaces.indicial import roots_scalar
from conic_surfaces.indicial import roots_symmetric2
from conic_surfaces.indicial import section_residual
from conic_surfaces.indicial import xbeta_ybeta_map


def test_scalar_roots_half_angle():
    table = roots_scalar(-0.5, (-4.0, 4.0))
    assert table.values() == [-4.0, -2.0, 0.0, 2.0, 4.0]
    assert table.multiplicity(0.0) == 1
    assert table.log_multiplicity(0.0) == 1
    assert table.multiplicity(2.0) == 2
    assert table.log_multiplicity(2.0) == 0


def test_oneform_roots_half_angle():
    table = roots_oneform(-0.5, (-4.0, 4.0))
    assert table.values() == [-3.0, -1.0, 1.0, 3.0]
    assert table.multiplicity(1.0) == 4
    assert all(root.family == RootFamily.ONE_FORM for root in table.roots)


def test_symmetric2_zero_root_at_half_angle():
    table = roots_symmetric2(-0.5, (-1.0, 1.0))
    assert table.values() == [0.0]
    # trace part (mode 0) and the coalesced trace-free pair on modes +-1
    assert table.multiplicity(0.0) == 3
    assert table.log_multiplicity(0.0) == 2


@pytest.mark.parametrize("builder", [roots_scalar, roots_oneform, roots_symmetric2])
@pytest.mark.parametrize("beta", [-0.25, -0.5, -2.0 / 3.0, -0.75])
def test_eigensections_solve_the_mode_equation(builder, beta):
    table = builder(beta, (-5.0, 5.0))
    for root in table.roots:
        matrix = mode_matrix(table.operator, beta, root.mode)
        for section in root.eigensections:
            residual = section_residual(matrix, root.value, section)
            assert residual <= 1e-12 * max(1.0, root.value**2)


@settings(max_examples=100, deadline=None)
@given(
    beta=st.floats(min_value=-0.95, max_value=-0.05),
    mode=st.integers(min_value=-5, max_value=5),
    operator=st.sampled_from([OperatorName.SCALAR, OperatorName.P, OperatorName.L]),
)
def test_closed_form_matches_eigen_roots(beta, mode, operator):
    # compare squares: sqrt amplifies rounding near double roots
    closed = np.sort(np.square(closed_form_roots(operator, beta, mode)))
    eigen = np.sort(np.square(eigen_roots(operator, beta, mode)))
    assert np.allclose(closed, eigen, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(
    beta=st.floats(min_value=-0.95, max_value=-0.05),
    mode=st.integers(min_value=-6, max_value=6),
    direction=st.sampled_from(["bianchi", "killing"]),
)
def test_intertwining_identities(beta, mode, direction):
    assert intertwining_identity_residual(beta, mode, direction) <= 1e-12


def test_intertwining_at_trace_free_root():
    beta = -0.3
    zeta = 2.0 + 1.0 / (1.0 + beta)
    report = check_intertwining(beta, 1, zeta, "bianchi")
    assert report.kernel_dim == 1
    assert report.target_zeta == pytest.approx(zeta - 1.0)
    assert report.max_residual <= 1e-10


def test_intertwining_rejects_non_roots():
    with pytest.raises(NotIndicialRoot):
        check_intertwining(-0.3, 1, 0.123, "bianchi")


def test_bianchi_annihilates_pure_trace():
    matrix = mode_matrix(OperatorName.BIANCHI, -0.4, 3)
    for zeta in (-1.5, 0.0, 2.25):
        assert np.all(matrix.at(zeta) @ np.array([1.0, 0.0, 0.0]) == 0.0)


@pytest.mark.parametrize("beta", [-0.1, -0.5, -0.9])
def test_xy_map_is_a_multiple_of_identity(beta):
    c = 1.0 + beta
    result = xbeta_ybeta_map(beta)
    factor = 2.0 / c - 2.0
    assert np.allclose(result.matrix, factor * np.eye(2), atol=1e-12)
    assert math.isclose(result.determinant, 4.0 * beta * beta / (c * c), rel_tol=1e-12)
    assert result.residual <= 1e-12


def test_geometric_labels():
    labels = {label.label: label for label in geometric_labels(-0.5)}
    assert labels["smooth-tensor rate"].root == 2.0
    assert labels["singular-TT rate"].root == 0.0
    assert labels["dilation r d/dr"].root == 1.0


def test_regularization_plan():
    plan = regularization_plan(ConeAngleVector(betas=[-0.25, -0.75]), 0.5)
    assert plan[0].decision == Regularization.SUBTRACT_CONFORMAL_KILLING
    assert plan[0].exponent == pytest.approx(1.0 / 3.0)
    assert plan[1].decision == Regularization.IDENTITY
    assert plan[1].exponent is None


def test_regularization_plan_invalid_nu():
    with pytest.raises(InvalidNu) as excinfo:
        regularization_plan(ConeAngleVector(betas=[-0.6]), 0.6)
    assert excinfo.value.max_admissible == pytest.approx(0.5)
    with pytest.raises(InvalidNu):
        regularization_plan(ConeAngleVector(betas=[-0.25]), 1.2)


@settings(max_examples=1000, deadline=None)
@given(
    beta=st.floats(min_value=-0.95, max_value=-0.05),
    lo=st.floats(min_value=-8.0, max_value=1.0),
    hi=st.floats(min_value=-1.0, max_value=8.0),
    builder=st.sampled_from([roots_scalar, roots_oneform, roots_symmetric2]),
)
def test_roots_are_symmetric(beta, lo, hi, builder):
    assume(lo < hi)
    table = builder(beta, (lo, hi))
    # roots inside window and -window, away from its edges
    reach = min(hi, -lo) - 1e-6
    inner = [value for value in table.values() if abs(value) < reach]
    for value in inner:
        assert table.multiplicity(-value) == table.multiplicity(value)
        assert table.log_multiplicity(-value) == table.log_multiplicity(value)
