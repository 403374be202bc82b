import math

import numpy as np
import pytest
from pydantic import ValidationError

from conic_surfaces.exceptions import DegenerateFit
from conic_surfaces.exceptions import GridTooCoarse
from conic_surfaces.exceptions import NoDiscreteSpectrum
from conic_surfaces.mode_spectral import InnerBoundary
from conic_surfaces.mode_spectral import ModeEigenproblem
from conic_surfaces.mode_spectral import OuterBoundary
from conic_surfaces.mode_spectral import assemble_mode
from conic_surfaces.mode_spectral import cone_problem
from conic_surfaces.mode_spectral import cusp_mode_decay_check
from conic_surfaces.mode_spectral import cusp_problem
from conic_surfaces.mode_spectral import cusp_zero_mode_roots
from conic_surfaces.mode_spectral import football_problem
from conic_surfaces.mode_spectral import friedrichs_expansion_fit
from conic_surfaces.mode_spectral import graded_grid
from conic_surfaces.mode_spectral import predicted_expansion_exponent
from conic_surfaces.mode_spectral import solve_spectra
from conic_surfaces.mode_spectral import solve_spectrum
from conic_surfaces.mode_spectral import verify_eigenvalue_bound
from conic_surfaces.model_metrics import Chart
from conic_surfaces.model_metrics import ModelMetric
from conic_surfaces.oracles import bessel_zeros


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        assemble_mode(cone_problem(-0.5, 0, n=32))


def test_grid_must_increase():
    with pytest.raises(ValidationError):
        ModeEigenproblem(
            geometry=ModelMetric(beta=-0.5, curvature=0.0), mode=0, grid=[0.0, 0.5, 0.4, 1.0]
        )


def test_second_pole_needs_positive_curvature():
    with pytest.raises(ValidationError):
        ModeEigenproblem(
            geometry=ModelMetric(beta=-0.5, curvature=0.0),
            mode=0,
            grid=np.linspace(0.0, 1.0, 100),
            outer_bc=OuterBoundary.SECOND_POLE,
        )


def test_conformal_chart_is_not_a_mode_chart():
    with pytest.raises(ValidationError):
        ModeEigenproblem(
            geometry=ModelMetric(beta=-0.5, curvature=0.0, chart=Chart.CONFORMAL_FLAT),
            mode=0,
            grid=np.linspace(0.0, 1.0, 100),
        )


def test_refined_grid_halves_cells():
    problem = cone_problem(-0.5, 1, n=64)
    refined = problem.refined()
    assert refined.n == 127
    assert np.allclose(refined.grid[::2], problem.grid)


def test_operator_is_symmetric_and_positive():
    operator = assemble_mode(cone_problem(-0.25, 2, n=80))
    stiffness, mass = operator.dense()
    assert np.allclose(stiffness, stiffness.T)
    assert np.all(np.linalg.eigvalsh(stiffness) > 0)
    assert np.all(np.diag(mass) > 0)


def test_friedrichs_keeps_the_pole_for_mode_zero():
    friedrichs = assemble_mode(cone_problem(-0.5, 0, n=64))
    pinned = assemble_mode(cone_problem(-0.5, 0, n=64, inner_bc=InnerBoundary.PINNED))
    assert friedrichs.nodes[0] == 0.0
    assert pinned.nodes[0] > 0.0
    assert friedrichs.nodes.size == pinned.nodes.size + 1


@pytest.mark.parametrize("beta", [-0.25, -0.5, -0.75])
@pytest.mark.parametrize("mode", [0, 1, 2])
def test_cone_eigenvalues_are_squared_bessel_zeros(beta, mode):
    result = solve_spectrum(cone_problem(beta, mode, n=256), count=2)
    zeros = bessel_zeros(abs(mode) / (1.0 + beta), 2)
    for entry, zero in zip(result.entries, zeros):
        exact = zero * zero
        assert entry.index in (1, 2)
        assert entry.value == pytest.approx(entry.fine + (entry.fine - entry.coarse) / 3.0)
        assert abs(entry.value - exact) <= 1e-4 * exact


def test_pinned_pole_raises_the_first_eigenvalue():
    friedrichs = solve_spectrum(cone_problem(-0.5, 0, n=256), count=1).entries[0]
    pinned = solve_spectrum(
        cone_problem(-0.5, 0, n=256, inner_bc=InnerBoundary.PINNED), count=1
    ).entries[0]
    assert pinned.fine > friedrichs.fine * (1.0 + 1e-3)


def test_open_cusp_has_no_discrete_spectrum():
    with pytest.raises(NoDiscreteSpectrum):
        solve_spectrum(cusp_problem(1, n=200), count=2)


@pytest.mark.asyncio
async def test_solve_spectra_orders_by_mode():
    problems = [football_problem(-0.5, 1.0, mode, n=128) for mode in (2, 0, 1)]
    results = await solve_spectra(problems, count=2, max_concurrency=2)
    assert [r.mode for r in results] == [0, 1, 2]
    # constants on the closed football
    assert abs(results[0].entries[0].value) < 1e-8


@pytest.mark.parametrize("beta,K", [(-0.25, 1.0), (-0.5, 4.0), (-0.75, 1.0)])
def test_football_first_eigenvalue_bound(beta, K):
    report = verify_eigenvalue_bound(beta, K, modes=range(0, 4))
    assert report.equality_modes == [0]
    assert report.rigid
    assert report.modes[0].lambda1 == pytest.approx(2.0 * K, rel=1e-6)
    assert report.modes[0].profile_correlation > 1.0 - 1e-6
    assert report.min_nonzero_mode_margin > 0.0


def test_football_bound_needs_positive_curvature():
    with pytest.raises(ValueError):
        verify_eigenvalue_bound(-0.5, 0.0)


def test_predicted_exponents():
    assert predicted_expansion_exponent(-0.5, 0) == 2.0
    assert predicted_expansion_exponent(-0.5, 1, -1.0) == 1.0
    assert predicted_expansion_exponent(-0.25, 1, 1.0) == pytest.approx(4.0 / 3.0)


def test_friedrichs_fit_mode_zero():
    fit = friedrichs_expansion_fit(-0.5, 0, lambda r: np.ones_like(r))
    assert fit.predicted == 2.0
    assert fit.generic_predicted == 2.0
    assert fit.relative_error < 0.05


def test_friedrichs_fit_mode_one():
    fit = friedrichs_expansion_fit(-0.25, 1, lambda r: r, rhs_exponent=1.0)
    assert fit.predicted == pytest.approx(4.0 / 3.0)
    assert fit.generic_predicted == pytest.approx(4.0 / 3.0)
    assert fit.relative_error < 0.05


def test_friedrichs_fit_degenerate():
    with pytest.raises(DegenerateFit):
        friedrichs_expansion_fit(-0.5, 1, lambda r: np.zeros_like(r))


def test_graded_grid():
    grid = graded_grid(0.0, 1.0, first=1e-6, ratio=1.05, max_spacing=1.0 / 400.0)
    assert grid[0] == 0.0
    assert grid[-1] == 1.0
    assert grid[1] == pytest.approx(1e-6)
    assert np.all(np.diff(grid) > 0)
    assert np.max(np.diff(grid)) <= 1.0 / 400.0 * (1.0 + 1e-9)


def test_cusp_zero_mode_roots():
    assert cusp_zero_mode_roots() == pytest.approx((1.0, -2.0))


@pytest.mark.parametrize("j", [1, 2, 3, 4, 5])
def test_cusp_decay_barrier(j):
    report = cusp_mode_decay_check(j, 0.5, 1.0)
    assert report.holds
    assert report.bound_constant <= report.uniform_constant
    assert report.bound_constant > 0.0


@pytest.mark.parametrize(
    "kwargs",
    [{"j": 0}, {"j": 1, "c": 1.0}, {"j": 1, "a": -1.0}, {"j": 1, "r0": 1.5}],
)
def test_cusp_decay_check_arguments(kwargs):
    arguments = {"c": 0.5, "a": 1.0} | kwargs
    with pytest.raises(ValueError):
        cusp_mode_decay_check(**arguments)
