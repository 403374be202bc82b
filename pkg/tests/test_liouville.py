import math

import numpy as np
import pytest

from conic_surfaces.datatypes import ConicSurfaceSpec
from conic_surfaces.datatypes import GeometryTag
from conic_surfaces.datatypes import SolverOptions
from conic_surfaces.exceptions import MeshTooCoarse
from conic_surfaces.exceptions import NotUniformizable
from conic_surfaces.geometry import dimension_report
from conic_surfaces.liouville import build_background
from conic_surfaces.liouville import cutoff
from conic_surfaces.liouville import exponent_audit
from conic_surfaces.liouville import family_sweep
from conic_surfaces.liouville import football_error
from conic_surfaces.liouville import football_reference
from conic_surfaces.liouville import linear_path
from conic_surfaces.liouville import newton_solve
from conic_surfaces.liouville import nodal_curvature
from conic_surfaces.liouville import residual
from conic_surfaces.liouville import smoothstep
from conic_surfaces.liouville import uniformize
from conic_surfaces.liouville import zero_crossing


TORUS_SITES = [(0.25, 0.25), (0.75, 0.75), (0.25, 0.75), (0.75, 0.25)]
# gb_residual below this is at the Newton tolerance
GB_FLOOR = 1e-7


@pytest.fixture
def round_sphere():
    return ConicSurfaceSpec(genus=0, betas=[], positions=[])


def test_smoothstep_endpoints():
    value, first, second = smoothstep(np.array([-1.0, 0.0, 0.5, 1.0, 2.0]))
    assert np.allclose(value, [0.0, 0.0, 0.5, 1.0, 1.0])
    assert np.allclose(first[[0, 1, 3, 4]], 0.0)
    assert np.allclose(second[[0, 1, 3, 4]], 0.0)


def test_cutoff_profile():
    chi, chi1, _ = cutoff(np.array([0.1, 0.3, 0.45, 0.6, 0.9]), 0.3, 0.6)
    assert np.allclose(chi, [1.0, 1.0, 0.5, 0.0, 0.0])
    assert chi1[2] < 0.0
    assert chi1[0] == 0.0 and chi1[4] == 0.0


def test_round_sphere_has_zero_residual(round_sphere):
    bg = build_background(round_sphere, SolverOptions(mesh_level=2), require_gate=False)
    assert bg.mesh.cones == []
    F = residual(bg, np.zeros(bg.n_vertices), 1.0)
    assert np.max(np.abs(F)) < 1e-12


def test_background_gauss_bonnet(football_spec):
    bg = build_background(football_spec, SolverOptions(mesh_level=3, grading_rings=8))
    assert bg.chi_beta() == pytest.approx(1.0)
    assert bg.hat_area.sum() == pytest.approx(4.0 * math.pi, rel=1e-4)
    assert bg.hat_source.sum() == pytest.approx(2.0 * math.pi * bg.chi_beta(), rel=1e-2)
    assert np.all(bg.hat_weight > 0.0)
    assert bg.cutoffs_disjoint()


def test_background_profile_and_curvature(football_spec):
    bg = build_background(football_spec, SolverOptions(mesh_level=1, grading_rings=4))
    # far from the cones the background is the round sphere
    equator = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    assert np.allclose(bg.singular_profile(equator), 0.0)
    assert np.allclose(bg.source_curvature(equator), 1.0)
    # inside the inner cutoff psi is beta log sigma
    sigma = 0.1
    point = np.array([[math.sin(sigma), 0.0, math.cos(sigma)]])
    assert bg.singular_profile(point)[0] == pytest.approx(-0.5 * math.log(sigma))
    assert bg.sigma(point, 0)[0] == pytest.approx(sigma)


def test_balance_direction(football_spec, torus_spec):
    options = SolverOptions(mesh_level=1, grading_rings=4)
    direction = build_background(football_spec, options).balance_direction()
    assert np.allclose(np.abs(direction), [0.0, 0.0, 1.0])
    assert build_background(torus_spec, options).balance_direction() is None


def test_gate_rejects_outside_troyanov(outside_troyanov_spec):
    with pytest.raises(NotUniformizable) as e:
        build_background(outside_troyanov_spec, SolverOptions(mesh_level=1))
    assert e.value.tag == GeometryTag.OUTSIDE_TROYANOV


def test_background_needs_positions():
    with pytest.raises(ValueError):
        build_background(ConicSurfaceSpec(genus=0, betas=[-0.5, -0.5]))


def test_newton_rejects_bad_initial_guess(torus_spec):
    bg = build_background(torus_spec, SolverOptions(mesh_level=1, grading_rings=4))
    with pytest.raises(ValueError):
        newton_solve(bg, -2.0 * math.pi, np.zeros(3))
    with pytest.raises(ValueError):
        newton_solve(bg, -2.0 * math.pi, np.full(bg.n_vertices, np.nan))


def test_hyperbolic_torus(torus_spec, coarse_options):
    sol = uniformize(torus_spec, coarse_options)
    assert sol.K_target == pytest.approx(-2.0 * math.pi)
    diagnostics = sol.diagnostics
    assert diagnostics.residual_sup < coarse_options.tol_res
    assert diagnostics.gb_residual < 2e-2 * 2.0 * math.pi
    assert diagnostics.area == pytest.approx(1.0, rel=2e-2)
    assert np.all(np.isfinite(sol.phi))
    assert sol.newton_history[-1] <= sol.newton_history[0]
    payload = sol.payload()
    assert payload["genus"] == 1
    assert payload["vertices"] == sol.mesh.n_vertices


def test_newton_warm_start(torus_spec, coarse_options):
    sol = uniformize(torus_spec, coarse_options)
    again = newton_solve(sol.background, sol.K_target, sol.phi, coarse_options)
    # the unit-area rescaling of the start moves it slightly off the solution
    assert again.diagnostics.iterations < 10
    assert np.allclose(again.phi, sol.phi, atol=1e-7)


def test_football_reference_needs_football(equilateral_spec):
    bg = build_background(equilateral_spec, SolverOptions(mesh_level=1, grading_rings=4))
    with pytest.raises(ValueError):
        football_reference(bg)


@pytest.mark.slow
def test_football_matches_closed_form(football_spec):
    sol = uniformize(football_spec, SolverOptions(mesh_level=3, grading_rings=8))
    assert sol.K_target == pytest.approx(2.0 * math.pi)
    assert sol.diagnostics.residual_sup < 1e-8
    assert football_error(sol) < 0.1


def test_zero_crossing():
    assert zero_crossing([0.0, 1.0, 2.0], [1.0, -1.0, -3.0]) == pytest.approx(0.5)
    assert zero_crossing([0.0, 1.0, 2.0], [2.0, 0.0, -1.0]) == pytest.approx(1.0)
    assert zero_crossing([0.0, 1.0], [1.0, 2.0]) is None
    assert zero_crossing([], []) is None


def test_linear_path():
    path = linear_path([-0.5, -0.25], [-0.1, -0.05])
    assert np.allclose(path(0.0), [-0.5, -0.25])
    assert np.allclose(path(1.0), [-0.1, -0.05])
    assert np.allclose(path(0.5), [-0.3, -0.15])


def test_nodal_curvature_follows_the_conformal_factor(torus_spec):
    bg = build_background(torus_spec, SolverOptions(mesh_level=1, grading_rings=4))
    flat = nodal_curvature(bg, np.zeros(bg.n_vertices))
    shifted = nodal_curvature(bg, np.full(bg.n_vertices, 0.3))
    assert np.allclose(shifted, math.exp(-0.6) * flat, rtol=1e-9, atol=1e-9)

    phi = np.random.default_rng(0).normal(size=bg.n_vertices)
    curvature = nodal_curvature(bg, phi)
    # the metric-weighted total is fixed by Gauss-Bonnet, the background-area mean is not
    total = np.sum(bg.hat_weight * np.exp(2.0 * phi) * curvature)
    assert total == pytest.approx(bg.hat_source.sum(), abs=1e-9)
    assert bg.hat_area @ curvature != pytest.approx(bg.hat_area @ flat, rel=1e-3)


def test_solved_metric_has_target_curvature(torus_spec, coarse_options):
    sol = uniformize(torus_spec, coarse_options)
    curvature = nodal_curvature(sol.background, sol.phi)
    assert np.allclose(curvature, sol.K_target, atol=1e-5)
    diagnostics = sol.diagnostics
    assert diagnostics.mean_curvature == pytest.approx(sol.K_target, abs=1e-5)
    assert diagnostics.total_curvature == pytest.approx(-2.0 * math.pi, rel=1e-2)


def test_exponent_audit(torus_spec, coarse_options):
    sol = uniformize(torus_spec, coarse_options)
    fits = exponent_audit(sol)
    assert [fit.cone_index for fit in fits] == [0, 1]
    for fit in fits:
        assert fit.rings >= 8
        assert fit.predicted == 1.0
        assert fit.radius_reference == 1.0
        assert fit.radius_slope == pytest.approx(fit.slope / 0.5)
        assert fit.radius_predicted == pytest.approx(2.0)
        assert fit.slope > 0.0
    assert sol.diagnostics.exponent_fits == fits


def test_exponent_audit_needs_graded_rings(torus_spec):
    sol = uniformize(torus_spec, SolverOptions(mesh_level=2, grading_rings=1))
    assert sol.diagnostics.exponent_fits == []
    with pytest.raises(MeshTooCoarse):
        exponent_audit(sol)


def test_family_sweep_keeps_dimensions(torus_spec, coarse_options):
    sweep = family_sweep(
        torus_spec, linear_path([-0.5, -0.5], [-0.25, -0.25]), [0.0, 0.5, 1.0], coarse_options
    )
    assert sweep.rejected_index is None
    assert [point.tag for point in sweep.points] == [GeometryTag.HYPERBOLIC] * 3
    assert [point.K_target for point in sweep.points] == pytest.approx(
        [-2.0 * math.pi, -1.5 * math.pi, -math.pi]
    )
    for point in sweep.points:
        assert point.mean_curvature == pytest.approx(point.K_target, abs=1e-5)
    assert sweep.k_zero is None and sweep.mean_curvature_zero is None
    expected = dimension_report(torus_spec)
    assert [dimension_report(sol.background.spec) for sol in sweep.solutions] == [expected] * 3
    assert "solutions" not in sweep.payload()


def test_family_sweep_stops_at_the_gate(football_spec, coarse_options):
    sweep = family_sweep(
        football_spec,
        linear_path([-0.5, -0.5], [-0.3, -0.6]),
        [0.5, 1.0],
        coarse_options,
    )
    assert sweep.rejected_index == 0
    assert sweep.points[0].tag == GeometryTag.TWO_CONE_UNEQUAL
    assert sweep.points[0].K_target is None
    assert sweep.solutions == []


@pytest.mark.slow
def test_gauss_bonnet_residual_under_refinement(torus_spec):
    errors = [
        uniformize(torus_spec, SolverOptions(mesh_level=level, grading_rings=8)).diagnostics
        for level in (2, 3, 4)
    ]
    errors = [diagnostics.gb_residual for diagnostics in errors]
    # two mesh doublings at order 1.5
    assert errors[-1] <= max(errors[0] / 2.0**3.0, GB_FLOOR)


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(20))
def test_hyperbolic_specs_converge_from_zero(seed, coarse_options):
    rng = np.random.default_rng(seed)
    k = 1 + seed % 4
    sites = [TORUS_SITES[i] for i in rng.permutation(4)[:k]]
    betas = [float(beta) for beta in rng.uniform(-0.9, -0.1, size=k)]
    spec = ConicSurfaceSpec(genus=1, betas=betas, positions=sites)
    sol = uniformize(spec, coarse_options)
    assert sol.K_target < 0.0
    assert sol.diagnostics.residual_sup < coarse_options.tol_res


def test_hyperbolic_solution_is_unique(torus_spec, coarse_options):
    bg = build_background(torus_spec, coarse_options)
    K_target = -2.0 * math.pi
    rng = np.random.default_rng(11)
    first = newton_solve(bg, K_target, 0.5 * rng.normal(size=bg.n_vertices), coarse_options)
    second = newton_solve(bg, K_target, 0.5 * rng.normal(size=bg.n_vertices), coarse_options)
    assert np.max(np.abs(first.phi - second.phi)) < 1e-6
