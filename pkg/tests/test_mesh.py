import math

import numpy as np
import pytest

from conic_surfaces.datatypes import ConicSurfaceSpec
from conic_surfaces.datatypes import SolverOptions
from conic_surfaces.mesh import SurfaceKind
from conic_surfaces.mesh import _radial_rule
from conic_surfaces.mesh import build_mesh
from conic_surfaces.mesh import cotangent_stiffness
from conic_surfaces.mesh import cutoff_radii
from conic_surfaces.mesh import face_areas
from conic_surfaces.mesh import face_quadrature
from conic_surfaces.mesh import icosphere
from conic_surfaces.mesh import sphere_distance
from conic_surfaces.mesh import sphere_mesh
from conic_surfaces.mesh import torus_distance
from conic_surfaces.mesh import torus_lattice
from conic_surfaces.mesh import torus_mesh


@pytest.fixture
def football_mesh(football_spec):
    return sphere_mesh(football_spec, 2, grading_rings=8)


@pytest.fixture
def torus_cone_mesh(torus_spec):
    return torus_mesh(torus_spec, 2, grading_rings=8)


def test_icosphere_counts():
    vertices, faces = icosphere(2)
    assert vertices.shape == (162, 3)
    assert faces.shape == (320, 3)
    assert np.allclose(np.linalg.norm(vertices, axis=1), 1.0)


def test_torus_lattice():
    points, h = torus_lattice(1)
    assert points.shape == (36, 2)
    assert h == pytest.approx(1.0 / 6.0)
    assert np.all((points >= 0.0) & (points < 1.0))


def test_cutoff_radii(football_spec, torus_spec):
    inner, outer = cutoff_radii(football_spec)
    assert np.allclose(inner, 0.3)
    assert np.allclose(outer, 0.6)
    inner, outer = cutoff_radii(torus_spec)
    assert np.allclose(inner, 0.15)
    assert np.allclose(outer, 0.3)


def test_cutoff_radii_shrink_for_close_cones():
    spec = ConicSurfaceSpec(genus=1, betas=[-0.5, -0.5], positions=[(0.1, 0.1), (0.3, 0.1)])
    _, outer = cutoff_radii(spec)
    assert np.allclose(outer, 0.45 * 0.2)


def test_distances():
    north = np.array([0.0, 0.0, 1.0])
    assert sphere_distance(np.array([[0.0, 0.0, -1.0]]), north)[0] == pytest.approx(math.pi)
    assert sphere_distance(np.array([[1.0, 0.0, 0.0]]), north)[0] == pytest.approx(math.pi / 2)
    assert torus_distance(np.array([[0.95, 0.05]]), np.array([0.05, 0.95]))[0] == pytest.approx(
        math.sqrt(0.02)
    )


def test_sphere_mesh_topology(football_mesh):
    assert football_mesh.kind == SurfaceKind.SPHERE
    assert football_mesh.euler_characteristic() == 2
    assert np.allclose(np.linalg.norm(football_mesh.vertices, axis=1), 1.0)


def test_torus_mesh_topology(torus_cone_mesh):
    assert torus_cone_mesh.kind == SurfaceKind.TORUS
    assert torus_cone_mesh.euler_characteristic() == 0
    assert face_areas(torus_cone_mesh).sum() == pytest.approx(1.0, rel=1e-9)


def test_faces_oriented_outward(football_mesh):
    c = football_mesh.corners
    normals = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    assert np.all(np.einsum("ij,ij->i", normals, c.sum(axis=1)) > 0)


def test_cone_is_corner_zero(football_mesh, torus_cone_mesh):
    for mesh in (football_mesh, torus_cone_mesh):
        for cone in mesh.cones:
            touching = np.any(mesh.faces == cone.vertex, axis=1)
            assert np.all(mesh.face_cone[touching] == cone.cone_index)
            assert np.all(mesh.faces[touching, 0] == cone.vertex)
        elsewhere = ~np.isin(mesh.faces[:, 0], [c.vertex for c in mesh.cones])
        assert np.all(mesh.face_cone[elsewhere] == -1)


def test_rings_are_geometrically_graded(football_mesh):
    for cone in football_mesh.cones:
        ratio = math.exp(2.0 * math.pi / cone.n_theta)
        assert np.allclose(cone.radii[:-1] / cone.radii[1:], ratio)
        assert cone.radii[0] < cone.cutoff_inner
        center = football_mesh.vertices[cone.vertex]
        for m, ring in enumerate(cone.ring_vertices):
            sigma = sphere_distance(football_mesh.vertices[ring], center)
            assert np.allclose(sigma, cone.radii[m])


def test_stiffness_properties(football_spec):
    mesh = sphere_mesh(football_spec, 1, grading_rings=4)
    S = cotangent_stiffness(mesh).toarray()
    assert np.allclose(S, S.T)
    assert np.allclose(S.sum(axis=1), 0.0, atol=1e-10)
    assert np.linalg.eigvalsh(S).min() > -1e-10


def test_stiffness_energy_of_linear_function(football_mesh):
    # on a flat face the gradient of z is e_z projected onto the face plane
    S = cotangent_stiffness(football_mesh)
    z = football_mesh.vertices[:, 2]
    c = football_mesh.corners
    normals = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    expected = np.sum(face_areas(football_mesh) * (1.0 - normals[:, 2] ** 2))
    assert z @ (S @ z) == pytest.approx(expected, rel=1e-9)
    assert expected == pytest.approx(8.0 * math.pi / 3.0, rel=0.05)


def test_sphere_quadrature_area(football_mesh):
    quadrature = face_quadrature(football_mesh, 4)
    assert quadrature.integrate(np.ones(quadrature.weights.shape)) == pytest.approx(
        4.0 * math.pi, rel=1e-4
    )
    assert np.allclose(np.linalg.norm(quadrature.points, axis=-1), 1.0)
    hats = quadrature.integrate_hats(np.ones(quadrature.weights.shape), football_mesh)
    assert hats.shape == (football_mesh.n_vertices,)
    assert np.all(hats > 0)
    assert hats.sum() == pytest.approx(quadrature.weights.sum())


def test_sphere_quadrature_integrates_coordinates(football_mesh):
    quadrature = face_quadrature(football_mesh, 4)
    z2 = quadrature.points[..., 2] ** 2
    assert quadrature.integrate(z2) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-4)


def test_torus_quadrature(torus_cone_mesh):
    quadrature = face_quadrature(torus_cone_mesh, 3)
    assert quadrature.integrate(np.ones(quadrature.weights.shape)) == pytest.approx(1.0)
    assert np.all((quadrature.points >= 0.0) & (quadrature.points <= 1.0))


def test_interpolate_reproduces_nodal_constants(torus_cone_mesh):
    quadrature = face_quadrature(torus_cone_mesh, 3)
    values = quadrature.interpolate(np.full(torus_cone_mesh.n_vertices, 2.5), torus_cone_mesh)
    assert np.allclose(values, 2.5)


@pytest.mark.parametrize("exponent", [0.0, -1.0, -1.6, 0.5])
def test_radial_rule_is_exact_for_its_power(exponent):
    s, w = _radial_rule(5, exponent)
    assert np.all((s > 0) & (s < 1))
    assert np.sum(w * s**exponent) == pytest.approx(1.0 / (exponent + 2.0), rel=1e-12)
    assert np.sum(w * s ** (exponent + 3.0)) == pytest.approx(1.0 / (exponent + 5.0), rel=1e-12)


def test_singular_quadrature_integrates_cone_power(football_mesh):
    # 1/sigma over the fan of a regular n-gon of circumradius r:
    # 2 n r cos(pi/n) log(sec(pi/n) + tan(pi/n)) in the flat limit
    exponents = np.where(football_mesh.face_cone >= 0, -1.0, 0.0)
    quadrature = face_quadrature(football_mesh, 6, exponents)
    cone = football_mesh.cones[0]
    fan = football_mesh.face_cone == 0
    center = football_mesh.vertices[cone.vertex]
    sigma = sphere_distance(quadrature.points[fan], center)
    integral = float(np.sum(quadrature.weights[fan] / sigma))
    n, r = cone.n_theta, cone.radii[-1]
    half = math.pi / n
    expected = 2.0 * n * r * math.cos(half) * math.log(1.0 / math.cos(half) + math.tan(half))
    assert integral == pytest.approx(expected, rel=1e-3)


def test_build_mesh_dispatch(football_spec, torus_spec):
    options = SolverOptions(mesh_level=1, grading_rings=4)
    assert build_mesh(football_spec, options).kind == SurfaceKind.SPHERE
    assert build_mesh(torus_spec, options).kind == SurfaceKind.TORUS


def test_build_mesh_needs_positions():
    spec = ConicSurfaceSpec(genus=0, betas=[-0.5, -0.5])
    with pytest.raises(ValueError, match="positions"):
        build_mesh(spec)


def test_build_mesh_rejects_higher_genus():
    spec = ConicSurfaceSpec(genus=2, betas=[-0.5], positions=None)
    with pytest.raises(ValueError):
        build_mesh(spec)
