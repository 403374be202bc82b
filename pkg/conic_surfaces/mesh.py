# SPDX-FileCopyrightText: 2026 conic_surfaces contributors
#
# SPDX-License-Identifier: MIT
"""
mesh

Triangulations of the background surfaces with log-polar rings around every cone point, the
cotangent stiffness matrix and face quadrature.

Sphere meshes start from an icosphere; torus meshes from a periodic triangular lattice on the
unit square. Around cone p_j, vertices lying closer than R_j + h/2 are replaced by rings of
geodesic radius R_j q^-m whose cells are conformal squares (q = e^(2 pi / n_theta)), down to
radius inner_radius_factor * h, plus the cone point itself.
"""

import math
from enum import Enum
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from pydantic import BaseModel
from pydantic import ConfigDict
from pydantic import Field
from scipy import sparse
from scipy.spatial import ConvexHull
from scipy.spatial import Delaunay
from scipy.special import roots_jacobi

from .datatypes import ConicSurfaceSpec
from .datatypes import SolverOptions
from .logger import setup_logger

logger = setup_logger(name="mesh")

# Geodesic edge length of the unit icosahedron, arctan(2)
ICOSAHEDRON_EDGE = math.atan(2.0)
RING_SCALE = 0.9
MIN_RING_POINTS = 8


class SurfaceKind(Enum):
    SPHERE = "Sphere"
    TORUS = "Torus"


class ConeRings(BaseModel):
    """
    Ring layout around one cone point. `ring_vertices[m]` holds the vertex ids of the ring of
    radius `radii[m]`, ring m being rotated by half a step when m is odd.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    cone_index: int
    vertex: int
    n_theta: int
    radii: np.ndarray
    ring_vertices: List[np.ndarray] = Field(repr=False)
    cutoff_inner: float
    cutoff_outer: float

    def ring_angles(self, m: int) -> np.ndarray:
        return (np.arange(self.n_theta) + 0.5 * (m % 2)) * (2.0 * math.pi / self.n_theta)


class SurfaceMesh(BaseModel):
    """
    Oriented triangulation. For the torus `corners` holds the unwrapped corner positions of
    every face, so that edges never cross the periodic boundary; on the sphere it is
    vertices[faces]. On faces touching a cone point the cone vertex is corner 0.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: SurfaceKind
    level: int
    h: float
    vertices: np.ndarray = Field(repr=False)
    faces: np.ndarray = Field(repr=False)
    corners: np.ndarray = Field(repr=False)
    cones: List[ConeRings]
    # Index of the cone whose vertex is corner 0 of the face, -1 elsewhere
    face_cone: np.ndarray = Field(repr=False)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_faces(self) -> int:
        return self.faces.shape[0]

    def positions3(self) -> np.ndarray:
        """
        Vertex positions as 3-vectors (z = 0 on the torus).
        """
        if self.kind == SurfaceKind.SPHERE:
            return self.vertices
        return np.column_stack([self.vertices, np.zeros(self.n_vertices)])

    def euler_characteristic(self) -> int:
        edges = np.sort(
            np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]]),
            axis=1,
        )
        n_edges = np.unique(edges, axis=0).shape[0]
        return self.n_vertices - n_edges + self.n_faces


# --------------------------------------------------------------------------------------------
# Icosphere


def icosahedron() -> Tuple[np.ndarray, np.ndarray]:
    """
    The 12 vertices (on the unit sphere) and 20 outward oriented faces of the icosahedron.
    """
    r = (1.0 + math.sqrt(5.0)) / 2.0
    coords = np.array(
        [
            [-1.0, r, 0.0],
            [1.0, r, 0.0],
            [-1.0, -r, 0.0],
            [1.0, -r, 0.0],
            [0.0, -1.0, r],
            [0.0, 1.0, r],
            [0.0, -1.0, -r],
            [0.0, 1.0, -r],
            [r, 0.0, -1.0],
            [r, 0.0, 1.0],
            [-r, 0.0, -1.0],
            [-r, 0.0, 1.0],
        ]
    )
    faces = np.array(
        [
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [5, 4, 9],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ]
    )
    return coords / np.linalg.norm(coords, axis=1)[:, None], faces


def subdivide(vertices: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Splits every face in four through edge midpoints pushed back onto the unit sphere.
    """
    edges = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    unique, inverse = np.unique(np.sort(edges, axis=1), axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    midpoints = vertices[unique[:, 0]] + vertices[unique[:, 1]]
    midpoints /= np.linalg.norm(midpoints, axis=1)[:, None]
    n_faces = faces.shape[0]
    mid = vertices.shape[0] + inverse.reshape(3, n_faces).T
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    ab, bc, ca = mid[:, 0], mid[:, 1], mid[:, 2]
    new_faces = np.concatenate(
        [
            np.column_stack([a, ab, ca]),
            np.column_stack([b, bc, ab]),
            np.column_stack([c, ca, bc]),
            np.column_stack([ab, bc, ca]),
        ]
    )
    return np.concatenate([vertices, midpoints]), new_faces


def icosphere(level: int) -> Tuple[np.ndarray, np.ndarray]:
    vertices, faces = icosahedron()
    for _ in range(level):
        vertices, faces = subdivide(vertices, faces)
    return vertices, faces


def icosphere_spacing(level: int) -> float:
    return ICOSAHEDRON_EDGE / 2**level


# --------------------------------------------------------------------------------------------
# Distances and cutoffs


def sphere_distance(points: np.ndarray, p: np.ndarray) -> np.ndarray:
    """
    Geodesic distance on the unit sphere, accurate near p.
    """
    chord = np.linalg.norm(points - p, axis=-1)
    return 2.0 * np.arcsin(np.minimum(0.5 * chord, 1.0))


def torus_displacement(points: np.ndarray, p: np.ndarray) -> np.ndarray:
    d = points - p
    return d - np.round(d)


def torus_distance(points: np.ndarray, p: np.ndarray) -> np.ndarray:
    return np.linalg.norm(torus_displacement(points, p), axis=-1)


def cutoff_radii(spec: ConicSurfaceSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inner and outer cutoff radii (a_j, b_j) with b_j = min(cap, 0.45 d_min) and a_j = b_j / 2,
    where d_min is the distance to the nearest other cone point (cap 0.6 on the sphere, 0.3 on
    the torus). The cutoff disks are pairwise disjoint.
    """
    points = np.asarray(spec.positions, dtype=float)
    k = points.shape[0]
    if spec.genus == 0:
        cap, distance = 0.6, sphere_distance
    else:
        cap, distance = 0.3, torus_distance
    outer = np.empty(k)
    for j in range(k):
        others = [distance(points[i], points[j]) for i in range(k) if i != j]
        # a lone cone on the torus only sees its own translates
        d_min = min(others) if others else 1.0
        outer[j] = min(cap, 0.45 * float(d_min))
    return 0.5 * outer, outer


def _ring_layout(
    R: float, h: float, grading_rings: int, inner_radius_factor: float
) -> Tuple[int, np.ndarray]:
    n_theta = max(MIN_RING_POINTS, int(round(2.0 * math.pi * R / h)))
    q = math.exp(2.0 * math.pi / n_theta)
    sigma_min = inner_radius_factor * h
    count = max(grading_rings, 1 + int(math.ceil(math.log(R / sigma_min) / math.log(q))))
    return n_theta, R * q ** -np.arange(count)


def _tangent_frame(p: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(p)))] = 1.0
    e1 = axis - np.dot(axis, p) * p
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(p, e1)


def _ring_points(center: np.ndarray, radius: float, angles: np.ndarray, kind: SurfaceKind):
    if kind == SurfaceKind.SPHERE:
        e1, e2 = _tangent_frame(center)
        direction = np.cos(angles)[:, None] * e1 + np.sin(angles)[:, None] * e2
        return math.cos(radius) * center + math.sin(radius) * direction
    offsets = radius * np.column_stack([np.cos(angles), np.sin(angles)])
    return np.mod(center + offsets, 1.0)


def _with_rings(
    spec: ConicSurfaceSpec,
    base: np.ndarray,
    h: float,
    kind: SurfaceKind,
    grading_rings: int,
    inner_radius_factor: float,
) -> Tuple[np.ndarray, List[ConeRings]]:
    """
    Removes base vertices near the cones and appends cone vertices and rings.
    """
    centers = np.asarray(spec.positions, dtype=float)
    inner, outer = cutoff_radii(spec)
    distance = sphere_distance if kind == SurfaceKind.SPHERE else torus_distance
    layouts = []
    keep = np.ones(base.shape[0], dtype=bool)
    for j, center in enumerate(centers):
        R = RING_SCALE * inner[j]
        layouts.append(_ring_layout(R, h, grading_rings, inner_radius_factor))
        keep &= distance(base, center) > R + 0.5 * h
    blocks = [base[keep]]
    offset = int(keep.sum())
    cones = []
    for j, center in enumerate(centers):
        n_theta, radii = layouts[j]
        vertex = offset
        blocks.append(center[None, :])
        offset += 1
        ring_vertices = []
        for m, radius in enumerate(radii):
            angles = (np.arange(n_theta) + 0.5 * (m % 2)) * (2.0 * math.pi / n_theta)
            blocks.append(_ring_points(center, float(radius), angles, kind))
            ring_vertices.append(np.arange(offset, offset + n_theta))
            offset += n_theta
        cones.append(
            ConeRings(
                cone_index=j,
                vertex=vertex,
                n_theta=n_theta,
                radii=radii,
                ring_vertices=ring_vertices,
                cutoff_inner=float(inner[j]),
                cutoff_outer=float(outer[j]),
            )
        )
    return np.concatenate(blocks), cones


def _cone_first(faces: np.ndarray, cones: Sequence[ConeRings]) -> Tuple[np.ndarray, np.ndarray]:
    """
    Column order that rotates faces touching a cone vertex so the cone is corner 0 (orientation
    is kept), and the cone index of every face (-1 away from the cones).
    """
    order = np.tile(np.arange(3), (faces.shape[0], 1))
    face_cone = np.full(faces.shape[0], -1)
    for cone in cones:
        hit = faces == cone.vertex
        rows = np.flatnonzero(hit.any(axis=1))
        shift = np.argmax(hit[rows], axis=1)
        order[rows] = (np.arange(3)[None, :] + shift[:, None]) % 3
        face_cone[rows] = cone.cone_index
    return order, face_cone


# --------------------------------------------------------------------------------------------
# Builders


def sphere_mesh(
    spec: ConicSurfaceSpec, level: int, grading_rings: int = 12, inner_radius_factor: float = 0.05
) -> SurfaceMesh:
    base, _ = icosphere(level)
    h = icosphere_spacing(level)
    vertices, cones = _with_rings(
        spec, base, h, SurfaceKind.SPHERE, grading_rings, inner_radius_factor
    )
    faces = ConvexHull(vertices).simplices.copy()
    corners = vertices[faces]
    normals = np.cross(corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0])
    inward = np.einsum("ij,ij->i", normals, corners.sum(axis=1)) < 0
    faces[inward] = faces[inward][:, [0, 2, 1]]
    order, face_cone = _cone_first(faces, cones)
    faces = np.take_along_axis(faces, order, axis=1)
    mesh = SurfaceMesh(
        kind=SurfaceKind.SPHERE,
        level=level,
        h=h,
        vertices=vertices,
        faces=faces,
        corners=vertices[faces],
        cones=cones,
        face_cone=face_cone,
    )
    logger.info(
        f"Sphere mesh level {level}: {mesh.n_vertices} vertices, {mesh.n_faces} faces, "
        f"{[len(c.radii) for c in cones]} rings"
    )
    return mesh


def torus_lattice(level: int) -> Tuple[np.ndarray, float]:
    """
    Periodic triangular lattice on the unit square with n_x = 3 * 2^level columns and an even
    number of rows close to n_x * 2 / sqrt(3).
    """
    n_x = 3 * 2**level
    n_y = 2 * max(1, int(round(n_x / math.sqrt(3.0))))
    i, j = np.meshgrid(np.arange(n_x), np.arange(n_y), indexing="ij")
    x = (i + 0.5 * (j % 2)) / n_x
    y = j / n_y
    return np.column_stack([x.ravel(), y.ravel()]), 1.0 / n_x


def torus_mesh(
    spec: ConicSurfaceSpec, level: int, grading_rings: int = 12, inner_radius_factor: float = 0.05
) -> SurfaceMesh:
    base, h = torus_lattice(level)
    if spec.k:
        vertices, cones = _with_rings(
            spec, base, h, SurfaceKind.TORUS, grading_rings, inner_radius_factor
        )
    else:
        vertices, cones = base, []
    n = vertices.shape[0]
    margin = max(0.15, 3.0 * h)
    shifts = np.array([(ox, oy) for ox in (-1, 0, 1) for oy in (-1, 0, 1)], dtype=float)
    tiled = (vertices[None, :, :] + shifts[:, None, :]).reshape(-1, 2)
    ids = np.tile(np.arange(n), len(shifts))
    offsets = np.repeat(shifts, n, axis=0)
    band = np.all((tiled >= -margin) & (tiled <= 1.0 + margin), axis=1)
    tiled, ids, offsets = tiled[band], ids[band], offsets[band]

    simplices = Delaunay(tiled).simplices
    orig = ids[simplices]
    lead = np.argmin(orig, axis=1)
    lead_offset = offsets[simplices[np.arange(len(simplices)), lead]]
    # one representative per periodic class: the copy whose lowest id sits in the base tile
    chosen = np.all(lead_offset == 0.0, axis=1)
    simplices = simplices[chosen]
    faces = ids[simplices]
    corners = tiled[simplices]
    u, v = corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]
    clockwise = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0] < 0
    faces[clockwise] = faces[clockwise][:, [0, 2, 1]]
    corners[clockwise] = corners[clockwise][:, [0, 2, 1]]

    order, face_cone = _cone_first(faces, cones)
    faces = np.take_along_axis(faces, order, axis=1)
    corners = np.take_along_axis(corners, order[:, :, None], axis=1)

    mesh = SurfaceMesh(
        kind=SurfaceKind.TORUS,
        level=level,
        h=h,
        vertices=vertices,
        faces=faces,
        corners=corners,
        cones=cones,
        face_cone=face_cone,
    )
    logger.info(f"Torus mesh level {level}: {mesh.n_vertices} vertices, {mesh.n_faces} faces")
    return mesh


def build_mesh(spec: ConicSurfaceSpec, options: Optional[SolverOptions] = None) -> SurfaceMesh:
    options = options or SolverOptions()
    if spec.positions is None:
        raise ValueError("meshing needs cone positions")
    if spec.genus == 0:
        builder = sphere_mesh
    elif spec.genus == 1:
        builder = torus_mesh
    else:
        raise ValueError(f"genus {spec.genus} surfaces are not meshed")
    return builder(spec, options.mesh_level, options.grading_rings, options.inner_radius_factor)


# --------------------------------------------------------------------------------------------
# Discrete operators


def _cross_norm(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if u.shape[-1] == 2:
        return np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    return np.linalg.norm(np.cross(u, v), axis=-1)


def face_areas(mesh: SurfaceMesh) -> np.ndarray:
    c = mesh.corners
    return 0.5 * _cross_norm(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])


def cotangent_stiffness(mesh: SurfaceMesh) -> sparse.csr_matrix:
    """
    Positive semidefinite cotangent matrix S with phi^T S phi the Dirichlet energy of the P1
    interpolant: S_ij = -(cot alpha_ij + cot beta_ij)/2, rows summing to zero.
    """
    c = mesh.corners
    rows, cols, values = [], [], []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        u, v = c[:, j] - c[:, i], c[:, k] - c[:, i]
        half_cot = 0.5 * np.einsum("ij,ij->i", u, v) / _cross_norm(u, v)
        fj, fk = mesh.faces[:, j], mesh.faces[:, k]
        rows += [fj, fk, fj, fk]
        cols += [fk, fj, fj, fk]
        values += [-half_cot, -half_cot, half_cot, half_cot]
    n = mesh.n_vertices
    return sparse.coo_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


class FaceQuadrature(BaseModel):
    """
    Quadrature nodes on every face in collapsed coordinates around corner 0:
    y = c0 + s(1-t)(c1-c0) + s t (c2-c0). Weights include the area element of the surface
    (the radial projection Jacobian on the sphere). On faces with an exponent e the radial rule
    is Gauss-Jacobi for s^(e+1), so integrands behaving like s^e there are integrated exactly
    in s.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    points: np.ndarray = Field(repr=False)
    weights: np.ndarray = Field(repr=False)
    barycentric: np.ndarray = Field(repr=False)

    def integrate_hats(self, values: np.ndarray, mesh: SurfaceMesh) -> np.ndarray:
        """
        Integrals of values * N_i for every vertex i, values given at the nodes.
        """
        per_corner = np.einsum("fq,fqc->fc", values * self.weights, self.barycentric)
        return np.bincount(
            mesh.faces.ravel(), weights=per_corner.ravel(), minlength=mesh.n_vertices
        )

    def integrate(self, values: np.ndarray) -> float:
        return float(np.sum(values * self.weights))

    def interpolate(self, nodal: np.ndarray, mesh: SurfaceMesh) -> np.ndarray:
        return np.einsum("fqc,fc->fq", self.barycentric, nodal[mesh.faces])


def _radial_rule(order: int, exponent: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Nodes s and weights w with sum w g(s) = int_0^1 g(s) s ds for g ~ s^exponent. The weights
    are those of Gauss-Jacobi for s^(exponent+1), divided back by s^exponent.
    """
    gamma = exponent + 1.0
    x, w = roots_jacobi(order, 0.0, gamma)
    s = 0.5 * (1.0 + x)
    return s, w * 2.0 ** (-gamma - 1.0) / s**exponent


def face_quadrature(
    mesh: SurfaceMesh, order: int, face_exponents: Optional[np.ndarray] = None
) -> FaceQuadrature:
    t_nodes, t_weights = leggauss(order)
    t = 0.5 * (1.0 + t_nodes)
    wt = 0.5 * t_weights
    if face_exponents is None:
        face_exponents = np.zeros(mesh.n_faces)

    s = np.empty((mesh.n_faces, order))
    ws = np.empty((mesh.n_faces, order))
    for exponent in np.unique(face_exponents):
        rows = face_exponents == exponent
        s[rows], ws[rows] = _radial_rule(order, float(exponent))

    # (F, Qs, Qt) grids flattened to (F, Q)
    S = np.repeat(s[:, :, None], order, axis=2).reshape(mesh.n_faces, -1)
    T = np.broadcast_to(t[None, None, :], (mesh.n_faces, order, order)).reshape(mesh.n_faces, -1)
    W = (ws[:, :, None] * wt[None, None, :]).reshape(mesh.n_faces, -1)
    barycentric = np.stack([1.0 - S, S * (1.0 - T), S * T], axis=-1)

    c = mesh.corners
    y = np.einsum("fqc,fcd->fqd", barycentric, c)
    weights = 2.0 * face_areas(mesh)[:, None] * W
    if mesh.kind == SurfaceKind.SPHERE:
        normal = np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])
        normal /= np.linalg.norm(normal, axis=1)[:, None]
        plane = np.einsum("fd,fd->f", normal, c[:, 0])
        norm = np.linalg.norm(y, axis=-1)
        weights = weights * plane[:, None] / norm**3
        points = y / norm[..., None]
    else:
        points = np.mod(y, 1.0)
    return FaceQuadrature(points=points, weights=weights, barycentric=barycentric)
