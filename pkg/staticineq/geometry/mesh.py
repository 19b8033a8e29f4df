"""
Surface and volume meshes.

Surfaces are radial graphs over a subdivided icosahedron of directions, mapped
through the radial chart at the base point. Volume meshes are Euclidean balls
built from concentric icosphere shells.
"""
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Optional, Tuple

import numpy as np

from staticineq.config import DEBUG_PRINT_MESH
from staticineq.errors import DomainError, MeshQualityError, UnsupportedError
from staticineq.geometry import spaceform as sfm
from staticineq.geometry.profiles import SphereProfile
from staticineq.geometry.spaceform import Kind, SpaceForm
from staticineq.schemas import MeshScale

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SurfaceMesh:
    space_form: SpaceForm
    vertices: np.ndarray             # (N, dim) ambient coordinates
    triangles: np.ndarray            # (M, 3) outward oriented
    directions: Optional[np.ndarray] = None  # (N, n) unit directions in the frame at p
    radial_profile: Optional[Profile] = None
    level: Optional[int] = None

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges (E, 2), sorted."""
        t = self.triangles
        e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    @cached_property
    def scale(self) -> MeshScale:
        a, b = self.edges[:, 0], self.edges[:, 1]
        lengths = sfm.geodesic_distance(self.space_form, self.vertices[a], self.vertices[b])
        return MeshScale(h=float(lengths.max()), n_vertices=self.n_vertices,
                         n_triangles=self.n_triangles)

    @property
    def profile_spec(self) -> Optional[str]:
        return getattr(self.radial_profile, "spec", None)


@dataclass(frozen=True, eq=False)
class VolumeMesh:
    vertices: np.ndarray             # (N, 3), Euclidean
    tets: np.ndarray                 # (T, 4) positively oriented
    surface: SurfaceMesh             # boundary surface
    boundary_vertex_ids: np.ndarray  # surface vertex i -> volume vertex id
    radius: float
    level: Optional[int]
    space_form: SpaceForm = field(default_factory=lambda: SpaceForm(Kind.EUCLIDEAN))

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_tets(self) -> int:
        return self.tets.shape[0]

    @property
    def boundary_triangles(self) -> np.ndarray:
        """Boundary triangles in volume indexing."""
        return self.boundary_vertex_ids[self.surface.triangles]

    @cached_property
    def tet_volumes(self) -> np.ndarray:
        return signed_tet_volumes(self.vertices, self.tets)

    @cached_property
    def scale(self) -> MeshScale:
        P = self.vertices[self.tets]
        pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
        h = max(np.linalg.norm(P[:, i] - P[:, j], axis=1).max() for i, j in pairs)
        return MeshScale(h=float(h), n_vertices=self.n_vertices, n_triangles=self.surface.n_triangles,
                         n_tets=self.n_tets)


# --- Icosphere combinatorics ---

def icosahedron() -> Tuple[np.ndarray, np.ndarray]:
    """Unit icosahedron with a pole at +z and outward-oriented faces."""
    z = 1.0 / np.sqrt(5.0)
    ring = 2.0 / np.sqrt(5.0)
    upper = [(ring * np.cos(2 * np.pi * j / 5), ring * np.sin(2 * np.pi * j / 5), z) for j in range(5)]
    lower = [(ring * np.cos(2 * np.pi * (j + 0.5) / 5), ring * np.sin(2 * np.pi * (j + 0.5) / 5), -z)
             for j in range(5)]
    verts = np.array([(0.0, 0.0, 1.0)] + upper + lower + [(0.0, 0.0, -1.0)])
    faces = np.array([
        (0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5), (0, 5, 1),
        (11, 6, 7), (11, 7, 8), (11, 8, 9), (11, 9, 10), (11, 10, 6),
        (1, 2, 6), (2, 3, 7), (3, 4, 8), (4, 5, 9), (5, 1, 10),
        (6, 7, 2), (7, 8, 3), (8, 9, 4), (9, 10, 5), (10, 6, 1),
    ])
    return verts, orient_outward(verts, faces)


def orient_outward(verts: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """Flip faces of an origin-centred convex polyhedron so det(v0, v1, v2) > 0."""
    det = np.linalg.det(verts[faces])
    faces = faces.copy()
    flip = det < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    return faces


def subdivide(directions: np.ndarray, faces: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """1-to-4 split, midpoints pushed to the unit sphere. Old vertices keep their indices."""
    verts = [d for d in directions]
    new_nodes = {}

    def midpoint(a: int, b: int) -> int:
        key = (a, b) if a < b else (b, a)
        if key not in new_nodes:
            s = directions[a] + directions[b]
            verts.append(s / np.linalg.norm(s))
            new_nodes[key] = len(verts) - 1
        return new_nodes[key]

    children = []
    for a, b, c in faces:
        ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
        children.extend([(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)])
    return np.array(verts), np.array(children, dtype=np.int64)


@lru_cache(maxsize=None)
def _icosphere_cached(level: int) -> Tuple[np.ndarray, np.ndarray]:
    if level == 0:
        return icosahedron()
    d, f = _icosphere_cached(level - 1)
    return subdivide(d, f)


def icosphere(level: int) -> Tuple[np.ndarray, np.ndarray]:
    if level < 0:
        raise DomainError(f"subdivision level must be nonnegative, got {level}")
    d, f = _icosphere_cached(int(level))
    return d.copy(), f.copy()


# --- Generators ---

def _map_profile(sf: SpaceForm, directions: np.ndarray, profile: Profile) -> np.ndarray:
    rho = np.asarray(profile(directions), dtype=float)
    if np.any(~np.isfinite(rho)) or np.any(rho <= 0):
        raise DomainError("radial profile must be finite and positive")
    if sf.kind == Kind.SPHERICAL and rho.max() > sf.max_radius:
        raise DomainError(
            f"profile radius {rho.max():.6g} exceeds the hemisphere margin "
            f"pi/(2 sqrt(kappa)) - 0.05/sqrt(kappa) = {sf.max_radius:.6g}")
    return sfm.radial_chart(sf, directions, rho)


def gen_radial_surface(sf: SpaceForm, profile: Profile, level: int) -> SurfaceMesh:
    directions, triangles = icosphere(level)
    vertices = _map_profile(sf, directions, profile)
    mesh = SurfaceMesh(sf, vertices, triangles, directions, profile, level)
    validate_surface(mesh)
    if DEBUG_PRINT_MESH:
        print(f"[Mesh] {sf.describe()} {getattr(profile, 'spec', 'custom')} level {level}: "
              f"{mesh.n_vertices} vertices, h={mesh.scale.h:.4g}")
    return mesh


def gen_ball_volume(radius: float, level: int) -> VolumeMesh:
    """
    Tetrahedral ball from 2^level concentric icosphere shells. The innermost
    shell is coned to the centre, each further layer is a prism layer split
    into three tetrahedra.
    """
    if radius <= 0:
        raise DomainError(f"ball radius must be positive, got {radius}")
    directions, tris = icosphere(level)
    ns = directions.shape[0]
    m = 2 ** level
    radii = radius * np.arange(1, m + 1) / m

    vertices = np.zeros((1 + m * ns, 3))
    for j, r in enumerate(radii):
        vertices[1 + j * ns:1 + (j + 1) * ns] = r * directions
    vertices[1 + (m - 1) * ns:] = radius * directions  # exact outer shell

    # sort each triangle's vertices by global index; keeps neighbouring prisms conforming
    s = np.sort(tris, axis=1)
    cone = np.column_stack([np.zeros(len(tris), dtype=np.int64), 1 + tris])
    blocks = [cone]
    for j in range(m - 1):
        B, T = 1 + j * ns + s, 1 + (j + 1) * ns + s
        blocks.append(np.column_stack([B[:, 0], B[:, 1], B[:, 2], T[:, 0]]))
        blocks.append(np.column_stack([B[:, 1], B[:, 2], T[:, 0], T[:, 1]]))
        blocks.append(np.column_stack([B[:, 2], T[:, 0], T[:, 1], T[:, 2]]))
    tets = np.concatenate(blocks)
    neg = signed_tet_volumes(vertices, tets) < 0
    tets[neg] = tets[neg][:, [0, 2, 1, 3]]

    sf = SpaceForm(Kind.EUCLIDEAN)
    surface = SurfaceMesh(sf, vertices[1 + (m - 1) * ns:].copy(), tris, directions,
                          SphereProfile(radius), level)
    vol = VolumeMesh(vertices, tets, surface, 1 + (m - 1) * ns + np.arange(ns), float(radius), level, sf)
    validate_volume(vol)
    if DEBUG_PRINT_MESH:
        print(f"[Mesh] ball R={radius:g} level {level}: {vol.n_vertices} vertices, {vol.n_tets} tets")
    return vol


def refine(mesh):
    """One subdivision step of a surface (through its profile) or a ball volume mesh."""
    if isinstance(mesh, VolumeMesh):
        if mesh.level is None:
            raise UnsupportedError("cannot refine an imported volume mesh")
        return gen_ball_volume(mesh.radius, mesh.level + 1)
    if mesh.radial_profile is None or mesh.directions is None:
        raise UnsupportedError("cannot refine a surface without a radial profile")
    directions, triangles = subdivide(mesh.directions, mesh.triangles)
    vertices = _map_profile(mesh.space_form, directions, mesh.radial_profile)
    level = None if mesh.level is None else mesh.level + 1
    refined = SurfaceMesh(mesh.space_form, vertices, triangles, directions, mesh.radial_profile, level)
    validate_surface(refined)
    return refined


# --- Validation ---

def signed_tet_volumes(vertices: np.ndarray, tets: np.ndarray) -> np.ndarray:
    P = vertices[tets]
    return np.linalg.det(P[:, 1:] - P[:, :1]) / 6.0


def signed_enclosed_volume(points: np.ndarray, triangles: np.ndarray) -> float:
    return float(np.linalg.det(points[triangles]).sum() / 6.0)


def validate_surface(mesh: SurfaceMesh) -> None:
    """Closed edge-manifold, consistently outward oriented, sphere topology."""
    t = mesh.triangles
    N = mesh.n_vertices
    if t.size == 0:
        raise MeshQualityError("not a closed surface: no triangles")
    if t.min() < 0 or t.max() >= N:
        raise MeshQualityError("triangle index out of range")
    if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 2] == t[:, 0])):
        raise MeshQualityError("triangle with repeated vertex")

    directed = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])
    keys = directed[:, 0] * N + directed[:, 1]
    uniq, counts = np.unique(keys, return_counts=True)
    if np.any(counts > 1):
        raise MeshQualityError("edge traversed twice in the same direction: inconsistent orientation "
                               "or non-manifold edge")
    reverse = directed[:, 1] * N + directed[:, 0]
    if not np.all(np.isin(reverse, uniq)):
        raise MeshQualityError("not a closed surface: boundary edge found")

    euler = N - len(uniq) // 2 + len(t)
    if euler != 2:
        raise MeshQualityError(f"Euler characteristic {euler}, expected 2")

    points = sfm.log_chart(mesh.space_form, mesh.vertices) if not mesh.space_form.is_flat else mesh.vertices
    if points.shape[1] == 3 and signed_enclosed_volume(points, t) <= 0:
        raise MeshQualityError("surface is not outward oriented")


def validate_volume(vol: VolumeMesh) -> None:
    if np.any(vol.tet_volumes <= 0):
        bad = int(np.flatnonzero(vol.tet_volumes <= 0)[0])
        raise MeshQualityError(f"tetrahedron {bad} is not positively oriented")
    faces = np.concatenate([vol.tets[:, [1, 2, 3]], vol.tets[:, [0, 2, 3]],
                            vol.tets[:, [0, 1, 3]], vol.tets[:, [0, 1, 2]]])
    faces = np.sort(faces, axis=1)
    uniq, counts = np.unique(faces, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshQualityError("face shared by more than two tetrahedra")
    boundary = uniq[counts == 1]
    expected = np.unique(np.sort(vol.boundary_triangles, axis=1), axis=0)
    if boundary.shape != expected.shape or not np.array_equal(boundary, expected):
        raise MeshQualityError("boundary faces do not match the boundary surface")
