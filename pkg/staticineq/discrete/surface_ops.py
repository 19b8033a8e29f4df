"""
Discrete operators and pointwise geometry on a closed surface in a space form.

The Laplace-Beltrami operator is the intrinsic cotangent Laplacian built from
geodesic edge lengths with a lumped barycentric mass, Lap_S = -M^{-1} L.
Normals, second fundamental form and mean curvature (trace convention, outward
normal) come from the radial profile by a 4th-order finite-difference stencil
when the mesh carries one, otherwise (Euclidean only) from quadric fits.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp

from staticineq.config import (
    DEBUG_PRINT_GEOMETRY,
    DEGENERATE_ANGLE,
    FD_HELPER_SWITCH,
    FD_STEP,
    FD_WEIGHTS_FIRST,
    FD_WEIGHTS_SECOND,
)
from staticineq.errors import MeshQualityError, UnsupportedError, UsageError
from staticineq.geometry import spaceform as sfm
from staticineq.geometry.mesh import SurfaceMesh
from staticineq.geometry.spaceform import SpaceForm


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Per-vertex values, optionally backed by a closed-form field."""
    values: np.ndarray
    label: str = "field"
    analytic: Optional[object] = None

    def scaled(self, c: float) -> "ScalarField":
        return ScalarField(c * self.values, f"{c:g}*({self.label})", None)

    def shifted(self, c: float) -> "ScalarField":
        return ScalarField(self.values + c, f"({self.label})+{c:g}", None)


@dataclass(frozen=True, eq=False)
class SurfaceGeometry:
    mesh: SurfaceMesh
    vertex_areas: np.ndarray      # lumped dual areas
    normals: np.ndarray           # (N, dim) outward unit normals in the model tangent space
    H: np.ndarray                 # trace of II
    II: np.ndarray                # (N, 2, 2) in the vertex tangent basis
    tangent_basis: np.ndarray     # (N, dim, 2) orthonormal (t1, t2), t2 = nu x t1
    stiffness: sp.csr_matrix      # cotangent L, positive semidefinite
    tri_lengths: np.ndarray       # (M, 3), entry i is the side opposite corner i
    tri_areas: np.ndarray
    curvature_source: str = "profile"

    @property
    def space_form(self) -> SpaceForm:
        return self.mesh.space_form

    @property
    def mass(self) -> sp.dia_matrix:
        return sp.diags(self.vertex_areas)

    @property
    def area(self) -> float:
        return float(self.vertex_areas.sum())

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices


def _values(geom: SurfaceGeometry, field) -> np.ndarray:
    values = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    if values.shape != (geom.n_vertices,):
        raise UsageError(f"field has {values.shape} values, mesh has {geom.n_vertices} vertices")
    return values


# --- Intrinsic triangle data ---

def triangle_lengths(mesh: SurfaceMesh) -> np.ndarray:
    X, t = mesh.vertices, mesh.triangles
    sf = mesh.space_form
    return np.column_stack([
        sfm.geodesic_distance(sf, X[t[:, 1]], X[t[:, 2]]),
        sfm.geodesic_distance(sf, X[t[:, 2]], X[t[:, 0]]),
        sfm.geodesic_distance(sf, X[t[:, 0]], X[t[:, 1]]),
    ])


def heron_area(lengths: np.ndarray) -> np.ndarray:
    """Numerically stable Heron formula (sides sorted descending)."""
    a, b, c = np.sort(lengths, axis=1)[:, ::-1].T
    prod = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c))
    return 0.25 * np.sqrt(np.maximum(prod, 0.0))


def cotangents(lengths: np.ndarray, areas: np.ndarray) -> np.ndarray:
    """cot of the angle at each corner, rejecting degenerate triangles."""
    sq = lengths ** 2
    num = np.column_stack([sq[:, 1] + sq[:, 2] - sq[:, 0],
                           sq[:, 2] + sq[:, 0] - sq[:, 1],
                           sq[:, 0] + sq[:, 1] - sq[:, 2]])
    angles = np.arctan2(4.0 * areas[:, None], num)
    bad = np.flatnonzero(np.min(angles, axis=1) < DEGENERATE_ANGLE)
    if bad.size:
        raise MeshQualityError(f"degenerate triangle {int(bad[0])}: intrinsic angle below {DEGENERATE_ANGLE} rad")
    return num / (4.0 * areas[:, None])


def assemble_stiffness(triangles: np.ndarray, cot: np.ndarray, n_vertices: int) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for corner in range(3):
        j, k = triangles[:, (corner + 1) % 3], triangles[:, (corner + 2) % 3]
        w = 0.5 * cot[:, corner]
        rows += [j, k, j, k]
        cols += [k, j, j, k]
        vals += [-w, -w, w, w]
    L = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(n_vertices, n_vertices))
    return L.tocsr()


def lumped_areas(triangles: np.ndarray, areas: np.ndarray, n_vertices: int) -> np.ndarray:
    return np.bincount(triangles.ravel(), weights=np.repeat(areas / 3.0, 3), minlength=n_vertices)


# --- Curvature ---

def _seed_neighbours(mesh: SurfaceMesh) -> np.ndarray:
    """Next vertex along the first triangle each vertex appears in."""
    flat = mesh.triangles.ravel()
    _, first = np.unique(flat, return_index=True)
    rows, pos = first // 3, first % 3
    return mesh.triangles[rows, (pos + 1) % 3]


def _tangent_basis(sf: SpaceForm, mesh: SurfaceMesh, frames: np.ndarray, n_c: np.ndarray) -> np.ndarray:
    """t1 from the seed edge projected off the normal, t2 = nu x t1 (frame coordinates)."""
    X = mesh.vertices
    chord = X[_seed_neighbours(mesh)] - X
    c = sfm.frame_coords(sf, frames, sfm.tangent_project(sf, X, chord))
    t1 = c - np.sum(c * n_c, axis=1, keepdims=True) * n_c
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(n_c, t1)
    return np.stack([t1, t2], axis=2)


def profile_curvature(mesh: SurfaceMesh):
    """
    Normals and II from x(omega) = exp_p(rho(omega) omega), differentiated in
    two direction-sphere parameters by a 5x5 stencil. The flat second
    derivative projected to the model tangent space is the covariant one.
    """
    sf = mesh.space_form
    omega = mesh.directions
    N = omega.shape[0]
    helper = np.where(np.abs(omega[:, 2:3]) > FD_HELPER_SWITCH, [[1.0, 0.0, 0.0]], [[0.0, 0.0, 1.0]])
    a1 = helper - np.sum(helper * omega, axis=1, keepdims=True) * omega
    a1 /= np.linalg.norm(a1, axis=1, keepdims=True)
    a2 = np.cross(omega, a1)

    c = np.asarray(FD_WEIGHTS_FIRST)
    s = np.asarray(FD_WEIGHTS_SECOND)
    offsets = FD_STEP * np.arange(-2, 3)
    S1, S2 = np.meshgrid(offsets, offsets, indexing="ij")
    dirs = omega[:, None, None, :] + S1[None, :, :, None] * a1[:, None, None, :] + S2[None, :, :, None] * a2[:, None, None, :]
    dirs /= np.linalg.norm(dirs, axis=-1, keepdims=True)
    flat_dirs = dirs.reshape(-1, 3)
    rho = np.asarray(mesh.radial_profile(flat_dirs), dtype=float)
    P = sfm.radial_chart(sf, flat_dirs, rho, check=False).reshape(N, 5, 5, sf.dim)

    X = mesh.vertices
    proj = lambda v: sfm.tangent_project(sf, X, v)
    X1 = proj(np.einsum("i,nid->nd", c, P[:, :, 2]) / FD_STEP)
    X2 = proj(np.einsum("j,njd->nd", c, P[:, 2, :]) / FD_STEP)
    X11 = proj(np.einsum("i,nid->nd", s, P[:, :, 2]) / FD_STEP ** 2)
    X22 = proj(np.einsum("j,njd->nd", s, P[:, 2, :]) / FD_STEP ** 2)
    X12 = proj(np.einsum("i,j,nijd->nd", c, c, P) / FD_STEP ** 2)

    frames = sfm.tangent_frames(sf, X)
    fc = lambda v: sfm.frame_coords(sf, frames, v)
    e1, e2 = fc(X1), fc(X2)
    n_c = np.cross(e1, e2)
    n_c /= np.linalg.norm(n_c, axis=1, keepdims=True)
    radial = fc(sfm.tangent_project(sf, X, X - sf.base_point[None, :]))
    n_c *= np.sign(np.sum(n_c * radial, axis=1))[:, None]

    # II(X_a, X_b) = -<D_a X_b, nu>
    B = np.empty((N, 2, 2))
    B[:, 0, 0] = -np.sum(fc(X11) * n_c, axis=1)
    B[:, 1, 1] = -np.sum(fc(X22) * n_c, axis=1)
    B[:, 0, 1] = B[:, 1, 0] = -np.sum(fc(X12) * n_c, axis=1)

    basis = _tangent_basis(sf, mesh, frames, n_c)
    T = np.empty((N, 2, 2))
    for i in range(2):
        T[:, i, 0] = np.sum(e1 * basis[:, :, i], axis=1)
        T[:, i, 1] = np.sum(e2 * basis[:, :, i], axis=1)
    C = np.linalg.inv(T)
    II = np.einsum("nai,nab,nbj->nij", C, B, C)
    II = 0.5 * (II + np.transpose(II, (0, 2, 1)))

    normals = np.einsum("nda,na->nd", frames, n_c)
    tangent_basis = np.einsum("nda,nai->ndi", frames, basis)
    return normals, II, tangent_basis


def _vertex_normals_flat(mesh: SurfaceMesh) -> np.ndarray:
    X, t = mesh.vertices, mesh.triangles
    fn = np.cross(X[t[:, 1]] - X[t[:, 0]], X[t[:, 2]] - X[t[:, 0]])
    vn = np.zeros_like(X)
    for corner in range(3):
        np.add.at(vn, t[:, corner], fn)
    return vn / np.linalg.norm(vn, axis=1, keepdims=True)


def quadric_curvature(mesh: SurfaceMesh):
    """
    Euclidean curvature by least-squares fit of w = a u^2 + b uv + c v^2 + d u + e v
    over the 2-ring in the local frame (t1, t2, nu).
    """
    if not mesh.space_form.is_flat:
        raise UnsupportedError("discrete curvature without a radial profile is only available in Euclidean space")
    X, N = mesh.vertices, mesh.n_vertices
    normals = _vertex_normals_flat(mesh)
    basis = _tangent_basis(mesh.space_form, mesh, np.broadcast_to(np.eye(3), (N, 3, 3)), normals)

    e = mesh.edges
    A = sp.coo_matrix((np.ones(2 * len(e)), (np.r_[e[:, 0], e[:, 1]], np.r_[e[:, 1], e[:, 0]])), shape=(N, N)).tocsr()
    ring2 = (A + A @ A).tolil()

    II = np.empty((N, 2, 2))
    for v in range(N):
        nb = np.array([q for q in ring2.rows[v] if q != v])
        if nb.size < 5:
            raise MeshQualityError(f"vertex {v} has too few neighbours for a quadric fit")
        d = X[nb] - X[v]
        u, w_, h = d @ basis[v, :, 0], d @ basis[v, :, 1], d @ normals[v]
        design = np.column_stack([u * u, u * w_, w_ * w_, u, w_])
        coef, *_ = np.linalg.lstsq(design, h, rcond=None)
        qa, qb, qc, qd, qe = coef
        II[v] = -np.array([[2 * qa, qb], [qb, 2 * qc]]) / np.sqrt(1.0 + qd * qd + qe * qe)
    return normals, II, basis


# --- Assembly ---

def build_geometry(mesh: SurfaceMesh) -> SurfaceGeometry:
    lengths = triangle_lengths(mesh)
    areas = heron_area(lengths)
    cot = cotangents(lengths, areas)
    L = assemble_stiffness(mesh.triangles, cot, mesh.n_vertices)
    vertex_areas = lumped_areas(mesh.triangles, areas, mesh.n_vertices)

    if mesh.radial_profile is not None and mesh.directions is not None:
        normals, II, basis = profile_curvature(mesh)
        source = "profile"
    elif mesh.space_form.is_flat:
        normals, II, basis = quadric_curvature(mesh)
        source = "quadric"
    else:
        raise UnsupportedError(
            f"curvature on a {mesh.space_form.kind.value} mesh needs a radial profile")

    H = np.trace(II, axis1=1, axis2=2)
    geom = SurfaceGeometry(mesh, vertex_areas, normals, H, II, basis, L, lengths, areas, source)
    if DEBUG_PRINT_GEOMETRY:
        print(f"[Geometry] {mesh.n_vertices} vertices, area={geom.area:.6g}, "
              f"H in [{H.min():.4g}, {H.max():.4g}] ({source})")
    return geom


# --- Operators ---

def laplace_beltrami(geom: SurfaceGeometry, field) -> ScalarField:
    values = _values(geom, field)
    label = field.label if isinstance(field, ScalarField) else "field"
    return ScalarField(-(geom.stiffness @ values) / geom.vertex_areas, f"lap({label})")


def triangle_gradients(geom: SurfaceGeometry, field) -> np.ndarray:
    """Per-triangle gradient (M, 2) in the unfolded triangle P0=(0,0), P1=(l2,0), P2=(x2,y2)."""
    values = _values(geom, field)
    t = geom.mesh.triangles
    l0, l1, l2 = geom.tri_lengths.T
    x2 = (l2 ** 2 + l1 ** 2 - l0 ** 2) / (2.0 * l2)
    y2 = 2.0 * geom.tri_areas / l2
    d1 = values[t[:, 1]] - values[t[:, 0]]
    d2 = values[t[:, 2]] - values[t[:, 0]]
    g1 = d1 / l2
    g2 = (d2 - x2 * g1) / y2
    return np.column_stack([g1, g2])


def _average_to_vertices(geom: SurfaceGeometry, per_triangle: np.ndarray) -> np.ndarray:
    t = geom.mesh.triangles
    weights = geom.tri_areas / 3.0
    w = per_triangle * weights.reshape((-1,) + (1,) * (per_triangle.ndim - 1))
    out = np.zeros((geom.n_vertices,) + per_triangle.shape[1:])
    for corner in range(3):
        np.add.at(out, t[:, corner], w)
    return out / geom.vertex_areas.reshape((-1,) + (1,) * (per_triangle.ndim - 1))


def tangential_gradient_sq(geom: SurfaceGeometry, field) -> np.ndarray:
    """|grad_S eta|^2 per vertex; sum(area * value) equals eta^T L eta."""
    g = triangle_gradients(geom, field)
    return _average_to_vertices(geom, np.sum(g * g, axis=1))


def galerkin_product(geom: SurfaceGeometry, eta, xi) -> float:
    ge, gx = triangle_gradients(geom, eta), triangle_gradients(geom, xi)
    return float(np.sum(geom.tri_areas * np.sum(ge * gx, axis=1)))


def vertex_gradients(geom: SurfaceGeometry, field) -> np.ndarray:
    """
    Area-averaged tangential gradient at each vertex, (N, 2) in the vertex
    tangent basis. Per-triangle gradients come from the ambient chords.
    """
    values = _values(geom, field)
    sf = geom.space_form
    X, t = geom.mesh.vertices, geom.mesh.triangles
    E1 = X[t[:, 1]] - X[t[:, 0]]
    E2 = X[t[:, 2]] - X[t[:, 0]]
    ip = lambda a, b: sfm.ambient_inner(sf, a, b)
    g11, g12, g22 = ip(E1, E1), ip(E1, E2), ip(E2, E2)
    det = g11 * g22 - g12 * g12
    d1 = values[t[:, 1]] - values[t[:, 0]]
    d2 = values[t[:, 2]] - values[t[:, 0]]
    c1 = (g22 * d1 - g12 * d2) / det
    c2 = (g11 * d2 - g12 * d1) / det
    grad = c1[:, None] * E1 + c2[:, None] * E2

    out = np.zeros((geom.n_vertices, 2))
    weights = geom.tri_areas / 3.0
    for corner in range(3):
        v = t[:, corner]
        basis = geom.tangent_basis[v]
        coords = np.einsum("md,mdi->mi", grad * sf.metric_diag, basis)
        np.add.at(out, v, coords * weights[:, None])
    return out / geom.vertex_areas[:, None]


def ii_quadratic_form(geom: SurfaceGeometry, field) -> np.ndarray:
    w = vertex_gradients(geom, field)
    return np.einsum("ni,nij,nj->n", w, geom.II, w)


def cotangent_mean_curvature(geom: SurfaceGeometry) -> np.ndarray:
    """
    H from the discrete Laplacian of the embedding coordinates, using
    Lap_S X = -(n-1) k X - H nu for a surface in a space form.
    """
    sf = geom.space_form
    X = geom.mesh.vertices
    lap = -(geom.stiffness @ X) / geom.vertex_areas[:, None]
    return -sfm.ambient_inner(sf, lap + (sf.n - 1) * sf.k * X, geom.normals)


def normal_derivative_V(geom: SurfaceGeometry, sf: Optional[SpaceForm] = None,
                        base: Optional[np.ndarray] = None) -> np.ndarray:
    """dV/dnu for the distinguished potential of the model."""
    sf = geom.space_form if sf is None else sf
    a = sfm.distinguished_potential(sf, base)
    _, grad, _ = sfm.potential_value_grad_hess(sf, a, geom.mesh.vertices)
    return sfm.ambient_inner(sf, grad, geom.normals)


def laplacian_splitting_residual(geom: SurfaceGeometry, field) -> np.ndarray:
    """
    Lap u - (Lap_S u + H du/dnu + Hess u(nu, nu)) at the vertices for a
    closed-form Euclidean field exposing value/gradient/hessian.
    """
    if not geom.space_form.is_flat:
        raise UnsupportedError("the splitting check uses ambient Euclidean derivatives")
    X = geom.mesh.vertices
    nu = geom.normals
    values = field.value(X)
    grad = field.gradient(X)
    hess = field.hessian(X)
    lap_s = laplace_beltrami(geom, values).values
    du_dnu = np.sum(grad * nu, axis=1)
    hess_nn = np.einsum("ni,nij,nj->n", nu, hess, nu)
    return np.trace(hess, axis1=1, axis2=2) - (lap_s + geom.H * du_dnu + hess_nn)
