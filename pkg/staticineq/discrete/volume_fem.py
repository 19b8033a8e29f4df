"""
P1 tetrahedral finite elements on Euclidean ball meshes: the Dirichlet
extension Lap u + n k u = 0, u = eta on the boundary, the weighted Reilly
identity checked by quadrature of closed-form integrands, and the terms the
inequality's proof discards.
"""
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from staticineq.config import DEBUG_PRINT_REILLY, FIELD_CHECK_POINTS, MAX_PRINCIPLE_SLACK
from staticineq.discrete.solver import solve_spd
from staticineq.discrete.surface_ops import (
    SurfaceGeometry,
    build_geometry,
    ii_quadratic_form,
    laplace_beltrami,
    tangential_gradient_sq,
)
from staticineq.errors import DomainError, UnsupportedError, UsageError
from staticineq.geometry.mesh import VolumeMesh
from staticineq.geometry.spaceform import SpaceForm
from staticineq.inequality.fields import check_field
from staticineq.inequality.functional import InequalityForm, evaluate_deficit
from staticineq.schemas import ProofDecompositionReport, ReillyReport, ReillyTerms


@dataclass(frozen=True, eq=False)
class FemSystem:
    mesh: VolumeMesh
    stiffness: sp.csr_matrix     # P1 Laplacian, row sums zero
    mass: np.ndarray             # lumped, sums to the mesh volume
    grads: np.ndarray            # (T, 4, 3) barycentric gradients
    volumes: np.ndarray          # (T,)
    boundary: np.ndarray         # volume ids of boundary vertices, ordered as the surface
    interior: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.mesh.n_vertices


@dataclass
class ExtensionResult:
    u: np.ndarray
    iterations: int
    max_principle_violation: float = 0.0
    warnings: List[str] = field(default_factory=list)


def assemble(vol: VolumeMesh) -> FemSystem:
    P = vol.vertices[vol.tets]
    E = P[:, 1:] - P[:, :1]                     # edge rows
    volumes = np.linalg.det(E) / 6.0
    if np.any(volumes <= 0):
        raise DomainError("volume mesh has non-positive tetrahedra")
    inv = np.linalg.inv(E)                      # columns are grad lambda_1..3
    g123 = np.transpose(inv, (0, 2, 1))
    grads = np.concatenate([-g123.sum(axis=1, keepdims=True), g123], axis=1)

    K_local = volumes[:, None, None] * np.einsum("tai,tbi->tab", grads, grads)
    rows = np.repeat(vol.tets, 4, axis=1).ravel()
    cols = np.tile(vol.tets, (1, 4)).ravel()
    K = sp.coo_matrix((K_local.ravel(), (rows, cols)), shape=(vol.n_vertices, vol.n_vertices)).tocsr()
    mass = np.bincount(vol.tets.ravel(), weights=np.repeat(volumes / 4.0, 4), minlength=vol.n_vertices)

    boundary = vol.boundary_vertex_ids
    mask = np.ones(vol.n_vertices, dtype=bool)
    mask[boundary] = False
    return FemSystem(vol, K, mass, grads, volumes, boundary, np.flatnonzero(mask))


def _require_flat(sf: Optional[SpaceForm]) -> None:
    if sf is not None and not sf.is_flat:
        raise UnsupportedError("volume finite elements are Euclidean only")


def solve_extension(sys: FemSystem, sf: Optional[SpaceForm], k: float, eta) -> ExtensionResult:
    """
    Solve (L - n k M) u = 0 in the interior with u = eta on the boundary.
    eta is indexed like the boundary surface's vertices.
    """
    _require_flat(sf)
    n = 3 if sf is None else sf.n
    if k > 0:
        raise DomainError(
            f"k = {k:g} > 0 refused: the extension is only guaranteed solvable for k > 0 when the "
            "domain is not isometric to a hemisphere, which the Euclidean volume path cannot certify")
    eta = np.asarray(getattr(eta, "values", eta), dtype=float)
    if eta.shape != (len(sys.boundary),):
        raise UsageError(f"boundary data has {eta.size} values, boundary has {len(sys.boundary)} vertices")

    A = sys.stiffness - n * k * sp.diags(sys.mass)
    A = A.tocsr()
    I, B = sys.interior, sys.boundary
    A_II = A[I][:, I]
    rhs = -(A[I][:, B] @ eta)
    x0 = np.full(len(I), eta.mean())
    u_I, iterations = solve_spd(A_II, rhs, x0=x0)

    u = np.empty(sys.n_vertices)
    u[B] = eta
    u[I] = u_I

    result = ExtensionResult(u, iterations)
    if k == 0 and len(I):
        violation = max(0.0, u_I.max() - eta.max(), eta.min() - u_I.min())
        result.max_principle_violation = float(violation)
        if violation > MAX_PRINCIPLE_SLACK:
            msg = f"discrete maximum principle violated by {violation:.3e} (mesh is not an M-matrix)"
            result.warnings.append(msg)
            print(f"[FEM] ⚠️ {msg}")
    return result


# --- Quadrature helpers ---

def centroids(vol: VolumeMesh) -> np.ndarray:
    return vol.vertices[vol.tets].mean(axis=1)


def _analytic(field, X: np.ndarray):
    if not callable(getattr(field, "hessian", None)) or not callable(getattr(field, "gradient", None)):
        raise UsageError(f"field '{getattr(field, 'label', field)}' needs gradient and Hessian suppliers")
    return field.value(X), field.gradient(X), field.hessian(X)


def verify_reilly(vol: VolumeMesh, f, V, K: float, geom: Optional[SurfaceGeometry] = None) -> ReillyReport:
    """
    Evaluate both sides of the weighted Reilly identity on a Euclidean ball
    mesh (Ric = 0): volume terms by the centroid rule, boundary terms by the
    vertex-lumped rule with discrete Lap_S, grad_S, H and II.
    """
    _require_flat(vol.space_form)
    n = vol.space_form.n
    Ric = 0.0
    geom = build_geometry(vol.surface) if geom is None else geom

    Xc = centroids(vol)
    w = vol.tet_volumes
    sample = Xc[:: max(1, len(Xc) // FIELD_CHECK_POINTS)]
    check_field(f, sample)
    check_field(V, sample)
    f_c, df_c, ddf_c = _analytic(f, Xc)
    V_c, dV_c, ddV_c = _analytic(V, Xc)
    eye = np.eye(n)[None]
    lap_f = np.trace(ddf_c, axis1=1, axis2=2)
    lap_V = np.trace(ddV_c, axis1=1, axis2=2)

    shifted = ddf_c + K * f_c[:, None, None] * eye
    lhs_vol = np.sum(w * V_c * ((lap_f + K * n * f_c) ** 2 - np.sum(shifted ** 2, axis=(1, 2))))
    grad_sq = np.sum(df_c ** 2, axis=1)
    hess_V_term = np.sum(w * (np.einsum("ti,tij,tj->t", df_c, ddV_c, df_c)
                              - (lap_V + 2 * (n - 1) * K * V_c) * grad_sq))
    ricci_term = np.sum(w * V_c * Ric * grad_sq)
    f_sq_term = (n - 1) * K * np.sum(w * (lap_V + n * K * V_c) * f_c ** 2)

    Xb = vol.surface.vertices
    nu = geom.normals
    a = geom.vertex_areas
    f_b, df_b, _ = _analytic(f, Xb)
    V_b, dV_b, _ = _analytic(V, Xb)
    f_nu = np.sum(df_b * nu, axis=1)
    V_nu = np.sum(dV_b * nu, axis=1)
    lap_s = laplace_beltrami(geom, f_b).values
    dVdnu_bdry = np.sum(a * V_nu * (tangential_gradient_sq(geom, f_b) - (n - 1) * K * f_b ** 2))
    mixed_bdry = np.sum(a * V_b * (2 * f_nu * lap_s + 2 * (n - 1) * K * f_nu * f_b))
    H_bdry = np.sum(a * V_b * geom.H * f_nu ** 2)
    II_bdry = np.sum(a * V_b * ii_quadratic_form(geom, f_b))

    terms = ReillyTerms(lhs_vol=float(lhs_vol), hess_V_term=float(hess_V_term), ricci_term=float(ricci_term),
                        f_sq_term=float(f_sq_term), dVdnu_bdry=float(dVdnu_bdry), mixed_bdry=float(mixed_bdry),
                        H_bdry=float(H_bdry), II_bdry=float(II_bdry))
    parts = [terms.hess_V_term, terms.ricci_term, terms.f_sq_term,
             terms.dVdnu_bdry, terms.mixed_bdry, terms.H_bdry, terms.II_bdry]
    rhs = float(sum(parts))
    residual = terms.lhs_vol - rhs
    magnitude = abs(terms.lhs_vol) + sum(abs(p) for p in parts)
    if DEBUG_PRINT_REILLY:
        print(f"[Reilly] L{vol.level}: lhs={terms.lhs_vol:.6g} rhs={rhs:.6g} residual={residual:.3e}")
    return ReillyReport(
        K=K, f_id=getattr(f, "label", "f"), V_id=getattr(V, "label", "V"), terms=terms, rhs=rhs,
        residual=residual, relative_residual=abs(residual) / magnitude if magnitude > 0 else 0.0,
        h=vol.scale.h, level=vol.level, mesh_id=f"ball:R={vol.radius:g}:L{vol.level}",
        ricci_vanishes=True,
    )


# --- Proof decomposition ---

def tet_gradients(sys: FemSystem, u: np.ndarray) -> np.ndarray:
    return np.einsum("ta,tai->ti", u[sys.mesh.tets], sys.grads)


def recovered_gradients(sys: FemSystem, u: np.ndarray) -> np.ndarray:
    """Volume-weighted average of the per-tet gradients at each vertex."""
    g = tet_gradients(sys, u) * sys.volumes[:, None]
    out = np.zeros((sys.n_vertices, 3))
    weight = np.zeros(sys.n_vertices)
    for corner in range(4):
        np.add.at(out, sys.mesh.tets[:, corner], g)
        np.add.at(weight, sys.mesh.tets[:, corner], sys.volumes)
    return out / weight[:, None]


def recovered_hessians(sys: FemSystem, u: np.ndarray) -> np.ndarray:
    """Per-tet Hessian as the gradient of the P1 interpolant of recovered gradients."""
    G = recovered_gradients(sys, u)[sys.mesh.tets]             # (T, 4, 3)
    Hs = np.einsum("tai,taj->tij", G, sys.grads)
    return 0.5 * (Hs + np.transpose(Hs, (0, 2, 1)))


def proof_decomposition(vol: VolumeMesh, sf: SpaceForm, k: float, eta, label: str = "eta",
                        sys: Optional[FemSystem] = None, geom: Optional[SurfaceGeometry] = None,
                        extension: Optional[ExtensionResult] = None) -> ProofDecompositionReport:
    """
    The boundary deficit equals int V|Hess u + k u g|^2 + Ricci excess + the
    boundary square term for the extension u of eta. Euclidean (V = 1, Ric = 0), k <= 0.
    """
    _require_flat(sf)
    if k > 0:
        raise DomainError("the decomposition needs k <= 0")
    n = sf.n
    sys = assemble(vol) if sys is None else sys
    geom = build_geometry(vol.surface) if geom is None else geom
    eta = np.asarray(getattr(eta, "values", eta), dtype=float)
    ext = solve_extension(sys, sf, k, eta) if extension is None else extension
    u = ext.u

    u_c = u[vol.tets].mean(axis=1)
    hess = recovered_hessians(sys, u) + k * u_c[:, None, None] * np.eye(n)[None]
    hessian_term = float(np.sum(sys.volumes * np.sum(hess ** 2, axis=(1, 2))))

    grad_sq = float(np.sum(sys.volumes * np.sum(tet_gradients(sys, u) ** 2, axis=1)))
    u_sq = float(np.sum(sys.mass * u ** 2))
    R = 0.0
    ricci_excess = 2.0 * (0.0 - (n - 1) * k) * grad_sq + k * (n * (n - 1) * k - R) * u_sq

    u_nu = np.sum(recovered_gradients(sys, u)[sys.boundary] * geom.normals, axis=1)
    sqrt_H = np.sqrt(geom.H)
    lap_s = laplace_beltrami(geom, eta).values + (n - 1) * k * eta
    boundary_square = float(np.sum(geom.vertex_areas * (sqrt_H * u_nu + lap_s / sqrt_H) ** 2))

    report = evaluate_deficit(geom, sf, InequalityForm("static", k), eta)
    discards = hessian_term + ricci_excess + boundary_square
    return ProofDecompositionReport(
        eta_id=label, k=k, level=vol.level if vol.level is not None else -1, h=vol.scale.h,
        hessian_term=hessian_term, ricci_excess=float(ricci_excess), boundary_square=boundary_square,
        deficit=report.deficit, discards=float(discards), closure=float(report.deficit - discards),
    )
