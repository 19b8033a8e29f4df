"""
Boundary functional of static manifolds.

For a closed surface S with H > 0 in a static model with potential V and
curvature bound k, and any eta on S,

    int V [(Lap_S eta + (n-1) k eta)^2 / H - II(grad eta, grad eta)]
        >= int dV/dnu [|grad_S eta|^2 - (n-1) k eta^2]

with equality on space forms exactly for restrictions of static potentials.
The star-shaped comparison form uses V = cosh(sqrt(kappa) r) and flips the
sign of the curvature term.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from staticineq.config import (
    CROSS_CHECK_SEED,
    DEBUG_PRINT_SWEEP,
    DEFAULT_POLY_DEGREE,
    DEFAULT_SEED,
    DEFAULT_SWEEP_COUNT,
    EXECUTOR_MAX_WORKERS,
    NORMALIZATION_RTOL,
    SWEEP_TOL_FACTOR,
)
from staticineq.discrete.surface_ops import (
    ScalarField,
    SurfaceGeometry,
    ii_quadratic_form,
    laplace_beltrami,
    normal_derivative_V,
    tangential_gradient_sq,
)
from staticineq.errors import DomainError, HypothesisViolation, UsageError
from staticineq.geometry import spaceform as sfm
from staticineq.geometry.spaceform import Kind, SpaceForm
from staticineq.inequality.fields import (
    Polynomial,
    basis_combination,
    field_from_spec,
    monomial_exponents,
)
from staticineq.schemas import CrossCheckReport, DeficitReport, DeficitTerms, EnsembleSummary


@dataclass(frozen=True)
class InequalityForm:
    """
    variant "static": V is the model's static potential, k defaults to the
    model curvature. variant "thm4": V = cosh(sqrt(kappa) r), k_or_kappa = kappa > 0.
    """
    variant: Literal["static", "thm4"] = "static"
    k_or_kappa: Optional[float] = None
    base_point: Optional[Tuple[float, ...]] = None


def resolve_k(sf: SpaceForm, k: Optional[float]) -> float:
    """Admissible k: the model curvature, or any k <= min(0, k_model) since Ric >= (n-1) k g."""
    if k is None or np.isclose(k, sf.k, rtol=0.0, atol=1e-15):
        return sf.k
    if k > min(0.0, sf.k):
        raise UsageError(f"k = {k:g} not admissible on {sf.describe()}: "
                         f"need k <= {min(0.0, sf.k):g} or k equal to the model curvature")
    return float(k)


def _potential_data(geom: SurfaceGeometry, sf: SpaceForm, form: InequalityForm):
    """(V, dV/dnu, c) with c the uniform curvature coefficient in Lap + c and |grad|^2 - c eta^2."""
    base = None if form.base_point is None else np.asarray(form.base_point, dtype=float)
    X = geom.mesh.vertices
    if form.variant == "static":
        k = resolve_k(sf, form.k_or_kappa)
        a = sfm.distinguished_potential(sf, base)
        V, _, _ = sfm.potential_value_grad_hess(sf, a, X)
        radial = sfm.potential_from_distance(sf, X, base)
        if not np.allclose(V, radial, rtol=NORMALIZATION_RTOL, atol=0.0):
            raise DomainError(f"potential on {sf.describe()} is not normalized to {sfm.normalization_label(sf)}")
        dV = normal_derivative_V(geom, sf, base)
        return V, dV, (sf.n - 1) * k, k, (sf.kappa if not sf.is_flat else 0.0)

    kappa = form.k_or_kappa
    if kappa is None or kappa <= 0:
        raise UsageError("the star-shaped comparison form needs kappa > 0")
    if sf.kind == Kind.HYPERBOLIC and sf.kappa > kappa * (1 + 1e-12):
        raise UsageError(f"sectional curvature {sf.k:g} is below -kappa = {-kappa:g}")
    p = sf.base_point if base is None else base
    sq = np.sqrt(kappa)
    r = sfm.distance_from_base(sf, X, p)
    V = np.cosh(sq * r)
    radial = sfm.tangent_project(sf, X, X - p[None, :])
    norm = np.sqrt(np.maximum(sfm.ambient_inner(sf, radial, radial), 0.0))
    unit = np.divide(radial, norm[:, None], out=np.zeros_like(radial), where=norm[:, None] > 0)
    grad = (sq * np.sinh(sq * r))[:, None] * unit
    dV = sfm.ambient_inner(sf, grad, geom.normals)
    return V, dV, -(sf.n - 1) * kappa, -kappa, float(kappa)


def evaluate_deficit(geom: SurfaceGeometry, sf: SpaceForm, form: InequalityForm, eta,
                     allow_inadmissible: bool = False, seed: Optional[int] = None,
                     tag: Optional[str] = None) -> DeficitReport:
    if isinstance(eta, ScalarField):
        values, label = eta.values, eta.label
    else:
        values, label = np.asarray(eta, dtype=float), "field"
    if values.shape != (geom.n_vertices,):
        raise UsageError(f"field '{label}' has {values.size} values, mesh has {geom.n_vertices} vertices")
    mesh_sf = geom.space_form
    if sf is not mesh_sf and (sf.kind != mesh_sf.kind
                              or (not sf.is_flat and not np.isclose(sf.kappa, mesh_sf.kappa, rtol=1e-12, atol=0.0))):
        raise DomainError(f"space form {sf.describe()} does not match the mesh model {mesh_sf.describe()}")

    H = geom.H
    i_min = int(np.argmin(H))
    admissible = bool(H[i_min] > 0)
    if not admissible and not allow_inadmissible:
        raise HypothesisViolation(f"mean curvature H = {H[i_min]:.6g} <= 0 at vertex {i_min}", vertex=i_min)

    V, dV, c, k, kappa = _potential_data(geom, sf, form)
    w = geom.vertex_areas
    lap = laplace_beltrami(geom, values).values + c * values
    lap_term = float(np.sum(w * V * lap ** 2 / H))
    ii_term = float(np.sum(w * V * ii_quadratic_form(geom, values)))
    grad_term = float(np.sum(w * dV * tangential_gradient_sq(geom, values)))
    eta_sq_term = float(np.sum(w * dV * c * values ** 2))

    lhs = lap_term - ii_term
    rhs = grad_term - eta_sq_term
    deficit = lhs - rhs
    scale = abs(lap_term) + abs(ii_term) + abs(grad_term) + abs(eta_sq_term)
    return DeficitReport(
        variant=form.variant, k=k, kappa=kappa, h=geom.mesh.scale.h, n_vertices=geom.n_vertices,
        lhs=lhs, rhs=rhs, deficit=deficit,
        terms=DeficitTerms(lap_term=lap_term, ii_term=ii_term, grad_term=grad_term, eta_sq_term=eta_sq_term),
        min_H=float(H[i_min]), min_H_vertex=i_min, field_id=label, seed=seed, kind=sf.kind.value,
        level=geom.mesh.level, scale=scale, relative_deficit=abs(deficit) / scale if scale > 0 else 0.0,
        normalization=sfm.normalization_label(sf) if form.variant == "static" else "V = cosh(sqrt(kappa) r)",
        tag=tag, admissible=admissible,
    )


def restrict(geom: SurfaceGeometry, field: Polynomial) -> ScalarField:
    return ScalarField(field.value(geom.mesh.vertices), field.label, field)


def default_equality_coefficients(sf: SpaceForm) -> List[np.ndarray]:
    """Every basis element plus one mixed combination."""
    sets = [np.eye(sf.n + 1)[i] for i in range(sf.n + 1)]
    mixed = np.zeros(sf.n + 1)
    mixed[0], mixed[2 if sf.n >= 2 else 1] = 3.0, 2.0
    sets.append(mixed)
    return sets


def equality_case_suite(geom: SurfaceGeometry, sf: SpaceForm,
                        coefficients: Optional[Sequence[Sequence[float]]] = None,
                        form: Optional[InequalityForm] = None) -> List[DeficitReport]:
    form = form or InequalityForm("static")
    if form.variant != "static":
        raise UsageError("equality cases are stated for the static form")
    if form.k_or_kappa is not None and resolve_k(sf, form.k_or_kappa) != sf.k:
        raise UsageError("equality cases need k equal to the model curvature")
    coefficients = default_equality_coefficients(sf) if coefficients is None else coefficients
    reports = []
    for a in coefficients:
        eta = restrict(geom, basis_combination(sf, a))
        reports.append(evaluate_deficit(geom, sf, form, eta, tag="equality-expected"))
    return reports


def random_fields(sf: SpaceForm, degree: int, count: int, seed: int, scale: float = 1.0) -> List[Polynomial]:
    """Seed-ordered random polynomials in the ambient coordinates."""
    rng = np.random.default_rng(seed)
    exps = monomial_exponents(sf.dim, degree)
    fields = []
    for i in range(count):
        coeffs = scale * rng.standard_normal(len(exps))
        fields.append(Polynomial(exps, coeffs, f"poly:{degree}:seed={seed}:#{i}"))
    return fields


def ensemble_sweep(geom: SurfaceGeometry, sf: SpaceForm, form: InequalityForm,
                   degree: int = DEFAULT_POLY_DEGREE, count: int = DEFAULT_SWEEP_COUNT,
                   seed: int = DEFAULT_SEED, tol_factor: float = SWEEP_TOL_FACTOR,
                   scale: float = 1.0, workers: int = EXECUTOR_MAX_WORKERS
                   ) -> Tuple[EnsembleSummary, List[DeficitReport]]:
    """
    Test nonnegativity on random polynomial fields. Field i is flagged when
    deficit_i < -tol_factor * h * lhs_scale_i, lhs_scale_i = |lap_term| + |ii_term|.
    """
    if count <= 0:
        raise UsageError("ensemble count must be positive")
    H = geom.H
    if np.any(H <= 0):
        i = int(np.argmin(H))
        raise HypothesisViolation(f"mean curvature H = {H[i]:.6g} <= 0 at vertex {i}", vertex=i)

    fields = random_fields(sf, degree, count, seed, scale)
    evaluate = lambda f: evaluate_deficit(geom, sf, form, restrict(geom, f), seed=seed)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        reports = list(pool.map(evaluate, fields))

    h = geom.mesh.scale.h
    deficits = np.array([r.deficit for r in reports])
    lhs_scales = np.array([abs(r.terms.lap_term) + abs(r.terms.ii_term) for r in reports])
    tols = tol_factor * h * lhs_scales
    flagged = [int(i) for i in np.flatnonzero(deficits < -tols)]
    relative = np.divide(deficits, lhs_scales, out=np.zeros_like(deficits), where=lhs_scales > 0)
    fraction_positive = float(np.mean(deficits > 0))
    summary = EnsembleSummary(
        count=count, seed=seed, degree=degree, level=geom.mesh.level, h=h,
        tol_factor=tol_factor, max_tol=float(tols.max()),
        min_deficit=float(deficits.min()), median_deficit=float(np.median(deficits)),
        min_relative_deficit=float(relative.min()), fraction_positive=fraction_positive,
        flagged=flagged, passed=not flagged and fraction_positive >= 0.95,
    )
    if DEBUG_PRINT_SWEEP:
        print(f"[Sweep] {count} fields deg<={degree} seed={seed}: min={summary.min_deficit:.4g} "
              f"median={summary.median_deficit:.4g} positive={fraction_positive:.1%} flagged={len(flagged)}")
    return summary, reports


def thm4_cross_check(geom: SurfaceGeometry, sf: SpaceForm, base: Optional[Iterable[float]] = None,
                     fields: Optional[Sequence[Polynomial]] = None,
                     seed: int = CROSS_CHECK_SEED) -> CrossCheckReport:
    """
    On H^n(kappa) the star-shaped comparison form with the same kappa and
    base point is the static form; the lhs and rhs pairs must agree to
    rounding, measured relative to the term magnitudes.
    """
    if sf.kind != Kind.HYPERBOLIC:
        raise UsageError("the comparison cross-check is defined on hyperbolic space only")
    base_t = None if base is None else tuple(float(x) for x in base)
    if fields is None:
        rng = np.random.default_rng(seed)
        cubic = Polynomial(monomial_exponents(sf.dim, 3), rng.standard_normal(len(monomial_exponents(sf.dim, 3))),
                           f"poly:3:seed={seed}")
        fields = [field_from_spec("x1", sf), field_from_spec("t", sf), cubic]

    static = InequalityForm("static", None, base_t)
    comparison = InequalityForm("thm4", sf.kappa, base_t)
    ids, discrepancies = [], []
    for f in fields:
        eta = restrict(geom, f)
        a = evaluate_deficit(geom, sf, static, eta)
        b = evaluate_deficit(geom, sf, comparison, eta)
        denom = max(a.scale, b.scale, np.finfo(float).tiny)
        discrepancies.append(max(abs(a.lhs - b.lhs), abs(a.rhs - b.rhs)) / denom)
        ids.append(f.label)
    return CrossCheckReport(kappa=sf.kappa, h=geom.mesh.scale.h, n_vertices=geom.n_vertices,
                            field_ids=ids, discrepancies=[float(d) for d in discrepancies],
                            max_discrepancy=float(max(discrepancies)))
