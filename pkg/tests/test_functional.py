import dataclasses

import numpy as np
import pytest

from staticineq.discrete.surface_ops import build_geometry
from staticineq.errors import DomainError, HypothesisViolation, UsageError
from staticineq.geometry.mesh import gen_radial_surface
from staticineq.geometry.profiles import EllipsoidProfile, PerturbedProfile, SphereProfile
from staticineq.geometry.spaceform import Kind, SpaceForm
from staticineq.inequality.fields import field_from_spec
from staticineq.inequality.functional import (
    InequalityForm,
    ensemble_sweep,
    equality_case_suite,
    evaluate_deficit,
    random_fields,
    resolve_k,
    restrict,
    thm4_cross_check,
)
from tests.quadrature import sphere_integral

STRICT_TARGET = 64 * np.pi / 15


def deficit_of(geom, spec, form=None, seed=None):
    sf = geom.space_form
    return evaluate_deficit(geom, sf, form or InequalityForm("static"), restrict(geom, field_from_spec(spec, sf, seed)))


def test_strict_target_by_quadrature():
    # eta = x1^2 on the unit sphere: Lap_S eta = 2 - 6 x1^2, |grad_S eta|^2 = 4 x1^2 (1 - x1^2), H = 2, II = g
    def integrand(X):
        x1 = X[:, 0]
        return (2 - 6 * x1 ** 2) ** 2 / 2 - 4 * x1 ** 2 * (1 - x1 ** 2)

    assert sphere_integral(lambda X: np.ones(len(X))) == pytest.approx(4 * np.pi, rel=1e-12)
    assert sphere_integral(lambda X: X[:, 0] ** 2) == pytest.approx(4 * np.pi / 3, rel=1e-12)
    assert sphere_integral(integrand) == pytest.approx(STRICT_TARGET, rel=1e-12)


def test_resolve_k(euclidean, hyperbolic, spherical):
    assert resolve_k(hyperbolic, None) == -1.0
    assert resolve_k(hyperbolic, -2.0) == -2.0
    assert resolve_k(euclidean, -1.0) == -1.0
    assert resolve_k(spherical, 1.0) == 1.0
    assert resolve_k(spherical, -0.5) == -0.5
    for sf, k in [(hyperbolic, -0.5), (euclidean, 0.5), (spherical, 0.5)]:
        with pytest.raises(UsageError):
            resolve_k(sf, k)


def test_euclidean_equality_case_terms(unit_sphere_geom):
    r = deficit_of(unit_sphere_geom, "x1")
    # lap and ii terms both approximate 8 pi / 3, dV/dnu = 0
    assert r.terms.lap_term == pytest.approx(8 * np.pi / 3, rel=0.05)
    assert r.terms.ii_term == pytest.approx(8 * np.pi / 3, rel=0.03)
    assert r.terms.grad_term == 0.0 and r.terms.eta_sq_term == 0.0
    assert r.relative_deficit < 0.03
    assert r.normalization == "V = 1"
    assert r.admissible


def test_equality_suite_on_hyperbolic_sphere(hyperbolic_sphere_geom, hyperbolic):
    reports = equality_case_suite(hyperbolic_sphere_geom, hyperbolic)
    assert len(reports) == hyperbolic.n + 2
    assert all(r.tag == "equality-expected" for r in reports)
    assert max(r.relative_deficit for r in reports) < 0.03


def test_spherical_constant_restriction_is_exact(spherical_sphere_geom):
    # x0 is constant on a geodesic sphere about the centre; only the curvature terms survive
    r = deficit_of(spherical_sphere_geom, "x0")
    assert r.terms.lap_term > 0
    assert r.relative_deficit < 1e-6


def test_strict_deficit_is_positive(unit_sphere_geom):
    r = deficit_of(unit_sphere_geom, "x1sq")
    assert r.deficit == pytest.approx(STRICT_TARGET, rel=0.06)
    assert r.rhs == 0.0


def test_deficit_is_linear_scale_invariant(hyperbolic_sphere_geom, hyperbolic):
    eta = restrict(hyperbolic_sphere_geom, field_from_spec("poly:2", hyperbolic, seed=3))
    form = InequalityForm("static")
    a = evaluate_deficit(hyperbolic_sphere_geom, hyperbolic, form, eta)
    b = evaluate_deficit(hyperbolic_sphere_geom, hyperbolic, form, eta.scaled(3.0))
    assert b.deficit == pytest.approx(9.0 * a.deficit, rel=1e-10)


def test_euclidean_deficit_ignores_constants(unit_sphere_geom, euclidean):
    eta = restrict(unit_sphere_geom, field_from_spec("poly:3", euclidean, seed=3))
    form = InequalityForm("static")
    a = evaluate_deficit(unit_sphere_geom, euclidean, form, eta)
    b = evaluate_deficit(unit_sphere_geom, euclidean, form, eta.shifted(2.5))
    assert b.deficit == pytest.approx(a.deficit, rel=1e-10)


def test_curvature_must_match_the_mesh(hyperbolic_sphere_geom, hyperbolic):
    eta = restrict(hyperbolic_sphere_geom, field_from_spec("x1", hyperbolic))
    with pytest.raises(DomainError):
        evaluate_deficit(hyperbolic_sphere_geom, SpaceForm(Kind.HYPERBOLIC, 2.0), InequalityForm("static"), eta)
    with pytest.raises(DomainError):
        evaluate_deficit(hyperbolic_sphere_geom, SpaceForm(Kind.SPHERICAL, 1.0), InequalityForm("static"), eta)


def test_potential_normalization_is_checked(hyperbolic_sphere_geom, hyperbolic):
    eta = restrict(hyperbolic_sphere_geom, field_from_spec("x1", hyperbolic))
    # (1.5, 0, 0, 0) is off the hyperboloid, so <x, p>_L no longer gives cosh r
    form = InequalityForm("static", base_point=(1.5, 0.0, 0.0, 0.0))
    with pytest.raises(DomainError):
        evaluate_deficit(hyperbolic_sphere_geom, hyperbolic, form, eta)


def test_non_mean_convex_surface_is_refused(unit_sphere_geom, euclidean):
    H = unit_sphere_geom.H.copy()
    H[17] = -0.1
    bad = dataclasses.replace(unit_sphere_geom, H=H)
    eta = restrict(bad, field_from_spec("x1", euclidean))
    with pytest.raises(HypothesisViolation) as info:
        evaluate_deficit(bad, euclidean, InequalityForm("static"), eta)
    assert info.value.vertex == 17
    assert info.value.exit_code == 3

    r = evaluate_deficit(bad, euclidean, InequalityForm("static"), eta, allow_inadmissible=True)
    assert not r.admissible and r.min_H_vertex == 17


def test_field_size_mismatch(unit_sphere_geom, euclidean):
    with pytest.raises(UsageError):
        evaluate_deficit(unit_sphere_geom, euclidean, InequalityForm("static"), np.zeros(3))


def test_general_k_on_hyperbolic_space(hyperbolic_sphere_geom, hyperbolic):
    r = deficit_of(hyperbolic_sphere_geom, "x2", InequalityForm("static", -2.0))
    assert r.k == -2.0
    assert r.deficit > 0


def test_thm4_needs_positive_kappa(unit_sphere_geom):
    with pytest.raises(UsageError):
        deficit_of(unit_sphere_geom, "x1", InequalityForm("thm4", 0.0))


def test_thm4_on_euclidean_ellipsoid(euclidean):
    geom = build_geometry(gen_radial_surface(euclidean, EllipsoidProfile((1.0, 1.0, 0.8)), 3))
    r = deficit_of(geom, "x1", InequalityForm("thm4", 1.0))
    assert np.isfinite([r.lhs, r.rhs, r.deficit]).all()
    assert r.variant == "thm4" and r.kappa == 1.0 and r.k == -1.0
    assert r.terms.grad_term > 0


def test_thm4_coincides_with_static_on_hyperbolic_space(hyperbolic):
    geom = build_geometry(gen_radial_surface(hyperbolic, SphereProfile(0.7), 3))
    check = thm4_cross_check(geom, hyperbolic)
    assert check.field_ids[:2] == ["x1", "t"]
    assert check.max_discrepancy <= 1e-12


def test_cross_check_is_hyperbolic_only(unit_sphere_geom, euclidean):
    with pytest.raises(UsageError):
        thm4_cross_check(unit_sphere_geom, euclidean)


def test_random_fields_are_seed_ordered(euclidean):
    a = random_fields(euclidean, 3, 5, seed=42)
    b = random_fields(euclidean, 3, 5, seed=42)
    assert [f.label for f in a] == [f.label for f in b]
    assert all(np.array_equal(x.coeffs, y.coeffs) for x, y in zip(a, b))


def test_ensemble_sweep_is_deterministic(hyperbolic, hyperbolic_sphere_geom):
    form = InequalityForm("static")
    s1, r1 = ensemble_sweep(hyperbolic_sphere_geom, hyperbolic, form, degree=2, count=20, seed=42, workers=3)
    s2, _ = ensemble_sweep(hyperbolic_sphere_geom, hyperbolic, form, degree=2, count=20, seed=42, workers=1)
    assert s1.model_dump() == s2.model_dump()
    assert len(r1) == 20
    assert not s1.flagged


def test_ensemble_needs_positive_count(hyperbolic, hyperbolic_sphere_geom):
    with pytest.raises(UsageError):
        ensemble_sweep(hyperbolic_sphere_geom, hyperbolic, InequalityForm("static"), count=0)


# --- Refinement checks at the finest level ---

EQUALITY_CASES = [
    (SpaceForm(Kind.EUCLIDEAN), 1.0, "x1"),
    (SpaceForm(Kind.HYPERBOLIC, 1.0), 0.7, "x1"),
    (SpaceForm(Kind.SPHERICAL, 1.0), 0.5, "x1"),
]


@pytest.mark.slow
@pytest.mark.parametrize("sf, r0, spec", EQUALITY_CASES, ids=lambda v: getattr(v, "describe", lambda: str(v))())
def test_equality_case_converges(sf, r0, spec):
    rel = []
    for level in (3, 4, 5):
        geom = build_geometry(gen_radial_surface(sf, SphereProfile(r0), level))
        rel.append(deficit_of(geom, spec).relative_deficit)
    assert rel[0] > rel[1] > rel[2]
    assert np.log2(rel[1] / rel[2]) >= 1.0
    assert rel[2] <= 1e-2


@pytest.mark.slow
def test_strict_deficit_at_level_5(euclidean):
    geom = build_geometry(gen_radial_surface(euclidean, SphereProfile(1.0), 5))
    assert deficit_of(geom, "x1sq").deficit == pytest.approx(STRICT_TARGET, rel=1e-2)


SWEEP_SURFACES = [
    (SpaceForm(Kind.EUCLIDEAN), SphereProfile(1.0)),
    (SpaceForm(Kind.EUCLIDEAN), EllipsoidProfile((1.0, 1.0, 0.8))),
    (SpaceForm(Kind.EUCLIDEAN), PerturbedProfile(1.0, 0.1, 1)),
    (SpaceForm(Kind.HYPERBOLIC, 1.0), SphereProfile(0.7)),
]


@pytest.mark.slow
@pytest.mark.parametrize("sf, profile", SWEEP_SURFACES, ids=lambda v: getattr(v, "spec", None) or v.describe())
def test_nonnegativity_sweep(sf, profile):
    geom = build_geometry(gen_radial_surface(sf, profile, 4))
    assert np.all(geom.H > 0)
    summary, _ = ensemble_sweep(geom, sf, InequalityForm("static"), degree=3, count=200, seed=42)
    assert summary.min_deficit >= -summary.max_tol
    assert not summary.flagged
    assert summary.fraction_positive >= 0.95
