import numpy as np
import pytest

from staticineq.discrete import surface_ops as ops
from staticineq.errors import MeshQualityError, UnsupportedError, UsageError
from staticineq.geometry.mesh import SurfaceMesh, gen_radial_surface
from staticineq.geometry.profiles import EllipsoidProfile, SphereProfile
from staticineq.inequality.fields import field_from_spec


def weighted_rms(w, v):
    return float(np.sqrt(np.sum(w * v ** 2) / np.sum(w)))


def test_heron_area_is_stable_for_slivers():
    lengths = np.array([[1.0, 1.0, 1.0], [3.0, 4.0, 5.0], [1.0, 0.5 + 1e-9, 0.5]])
    areas = ops.heron_area(lengths)
    assert areas[0] == pytest.approx(np.sqrt(3) / 4)
    assert areas[1] == pytest.approx(6.0)
    assert 0.0 <= areas[2] < 1e-4


def test_degenerate_triangle_rejected():
    lengths = np.array([[1.0, 0.5, 0.5]])
    with pytest.raises(MeshQualityError):
        ops.cotangents(lengths, ops.heron_area(lengths))


def test_stiffness_is_symmetric_with_zero_row_sums(unit_sphere_geom):
    L = unit_sphere_geom.stiffness
    assert abs(L - L.T).max() < 1e-12
    assert np.max(np.abs(L @ np.ones(L.shape[0]))) < 1e-10


def test_area_converges(euclidean):
    errors = []
    for level in (2, 3, 4):
        geom = ops.build_geometry(gen_radial_surface(euclidean, SphereProfile(1.0), level))
        errors.append(abs(geom.area - 4 * np.pi) / (4 * np.pi))
    assert errors[0] > errors[1] > errors[2]
    assert errors[2] < 1e-2
    assert np.log2(errors[1] / errors[2]) > 1.5


def test_unit_sphere_mean_curvature(unit_sphere_geom):
    assert unit_sphere_geom.curvature_source == "profile"
    assert np.max(np.abs(unit_sphere_geom.H - 2.0)) < 0.015 * 2.0
    # II is the identity in any orthonormal basis
    assert np.allclose(unit_sphere_geom.II, np.eye(2)[None], atol=1e-5)
    assert np.allclose(unit_sphere_geom.normals, unit_sphere_geom.mesh.vertices, atol=1e-8)


def test_hyperbolic_sphere_mean_curvature(hyperbolic_sphere_geom):
    target = 2.0 / np.tanh(0.7)
    assert np.max(np.abs(hyperbolic_sphere_geom.H - target)) < 0.02 * target


def test_spherical_sphere_mean_curvature(spherical_sphere_geom):
    target = 2.0 / np.tan(0.5)
    assert np.max(np.abs(spherical_sphere_geom.H - target)) < 0.02 * target


def test_tangent_basis_is_orthonormal_and_normal_to_nu(hyperbolic_sphere_geom):
    g = hyperbolic_sphere_geom.space_form.metric_diag
    B = hyperbolic_sphere_geom.tangent_basis
    nu = hyperbolic_sphere_geom.normals
    gram = np.einsum("ndi,ndj->nij", B * g[None, :, None], B)
    assert np.allclose(gram, np.eye(2)[None], atol=1e-10)
    assert np.allclose(np.einsum("nd,ndi->ni", nu * g, B), 0.0, atol=1e-10)
    assert np.allclose(np.sum(nu * g * nu, axis=1), 1.0)


def test_ellipsoid_curvature_at_poles(euclidean):
    a, c = 1.0, 0.8
    geom = ops.build_geometry(gen_radial_surface(euclidean, EllipsoidProfile((a, a, c)), 3))
    top = int(np.argmax(geom.mesh.vertices[:, 2]))
    # principal curvatures c / a^2 at the poles of the oblate spheroid
    assert geom.H[top] == pytest.approx(2 * c / a ** 2, rel=1e-5)


def test_cotangent_mean_curvature(unit_sphere_geom, hyperbolic_sphere_geom):
    for geom, target in ((unit_sphere_geom, 2.0), (hyperbolic_sphere_geom, 2.0 / np.tanh(0.7))):
        H = ops.cotangent_mean_curvature(geom)
        assert weighted_rms(geom.vertex_areas, H - target) < 0.03 * target


def test_cotangent_mean_curvature_refines(euclidean):
    errors = []
    for level in (2, 3):
        geom = ops.build_geometry(gen_radial_surface(euclidean, SphereProfile(1.0), level))
        errors.append(weighted_rms(geom.vertex_areas, ops.cotangent_mean_curvature(geom) - 2.0))
    assert errors[1] < errors[0]


def test_laplacian_of_coordinate_on_unit_sphere(unit_sphere_geom):
    x1 = unit_sphere_geom.mesh.vertices[:, 0]
    lap = ops.laplace_beltrami(unit_sphere_geom, x1).values
    exact = -2.0 * x1
    w = unit_sphere_geom.vertex_areas
    assert weighted_rms(w, lap - exact) < 0.02 * weighted_rms(w, exact)


def test_laplacian_of_degree_two_harmonic(unit_sphere_geom):
    X = unit_sphere_geom.mesh.vertices
    f = X[:, 0] * X[:, 1]
    lap = ops.laplace_beltrami(unit_sphere_geom, f).values
    exact = -6.0 * f
    w = unit_sphere_geom.vertex_areas
    assert weighted_rms(w, lap - exact) < 0.03 * weighted_rms(w, exact)


def test_laplacian_of_coordinate_on_hyperbolic_sphere(hyperbolic_sphere_geom):
    R = np.sinh(0.7)
    x1 = hyperbolic_sphere_geom.mesh.vertices[:, 1]
    lap = ops.laplace_beltrami(hyperbolic_sphere_geom, x1).values
    exact = -2.0 * x1 / R ** 2
    w = hyperbolic_sphere_geom.vertex_areas
    assert weighted_rms(w, lap - exact) < 0.02 * weighted_rms(w, exact)


def test_constants_are_harmonic(unit_sphere_geom):
    lap = ops.laplace_beltrami(unit_sphere_geom, np.full(unit_sphere_geom.n_vertices, 3.0)).values
    assert np.max(np.abs(lap)) < 1e-9


def test_dirichlet_energy_consistency(unit_sphere_geom):
    rng = np.random.default_rng(0)
    eta = rng.standard_normal(unit_sphere_geom.n_vertices)
    energy = float(eta @ (unit_sphere_geom.stiffness @ eta))
    lumped = float(np.sum(unit_sphere_geom.vertex_areas * ops.tangential_gradient_sq(unit_sphere_geom, eta)))
    assert lumped == pytest.approx(energy, rel=1e-8)


def test_galerkin_identity(hyperbolic_sphere_geom):
    rng = np.random.default_rng(1)
    eta, xi = rng.standard_normal((2, hyperbolic_sphere_geom.n_vertices))
    product = ops.galerkin_product(hyperbolic_sphere_geom, eta, xi)
    assert product == pytest.approx(float(eta @ (hyperbolic_sphere_geom.stiffness @ xi)), rel=1e-8)


def test_vertex_gradient_of_coordinate(unit_sphere_geom):
    X = unit_sphere_geom.mesh.vertices
    w = ops.vertex_gradients(unit_sphere_geom, X[:, 0])
    exact_sq = 1.0 - X[:, 0] ** 2
    assert weighted_rms(unit_sphere_geom.vertex_areas, np.sum(w * w, axis=1) - exact_sq) < 0.02
    quad = ops.ii_quadratic_form(unit_sphere_geom, X[:, 0])
    assert np.allclose(quad, np.sum(w * w, axis=1), atol=1e-4)


def test_ii_of_height_gradient_on_ellipsoid(euclidean):
    axes = np.array([1.0, 1.0, 0.8])
    geom = ops.build_geometry(gen_radial_surface(euclidean, EllipsoidProfile(tuple(axes)), 4))
    X = geom.mesh.vertices
    grad_F = X / axes ** 2
    norm = np.linalg.norm(grad_F, axis=1)
    nu = grad_F / norm[:, None]
    v = np.array([0.0, 0.0, 1.0]) - nu * nu[:, 2:3]
    exact = np.sum(v * v / axes ** 2, axis=1) / norm
    quad = ops.ii_quadratic_form(geom, X[:, 2])
    w = geom.vertex_areas
    assert weighted_rms(w, quad - exact) < 0.05 * weighted_rms(w, exact)


def test_normal_derivative_of_potential(spherical_sphere_geom):
    # V = cos r, dV/dnu = -sin r on the geodesic sphere r = 0.5
    assert np.allclose(ops.normal_derivative_V(spherical_sphere_geom), -np.sin(0.5), atol=1e-8)


def test_laplacian_splitting_of_x1sq(unit_sphere_geom, euclidean):
    field = field_from_spec("x1sq", euclidean)
    residual = ops.laplacian_splitting_residual(unit_sphere_geom, field)
    assert weighted_rms(unit_sphere_geom.vertex_areas, residual) < 0.25


def test_laplacian_splitting_is_euclidean_only(hyperbolic_sphere_geom, hyperbolic):
    with pytest.raises(UnsupportedError):
        ops.laplacian_splitting_residual(hyperbolic_sphere_geom, field_from_spec("x1", hyperbolic))


def test_quadric_fallback_on_imported_mesh(euclidean):
    mesh = gen_radial_surface(euclidean, SphereProfile(1.0), 4)
    geom = ops.build_geometry(SurfaceMesh(euclidean, mesh.vertices, mesh.triangles))
    assert geom.curvature_source == "quadric"
    assert np.max(np.abs(geom.H - 2.0)) < 0.05 * 2.0


def test_curved_mesh_without_profile_is_unsupported(hyperbolic):
    mesh = gen_radial_surface(hyperbolic, SphereProfile(0.7), 1)
    with pytest.raises(UnsupportedError):
        ops.build_geometry(SurfaceMesh(hyperbolic, mesh.vertices, mesh.triangles))


def test_field_size_checked(unit_sphere_geom):
    with pytest.raises(UsageError):
        ops.laplace_beltrami(unit_sphere_geom, np.zeros(5))


def test_scalar_field_helpers():
    f = ops.ScalarField(np.array([1.0, 2.0]), "f")
    assert np.array_equal(f.scaled(2.0).values, [2.0, 4.0])
    assert np.array_equal(f.shifted(1.0).values, [2.0, 3.0])
