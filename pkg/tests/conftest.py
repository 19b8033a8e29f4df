import pytest

from staticineq.discrete.surface_ops import build_geometry
from staticineq.geometry.mesh import gen_radial_surface
from staticineq.geometry.profiles import SphereProfile
from staticineq.geometry.spaceform import Kind, SpaceForm


@pytest.fixture(scope="session")
def euclidean():
    return SpaceForm(Kind.EUCLIDEAN)


@pytest.fixture(scope="session")
def hyperbolic():
    return SpaceForm(Kind.HYPERBOLIC, 1.0)


@pytest.fixture(scope="session")
def spherical():
    return SpaceForm(Kind.SPHERICAL, 1.0)


@pytest.fixture(scope="session")
def unit_sphere_geom(euclidean):
    """Euclidean unit sphere, level 4."""
    return build_geometry(gen_radial_surface(euclidean, SphereProfile(1.0), 4))


@pytest.fixture(scope="session")
def hyperbolic_sphere_geom(hyperbolic):
    """Geodesic sphere r0 = 0.7 in H^3, level 4."""
    return build_geometry(gen_radial_surface(hyperbolic, SphereProfile(0.7), 4))


@pytest.fixture(scope="session")
def spherical_sphere_geom(spherical):
    """Geodesic sphere r0 = 0.5 in the hemisphere, level 4."""
    return build_geometry(gen_radial_surface(spherical, SphereProfile(0.5), 4))
