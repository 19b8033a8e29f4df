"""Shared setup for the sub-commands: model, surfaces and closed-form targets."""
from pathlib import Path
from typing import Optional

import numpy as np

from staticineq.geometry import meshio
from staticineq.geometry.mesh import SurfaceMesh, gen_radial_surface
from staticineq.geometry.profiles import SphereProfile, parse_profile
from staticineq.geometry.spaceform import Kind, SpaceForm
from staticineq.errors import UsageError
from staticineq.schemas import RunConfig


def build_space_form(config: RunConfig) -> SpaceForm:
    base = None if config.base is None else np.asarray(config.base, dtype=float)
    return SpaceForm(Kind.parse(config.kind), config.kappa, 3, base)


def load_surface(config: RunConfig) -> SurfaceMesh:
    mesh = meshio.load(config.mesh_in)
    if not isinstance(mesh, SurfaceMesh):
        raise UsageError(f"{config.mesh_in} holds a volume mesh, a surface is needed")
    return mesh


def surface_for_level(config: RunConfig, sf: SpaceForm, level: int) -> SurfaceMesh:
    return gen_radial_surface(sf, parse_profile(config.profile, sf.n), level)


def sphere_radius(config: RunConfig) -> float:
    profile = parse_profile(config.profile)
    if not isinstance(profile, SphereProfile):
        raise UsageError(f"this quantity needs a geodesic sphere profile, got '{config.profile}'")
    return profile.r0


def intrinsic_radius(sf: SpaceForm, r0: float) -> float:
    """Radius of the round metric induced on the geodesic sphere of radius r0."""
    if sf.is_flat:
        return r0
    s = sf.sqrt_kappa
    return float(np.sinh(s * r0) / s) if sf.kind == Kind.HYPERBOLIC else float(np.sin(s * r0) / s)


def geodesic_sphere_H(sf: SpaceForm, r0: float) -> float:
    """Mean curvature (trace) of the geodesic sphere: (n-1) times the principal curvature."""
    s = sf.sqrt_kappa
    if sf.is_flat:
        return (sf.n - 1) / r0
    if sf.kind == Kind.HYPERBOLIC:
        return (sf.n - 1) * s / np.tanh(s * r0)
    return (sf.n - 1) * s / np.tan(s * r0)


def output_path(config: RunConfig, name: str) -> Path:
    return Path(config.output_dir) / name


def level_tag(level: Optional[int]) -> str:
    return "imported" if level is None else f"L{level}"
