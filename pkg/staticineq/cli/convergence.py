"""Refinement studies: one quantity over the configured levels against a closed-form target."""
from typing import Callable, Dict, List, Tuple

import numpy as np

from staticineq.cli.context import (
    build_space_form,
    geodesic_sphere_H,
    intrinsic_radius,
    sphere_radius,
    surface_for_level,
)
from staticineq.discrete.surface_ops import build_geometry, cotangent_mean_curvature, laplace_beltrami
from staticineq.discrete.volume_fem import assemble, solve_extension, verify_reilly
from staticineq.errors import UsageError
from staticineq.geometry.mesh import gen_ball_volume
from staticineq.geometry.spaceform import Kind, SpaceForm
from staticineq.inequality.fields import extension_oracle, field_from_spec
from staticineq.inequality.functional import InequalityForm, evaluate_deficit, restrict
from staticineq.schemas import ConvergenceTable, RunConfig

# (h, value, error) per level
Series = List[Tuple[float, float, float]]

STRICT_UNIT_SPHERE_TARGET = 64.0 * np.pi / 15.0


def _weighted_rms(weights: np.ndarray, values: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * values ** 2) / np.sum(weights)))


def mean_curvature(config: RunConfig) -> Tuple[Series, float]:
    """
    Area-weighted mean of the cotangent H on a geodesic sphere. The error is the
    area-weighted RMS of the relative deviation from the exact value.
    """
    sf = build_space_form(config)
    target = geodesic_sphere_H(sf, sphere_radius(config))
    series = []
    for level in config.levels:
        geom = build_geometry(surface_for_level(config, sf, level))
        H = cotangent_mean_curvature(geom)
        mean = float(np.sum(geom.vertex_areas * H) / geom.area)
        series.append((geom.mesh.scale.h, mean, _weighted_rms(geom.vertex_areas, H - target) / target))
    return series, target


def laplacian(config: RunConfig) -> Tuple[Series, float]:
    """Lap_S x1 = -2 x1 / R^2 on a geodesic sphere of intrinsic radius R about the chart centre."""
    if config.base is not None:
        raise UsageError("the laplacian study uses the chart centre as base point")
    sf = build_space_form(config)
    R = intrinsic_radius(sf, sphere_radius(config))
    x1 = field_from_spec("x1", sf)
    series = []
    for level in config.levels:
        geom = build_geometry(surface_for_level(config, sf, level))
        values = x1.value(geom.mesh.vertices)
        exact = -2.0 * values / R ** 2
        err = laplace_beltrami(geom, values).values - exact
        rel = _weighted_rms(geom.vertex_areas, err) / _weighted_rms(geom.vertex_areas, exact)
        series.append((geom.mesh.scale.h, rel, rel))
    return series, 0.0


def area(config: RunConfig) -> Tuple[Series, float]:
    sf = build_space_form(config)
    target = 4.0 * np.pi * intrinsic_radius(sf, sphere_radius(config)) ** 2
    series = []
    for level in config.levels:
        geom = build_geometry(surface_for_level(config, sf, level))
        series.append((geom.mesh.scale.h, geom.area, abs(geom.area - target) / target))
    return series, target


def ball_volume(config: RunConfig) -> Tuple[Series, float]:
    target = 4.0 / 3.0 * np.pi * config.radius ** 3
    series = []
    for level in config.levels:
        vol = gen_ball_volume(config.radius, level)
        total = float(vol.tet_volumes.sum())
        series.append((vol.scale.h, total, abs(total - target) / target))
    return series, target


def _deficit_series(config: RunConfig, default_field: str) -> Tuple[Series, List]:
    sf = build_space_form(config)
    form = InequalityForm("static", config.k, None if config.base is None else tuple(config.base))
    field = field_from_spec(config.field or default_field, sf, config.seed)
    reports = []
    for level in config.levels:
        geom = build_geometry(surface_for_level(config, sf, level))
        reports.append(evaluate_deficit(geom, sf, form, restrict(geom, field),
                                        config.allow_inadmissible, config.seed))
    return [(r.h, r.deficit, r.relative_deficit) for r in reports], reports


def equality_deficit(config: RunConfig) -> Tuple[Series, float]:
    """Restriction of a static potential: the relative deficit is the discretization error."""
    series, _ = _deficit_series(config, "x1")
    return series, 0.0


def strict_deficit(config: RunConfig) -> Tuple[Series, float]:
    target = config.target
    if target is None:
        sf = build_space_form(config)
        if sf.kind != Kind.EUCLIDEAN or sphere_radius(config) != 1.0 or (config.field or "x1sq") != "x1sq":
            raise UsageError("strict_deficit needs --target unless it runs x1sq on the Euclidean unit sphere")
        target = STRICT_UNIT_SPHERE_TARGET
    series, _ = _deficit_series(config, "x1sq")
    return [(h, d, abs(d - target) / abs(target)) for h, d, _ in series], target


def reilly_residual(config: RunConfig) -> Tuple[Series, float]:
    sf = SpaceForm(Kind.EUCLIDEAN)
    f = field_from_spec(config.f or "x1", sf)
    V = field_from_spec(config.V or "one", sf)
    series = []
    for level in config.levels:
        r = verify_reilly(gen_ball_volume(config.radius, level), f, V, config.K)
        series.append((r.h, r.residual, abs(r.residual)))
    return series, 0.0


def extension_error(config: RunConfig) -> Tuple[Series, float]:
    """Mass-weighted RMS error of the P1 extension against the exact one."""
    sf = SpaceForm(Kind.EUCLIDEAN)
    k = 0.0 if config.k is None else config.k
    spec = config.eta or "x1sq"
    oracle = extension_oracle(spec, sf, k, config.radius)
    if oracle is None:
        raise UsageError(f"no exact extension known for '{spec}' with k = {k:g}")
    eta_field = field_from_spec(spec, sf, config.seed)
    series = []
    for level in config.levels:
        vol = gen_ball_volume(config.radius, level)
        sys = assemble(vol)
        ext = solve_extension(sys, sf, k, eta_field.value(vol.surface.vertices))
        rms = _weighted_rms(sys.mass, ext.u - oracle.value(vol.vertices))
        series.append((vol.scale.h, rms, rms))
    return series, 0.0


QUANTITIES: Dict[str, Callable[[RunConfig], Tuple[Series, float]]] = {
    "mean_curvature": mean_curvature,
    "laplacian": laplacian,
    "area": area,
    "ball_volume": ball_volume,
    "equality_deficit": equality_deficit,
    "strict_deficit": strict_deficit,
    "reilly_residual": reilly_residual,
    "extension_error": extension_error,
}


def run_quantity(config: RunConfig) -> ConvergenceTable:
    runner = QUANTITIES.get(config.quantity)
    if runner is None:
        raise UsageError(f"unknown quantity '{config.quantity}', choose from {', '.join(QUANTITIES)}")
    series, target = runner(config)
    hs, values, errors = zip(*series)
    return ConvergenceTable.from_series(config.quantity, config.levels, hs, values,
                                        errors=list(errors), target=target)
