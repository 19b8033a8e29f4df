"""
Sub-command implementations. Each takes a validated RunConfig, does the work
level by level, and returns a RunReport. Persistence happens in main.
"""
from pathlib import Path
from typing import Dict, List

import numpy as np

from staticineq.cli.context import build_space_form, level_tag, load_surface, output_path, surface_for_level
from staticineq.cli.convergence import run_quantity
from staticineq.config import DEFAULT_SWEEP_COUNT
from staticineq.discrete.surface_ops import build_geometry
from staticineq.discrete.volume_fem import assemble, proof_decomposition, solve_extension, verify_reilly
from staticineq.errors import UsageError
from staticineq.geometry import meshio
from staticineq.geometry.mesh import gen_ball_volume
from staticineq.geometry.spaceform import SpaceForm
from staticineq.inequality.fields import extension_oracle, field_from_spec, poly_degree
from staticineq.inequality.functional import (
    InequalityForm,
    ensemble_sweep,
    equality_case_suite,
    evaluate_deficit,
    restrict,
    thm4_cross_check,
)
from staticineq.reports import save_solution
from staticineq.schemas import ConvergenceTable, DeficitReport, ExtensionReport, RunConfig, RunReport


def _mesh_path(config: RunConfig, level: int, stem: str) -> Path:
    if config.mesh_out is None:
        return output_path(config, f"{stem}_L{level}.mesh")
    path = Path(config.mesh_out)
    if len(config.levels) > 1:
        path = path.with_name(f"{path.stem}_L{level}{path.suffix}")
    return path


def cmd_mesh(config: RunConfig) -> RunReport:
    report = RunReport(command="mesh", config=config)
    sf = build_space_form(config)
    for level in config.levels:
        if config.volume:
            mesh = gen_ball_volume(config.radius, level)
            path = _mesh_path(config, level, "ball")
        else:
            mesh = surface_for_level(config, sf, level)
            path = _mesh_path(config, level, "surface")
        meshio.save(mesh, path)
        report.meshes.append(mesh.scale)
        print(f"[CLI] ✅ {level_tag(level)}: {mesh.scale.n_vertices} vertices, h={mesh.scale.h:.6g} -> {path}")
    return report


def _form(config: RunConfig) -> InequalityForm:
    base = None if config.base is None else tuple(config.base)
    if config.variant == "thm4":
        return InequalityForm("thm4", config.kappa, base)
    return InequalityForm("static", config.k, base)


def _deficit_tables(reports: List[DeficitReport], target) -> List[ConvergenceTable]:
    by_field: Dict[str, List[DeficitReport]] = {}
    for r in reports:
        if r.level is not None:
            by_field.setdefault(r.field_id, []).append(r)
    tables = []
    for field_id, rows in by_field.items():
        if target is not None:
            errors = [abs(r.deficit - target) for r in rows]
        else:
            errors = [r.relative_deficit for r in rows]
        tables.append(ConvergenceTable.from_series(
            f"deficit[{field_id}]", [r.level for r in rows], [r.h for r in rows],
            [r.deficit for r in rows], errors=errors, target=target))
    return tables


def cmd_ineq(config: RunConfig) -> RunReport:
    report = RunReport(command="ineq", config=config)
    sf = build_space_form(config)
    form = _form(config)
    meshes = [load_surface(config)] if config.mesh_in else [surface_for_level(config, sf, L) for L in config.levels]
    if config.mesh_in:
        sf = meshes[0].space_form

    for mesh in meshes:
        geom = build_geometry(mesh)
        report.meshes.append(mesh.scale)
        tag = level_tag(mesh.level)
        if config.suite == "equality":
            for r in equality_case_suite(geom, sf, form=form):
                report.deficits.append(r)
            worst = max(r.relative_deficit for r in report.deficits[-(sf.n + 2):])
            print(f"[CLI] {tag}: equality suite, worst relative deficit {worst:.3e}")
        elif config.cross_check:
            check = thm4_cross_check(geom, sf, config.base)
            report.cross_checks.append(check)
            print(f"[CLI] {tag}: max discrepancy {check.max_discrepancy:.3e}")
        elif config.field and config.field.startswith("poly:"):
            degree = poly_degree(config.field)
            summary, _ = ensemble_sweep(geom, sf, form, degree=degree,
                                        count=config.count or DEFAULT_SWEEP_COUNT, seed=config.seed,
                                        tol_factor=config.sweep_tol)
            report.ensembles.append(summary)
            mark = "✅" if summary.passed else "❌"
            print(f"[CLI] {mark} {tag}: min deficit {summary.min_deficit:.4e}, "
                  f"{summary.fraction_positive:.1%} positive, {len(summary.flagged)} flagged")
        else:
            field = field_from_spec(config.field or "x1", sf, config.seed)
            r = evaluate_deficit(geom, sf, form, restrict(geom, field), config.allow_inadmissible, config.seed)
            report.deficits.append(r)
            print(f"[CLI] {tag}: lhs={r.lhs:.6g} rhs={r.rhs:.6g} deficit={r.deficit:.6g} "
                  f"(relative {r.relative_deficit:.3e})")

    report.tables = _deficit_tables(report.deficits, config.target)
    if report.ensembles and not all(s.passed for s in report.ensembles):
        report.messages.append("nonnegativity sweep flagged fields below the discretization band")
    return report


def cmd_reilly(config: RunConfig) -> RunReport:
    report = RunReport(command="reilly", config=config)
    sf = SpaceForm("euclidean")
    f = field_from_spec(config.f or "x1", sf)
    V = field_from_spec(config.V or "one", sf)
    for level in config.levels:
        vol = gen_ball_volume(config.radius, level)
        r = verify_reilly(vol, f, V, config.K)
        report.reilly.append(r)
        report.meshes.append(vol.scale)
        print(f"[CLI] L{level}: lhs={r.terms.lhs_vol:.6g} rhs={r.rhs:.6g} residual={r.residual:.3e}")
    report.tables.append(ConvergenceTable.from_series(
        "reilly_residual", config.levels, [r.h for r in report.reilly], [r.residual for r in report.reilly],
        errors=[abs(r.residual) for r in report.reilly]))
    return report


def cmd_pde(config: RunConfig) -> RunReport:
    report = RunReport(command="pde", config=config)
    sf = SpaceForm("euclidean")
    k = 0.0 if config.k is None else config.k
    spec = config.eta or "x1"
    eta_field = field_from_spec(spec, sf, config.seed)
    oracle = extension_oracle(spec, sf, k, config.radius)
    errors = []
    for level in config.levels:
        vol = gen_ball_volume(config.radius, level)
        sys = assemble(vol)
        eta = eta_field.value(vol.surface.vertices)
        ext = solve_extension(sys, sf, k, eta)
        path = save_solution(output_path(config, f"u_L{level}.txt"), vol.vertices, ext.u)

        rms = max_err = None
        if oracle is not None:
            e = ext.u - oracle.value(vol.vertices)
            rms = float(np.sqrt(np.sum(sys.mass * e ** 2) / np.sum(sys.mass)))
            max_err = float(np.max(np.abs(e)))
            errors.append(rms)
        report.extensions.append(ExtensionReport(
            eta_id=spec, k=k, level=level, h=vol.scale.h, n_dof=len(sys.interior), iterations=ext.iterations,
            rms_error=rms, max_error=max_err, max_principle_violation=ext.max_principle_violation,
            warnings=ext.warnings, solution_file=path.name))
        report.meshes.append(vol.scale)
        print(f"[CLI] L{level}: {ext.iterations} CG iterations"
              + ("" if rms is None else f", RMS error {rms:.3e}"))

        if config.decompose:
            d = proof_decomposition(vol, sf, k, eta, label=spec, sys=sys, extension=ext)
            report.decompositions.append(d)
            print(f"[CLI] L{level}: deficit={d.deficit:.6g} discards={d.discards:.6g} closure={d.closure:.3e}")

    if oracle is not None:
        report.tables.append(ConvergenceTable.from_series(
            "extension_error", config.levels, [r.h for r in report.extensions], errors, errors=errors))
    return report


def cmd_converge(config: RunConfig) -> RunReport:
    if not config.quantity:
        raise UsageError("converge needs --quantity")
    report = RunReport(command="converge", config=config)
    table = run_quantity(config)
    report.tables.append(table)
    for row in table.rows:
        order = "" if row.order is None else f", order {row.order:.2f}"
        print(f"[CLI] L{row.level}: h={row.h:.4g} value={row.value:.8g} error={row.error:.3e}{order}")
    return report


COMMANDS = {
    "mesh": cmd_mesh,
    "ineq": cmd_ineq,
    "reilly": cmd_reilly,
    "pde": cmd_pde,
    "converge": cmd_converge,
}
