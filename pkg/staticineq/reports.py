"""Persistence of run reports: JSON for the full record, CSV for tables."""
import csv
from pathlib import Path
from typing import Iterable, List, Union

import numpy as np

from staticineq.config import MESH_FLOAT_FORMAT
from staticineq.errors import ReportIOError
from staticineq.schemas import ConvergenceTable, DeficitReport, RunReport

DEFICIT_COLUMNS = ["level", "h", "n_vertices", "field_id", "lhs", "rhs", "deficit", "relative_deficit",
                   "lap_term", "ii_term", "grad_term", "eta_sq_term", "min_H", "admissible"]


def _ensure_dir(path: Path) -> None:
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportIOError(f"cannot create output directory {path}: {e}")


def save_report(report: RunReport, output_dir: Union[str, Path]) -> Path:
    """Write <output_dir>/<command>_report.json. No timestamps, so reruns are byte-identical."""
    output_dir = Path(output_dir)
    _ensure_dir(output_dir)
    path = output_dir / f"{report.command}_report.json"
    try:
        path.write_text(report.model_dump_json(indent=2) + "\n")
    except OSError as e:
        raise ReportIOError(f"cannot write report {path}: {e}")
    print(f"[Report] ✓ saved {path}")
    return path


def _write_rows(path: Path, header: List[str], rows: Iterable[list]) -> Path:
    _ensure_dir(path.parent)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise ReportIOError(f"cannot write table {path}: {e}")
    return path


def _num(x) -> str:
    return "" if x is None else repr(float(x))


def save_tables_csv(tables: List[ConvergenceTable], path: Union[str, Path]) -> Path:
    rows = [[t.quantity, r.level, _num(r.h), _num(r.value), _num(r.error), _num(r.order)]
            for t in tables for r in t.rows]
    return _write_rows(Path(path), ["quantity", "level", "h", "value", "error", "order"], rows)


def save_deficits_csv(reports: List[DeficitReport], path: Union[str, Path]) -> Path:
    rows = []
    for r in reports:
        rows.append([r.level, _num(r.h), r.n_vertices, r.field_id, _num(r.lhs), _num(r.rhs), _num(r.deficit),
                     _num(r.relative_deficit), _num(r.terms.lap_term), _num(r.terms.ii_term),
                     _num(r.terms.grad_term), _num(r.terms.eta_sq_term), _num(r.min_H), r.admissible])
    return _write_rows(Path(path), DEFICIT_COLUMNS, rows)


def save_solution(path: Union[str, Path], vertices: np.ndarray, u: np.ndarray) -> Path:
    """One line per vertex: coordinates then the solution value."""
    path = Path(path)
    _ensure_dir(path.parent)
    try:
        np.savetxt(path, np.column_stack([vertices, u]), fmt=MESH_FLOAT_FORMAT)
    except OSError as e:
        raise ReportIOError(f"cannot write solution {path}: {e}")
    return path
