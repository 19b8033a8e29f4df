import csv

import numpy as np
import pytest

from staticineq.errors import ReportIOError
from staticineq.reports import DEFICIT_COLUMNS, save_deficits_csv, save_report, save_solution, save_tables_csv
from staticineq.schemas import ConvergenceTable, DeficitReport, DeficitTerms, RunConfig, RunReport


def make_deficit(level):
    terms = DeficitTerms(lap_term=2.0, ii_term=1.5, grad_term=0.0, eta_sq_term=0.0)
    return DeficitReport(variant="static", k=0.0, kappa=0.0, h=0.1, n_vertices=642, lhs=2.0, rhs=1.5,
                         deficit=0.5, terms=terms, min_H=2.0, field_id="x1", level=level)


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_report_is_written_and_rewritten_identically(tmp_path):
    report = RunReport(command="ineq", config=RunConfig(command="ineq"), deficits=[make_deficit(3)])
    path = save_report(report, tmp_path / "out")
    first = path.read_bytes()
    save_report(report, tmp_path / "out")
    assert path.name == "ineq_report.json"
    assert path.read_bytes() == first


def test_deficit_table(tmp_path):
    path = save_deficits_csv([make_deficit(3), make_deficit(4)], tmp_path / "t.csv")
    rows = read_rows(path)
    assert rows[0] == DEFICIT_COLUMNS
    assert len(rows) == 3
    assert rows[1][0] == "3" and float(rows[1][6]) == 0.5


def test_convergence_table(tmp_path):
    table = ConvergenceTable.from_series("area", [2, 3], [0.2, 0.1], [12.0, 12.4], errors=[0.04, 0.01])
    rows = read_rows(save_tables_csv([table], tmp_path / "c.csv"))
    assert rows[0] == ["quantity", "level", "h", "value", "error", "order"]
    assert rows[1][5] == ""
    assert float(rows[2][5]) == pytest.approx(2.0)


def test_solution_file(tmp_path):
    X = np.eye(3)
    u = np.array([1.0, 2.0, 3.0])
    data = np.loadtxt(save_solution(tmp_path / "u.txt", X, u))
    assert np.array_equal(data[:, :3], X)
    assert np.array_equal(data[:, 3], u)


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    report = RunReport(command="mesh", config=RunConfig(command="mesh"))
    with pytest.raises(ReportIOError):
        save_report(report, blocker / "sub")
