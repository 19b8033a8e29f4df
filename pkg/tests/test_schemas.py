import pytest
from pydantic import ValidationError

from staticineq.schemas import ConvergenceTable, MeshScale, RunConfig, RunReport


def test_orders_between_consecutive_levels():
    table = ConvergenceTable.from_series("area", [2, 3, 4], [0.4, 0.2, 0.1], [1.0, 1.0, 1.0],
                                         errors=[4.0, 1.0, 0.25])
    assert [r.order for r in table.rows] == [None, pytest.approx(2.0), pytest.approx(2.0)]
    assert table.orders == [pytest.approx(2.0), pytest.approx(2.0)]


def test_errors_from_target():
    table = ConvergenceTable.from_series("H", [3, 4], [0.1, 0.05], [2.2, 2.05], target=2.0)
    assert table.rows[0].error == pytest.approx(0.2)
    assert table.rows[1].order == pytest.approx(2.0)


def test_no_order_across_skipped_levels():
    table = ConvergenceTable.from_series("area", [2, 4], [0.4, 0.1], [1.0, 1.0], errors=[4.0, 0.25])
    assert table.orders == []


def test_no_order_without_errors():
    table = ConvergenceTable.from_series("volume", [1, 2], [0.5, 0.25], [3.0, 4.0])
    assert all(r.error is None and r.order is None for r in table.rows)


def test_zero_error_has_no_order():
    table = ConvergenceTable.from_series("exact", [1, 2], [0.5, 0.25], [1.0, 1.0], errors=[0.0, 0.0])
    assert table.orders == []


@pytest.mark.parametrize("levels", [[], [3, 2], [2, 2], [-1]])
def test_levels_validated(levels):
    with pytest.raises(ValidationError):
        RunConfig(command="ineq", levels=levels)


def test_random_fields_need_a_seed():
    with pytest.raises(ValidationError):
        RunConfig(command="ineq", field="poly:3")
    assert RunConfig(command="ineq", field="poly:3", seed=1).seed == 1


def test_positive_parameters():
    with pytest.raises(ValidationError):
        RunConfig(command="mesh", kappa=0.0)
    with pytest.raises(ValidationError):
        RunConfig(command="mesh", radius=-1.0)
    with pytest.raises(ValidationError):
        RunConfig(command="frobnicate")


def test_report_json_is_deterministic():
    config = RunConfig(command="mesh", levels=[1, 2])
    a = RunReport(command="mesh", config=config, meshes=[MeshScale(h=0.5, n_vertices=42, n_triangles=80)])
    b = RunReport.model_validate_json(a.model_dump_json())
    assert a.model_dump_json() == b.model_dump_json()
    assert b.status == "ok"


def test_mesh_scale_needs_positive_h():
    with pytest.raises(ValidationError):
        MeshScale(h=0.0, n_vertices=3, n_triangles=1)
