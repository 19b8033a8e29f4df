import numpy as np
import pytest

from staticineq.cli.context import geodesic_sphere_H, intrinsic_radius
from staticineq.cli.convergence import STRICT_UNIT_SPHERE_TARGET, run_quantity
from staticineq.errors import UsageError
from staticineq.schemas import RunConfig


def config(**kw):
    return RunConfig(command="converge", **kw)


def test_closed_form_targets(hyperbolic, spherical, euclidean):
    assert geodesic_sphere_H(hyperbolic, 0.7) == pytest.approx(2 / np.tanh(0.7))
    assert geodesic_sphere_H(spherical, 0.5) == pytest.approx(2 / np.tan(0.5))
    assert geodesic_sphere_H(euclidean, 2.0) == pytest.approx(1.0)
    assert intrinsic_radius(hyperbolic, 0.7) == pytest.approx(np.sinh(0.7))
    assert intrinsic_radius(spherical, 0.5) == pytest.approx(np.sin(0.5))


def test_mean_curvature_study():
    table = run_quantity(config(quantity="mean_curvature", kind="hyperbolic", profile="sphere:0.7", levels=[2, 3]))
    assert table.target == pytest.approx(2 / np.tanh(0.7))
    assert table.rows[1].error < table.rows[0].error
    assert table.rows[1].error < 0.1
    assert table.rows[1].value == pytest.approx(table.target, rel=0.1)


def test_ball_volume_study():
    table = run_quantity(config(quantity="ball_volume", levels=[1, 2, 3]))
    assert table.target == pytest.approx(4 * np.pi / 3)
    assert len(table.orders) == 2
    assert table.orders[-1] > 1.5


def test_laplacian_study_refuses_off_centre_base():
    with pytest.raises(UsageError):
        run_quantity(config(quantity="laplacian", base=[0.1, 0.0, 0.0], levels=[2]))


def test_strict_deficit_target():
    table = run_quantity(config(quantity="strict_deficit", levels=[3]))
    assert table.target == STRICT_UNIT_SPHERE_TARGET
    with pytest.raises(UsageError):
        run_quantity(config(quantity="strict_deficit", profile="sphere:2.0", levels=[3]))
    table = run_quantity(config(quantity="strict_deficit", profile="sphere:2.0", target=1.0, levels=[2]))
    assert table.target == 1.0


def test_extension_error_needs_an_oracle():
    with pytest.raises(UsageError):
        run_quantity(config(quantity="extension_error", eta="x1", k=-1.0, levels=[1]))


def test_unknown_quantity():
    with pytest.raises(UsageError):
        run_quantity(config(quantity="torsion", levels=[1]))
