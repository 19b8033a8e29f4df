"""
Command-line entry point: python -m staticineq.main <command> [options]

Exit codes: 0 success, 2 configuration or domain error, 3 hypothesis
violation (H <= 0), 4 file I/O error.
"""
import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from staticineq.cli.commands import COMMANDS
from staticineq.cli.convergence import QUANTITIES
from staticineq.config import OUTPUT_DIR, SWEEP_TOL_FACTOR
from staticineq.errors import StaticIneqError
from staticineq.reports import save_deficits_csv, save_report, save_tables_csv
from staticineq.schemas import RunConfig, RunReport


def parse_levels(text: str) -> List[int]:
    """'3', '2,3,4' or '3..5'."""
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            return list(range(int(lo), int(hi) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad level list '{text}'")


def parse_floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad coordinate list '{text}'")


def _add_model(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", default="euclidean", help="euclidean | hyperbolic | spherical")
    p.add_argument("--kappa", type=float, default=1.0, help="curvature magnitude of the model")
    p.add_argument("--base", type=parse_floats, help="base point, comma separated embedding coordinates")
    p.add_argument("--profile", default="sphere:1.0", help="sphere:r0 | ellipsoid:a,b,c | perturbed:r0,amp,axis")


def _add_levels(p: argparse.ArgumentParser) -> None:
    group = p.add_mutually_exclusive_group()
    group.add_argument("--levels", type=parse_levels, help="subdivision levels, e.g. 2,3,4 or 3..5")
    group.add_argument("--level", type=int, help="single subdivision level")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="staticineq",
                                     description="Numerical verifier for the boundary inequality of static manifolds")
    parser.add_argument("--output-dir", default=str(OUTPUT_DIR), help="directory for reports (STATICINEQ_OUTPUT_DIR)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="generate a surface or ball volume mesh")
    _add_model(p)
    _add_levels(p)
    p.add_argument("--volume", action="store_true", help="tetrahedral Euclidean ball instead of a surface")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("-o", "--out", dest="mesh_out")

    p = sub.add_parser("ineq", help="evaluate the boundary inequality")
    _add_model(p)
    _add_levels(p)
    p.add_argument("--field", help="x1 | t | basis:a0,a1,... | poly:DEG | x1sq | ...")
    p.add_argument("--seed", type=int)
    p.add_argument("--count", type=int)
    p.add_argument("--variant", choices=["static", "thm4"], default="static")
    p.add_argument("--k", type=float, help="curvature bound (defaults to the model curvature)")
    p.add_argument("--suite", choices=["equality"])
    p.add_argument("--cross-check", action="store_true", help="compare the two forms on hyperbolic space")
    p.add_argument("--allow-inadmissible", action="store_true", help="report instead of failing when H <= 0")
    p.add_argument("--mesh", dest="mesh_in", help="evaluate on an imported Euclidean surface mesh")
    p.add_argument("--target", type=float, help="closed-form deficit for the error column")
    p.add_argument("--sweep-tol", type=float, default=SWEEP_TOL_FACTOR)

    p = sub.add_parser("reilly", help="check the weighted Reilly identity on the unit ball")
    _add_levels(p)
    p.add_argument("--f", default="x1")
    p.add_argument("--V", default="one")
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=1.0)

    p = sub.add_parser("pde", help="solve the Dirichlet extension on the ball")
    _add_levels(p)
    p.add_argument("--eta", default="x1")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--seed", type=int)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--decompose", action="store_true", help="report the terms the proof discards")

    p = sub.add_parser("converge", help="refinement study of one quantity")
    _add_model(p)
    _add_levels(p)
    p.add_argument("--quantity", required=True, choices=sorted(QUANTITIES))
    p.add_argument("--field")
    p.add_argument("--eta")
    p.add_argument("--f")
    p.add_argument("--V")
    p.add_argument("--K", type=float, default=0.0)
    p.add_argument("--k", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--target", type=float)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    level = values.pop("level", None)
    if level is not None:
        values["levels"] = [level]
    return RunConfig(**values)


def persist(report: RunReport) -> None:
    out = report.config.output_dir
    save_report(report, out)
    if report.deficits:
        save_deficits_csv(report.deficits, f"{out}/{report.command}_table.csv")
    elif report.tables:
        save_tables_csv(report.tables, f"{out}/{report.command}_table.csv")


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        report = COMMANDS[config.command](config)
        persist(report)
    except ValidationError as e:
        print(f"❌ invalid configuration: {e}", file=sys.stderr)
        return 2
    except StaticIneqError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"❌ I/O error: {e}", file=sys.stderr)
        return 4

    for table in report.tables:
        orders = ", ".join(f"{o:.2f}" for o in table.orders) or "n/a"
        print(f"✅ {table.quantity}: empirical orders {orders}")
    for msg in report.messages:
        print(f"⚠️ {msg}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
