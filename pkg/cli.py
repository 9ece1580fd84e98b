# cli.py
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from config.app_config import Settings, get_app_settings
from stokes.cases import case_config, check_sweep, sweep_pressure_drop
from stokes.errors import ConfigurationError, StokesError
from stokes.pipeline import place_poles, solve_domain
from stokes.solution import grid_eval
from utils.artifacts import contour_svg, write_field_csv, write_poles_csv, write_report_json, write_sweep_csv
from utils.data_models import RunConfig
from utils.run_helper import build_report, setup_from_config, solver_options
from utils.validation import run_validation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_TARGET = 4


def load_config(path: Path, args: argparse.Namespace) -> RunConfig:
    """Read a configuration document and apply command-line overrides."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ConfigurationError(f"Cannot read configuration '{path}': {e}") from e
    data = RunConfig.model_validate_json(text).model_dump()
    output = data["output"]
    if getattr(args, "grid", None):
        output["grid"] = tuple(args.grid)
    if getattr(args, "levels", None):
        output["levels"] = list(args.levels)
    if getattr(args, "accuracy_target", None) is not None:
        output["accuracy_target"] = args.accuracy_target
    if getattr(args, "weighting", None):
        data["solver"]["weighting"] = args.weighting
    return RunConfig.model_validate(data)


def _out_dir(args: argparse.Namespace, settings: Settings) -> Path:
    out = Path(args.out_dir) if args.out_dir else settings.OUTPUT_DIR
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(args: argparse.Namespace, settings: Settings) -> int:
    cfg = load_config(args.config, args)
    setup = setup_from_config(cfg)
    options = solver_options(setup, cfg, settings)
    out = _out_dir(args, settings)

    outcome = solve_domain(setup.domain, options)
    report = build_report(setup, outcome, cfg.output.accuracy_target)
    write_report_json(report, out / cfg.output.report_json)
    write_poles_csv(outcome.placement, out / cfg.output.poles_csv)
    if cfg.output.write_grid:
        nx, ny = cfg.output.grid
        grid = grid_eval(outcome.solution, cfg.output.bbox, nx, ny, setup.psi_reference_point)
        write_field_csv(grid, out / cfg.output.field_csv)
        contour_svg(grid, cfg.output.levels, out / cfg.output.contour_svg)

    print(f"{report.case}: {report.accuracy_digits:.2f} digits, {report.n_unknowns} unknowns, "
          f"{report.n_samples} samples, poles {report.pole_counts}")
    if report.pressure_drop is not None:
        print(f"pressure drop: {report.pressure_drop:.10g}")
    for k, eddy in enumerate(report.eddies):
        label = "mouth" if k == 0 else f"eddy {k}"
        print(f"{label:>8}: psi - psi_c = {eddy.psi: .3e} at ({eddy.x:.4f}, {eddy.y:.4f})")
    return EXIT_OK if report.target_met else EXIT_TARGET


def cmd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    cfg = load_config(args.config, args)
    parameter = args.parameter or (cfg.sweep.parameter if cfg.sweep else "lam")
    values = args.values or (cfg.sweep.values if cfg.sweep else None)
    if not values:
        raise ConfigurationError("A sweep needs a list of values (--values or the 'sweep' section)")
    if cfg.case is None:
        raise ConfigurationError("Sweeps run on a named case, not an explicit domain")
    check_sweep(cfg.case, parameter)
    params = {k: v for k, v in cfg.parameters.items() if k != parameter}
    for value in values:
        case_config(cfg.case, {**params, parameter: value})
    out = _out_dir(args, settings)

    rows = sweep_pressure_drop(values, params, cfg.solver.overrides(), workers=settings.SWEEP_WORKERS,
                               settings=settings)
    table = cfg.sweep.table_csv if cfg.sweep else "sweep.csv"
    write_sweep_csv(rows, out / table)
    print(f"{'lam':>6} {'dP solver':>14} {'dP ELT4':>14} {'rel ELT0':>10} {'rel ELT4':>10} {'digits':>7}")
    for row in rows:
        print(f"{row.lam:6.3f} {row.dp_solver:14.8f} {row.dp_elt4:14.8f} "
              f"{row.relative_difference(row.dp_elt0):10.4f} {row.relative_difference(row.dp_elt4):10.4f} "
              f"{row.digits:7.2f}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace, settings: Settings) -> int:
    summary = run_validation(settings, full=args.full)
    out = _out_dir(args, settings)
    (out / "validate.json").write_text(summary.model_dump_json(indent=2))
    width = max(len(c.name) for c in summary.checks)
    for check in summary.checks:
        print(f"{check.name:<{width}}  {check.value:10.3e}  <= {check.threshold:8.1e}  "
              f"{'ok' if check.passed else 'FAIL'}")
    return EXIT_OK if summary.passed else EXIT_TARGET


def cmd_poles(args: argparse.Namespace, settings: Settings) -> int:
    cfg = load_config(args.config, args)
    setup = setup_from_config(cfg)
    options = solver_options(setup, cfg, settings)
    out = _out_dir(args, settings)

    placement = place_poles(setup.domain, options)
    write_poles_csv(placement, out / cfg.output.poles_csv)
    print(f"{setup.name}: {placement.counts()}")
    return EXIT_OK


def _parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(prog="stokes", description="2D Stokes flow by rational approximation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, with_config: bool = True) -> None:
        if with_config:
            p.add_argument("--config", type=Path, required=True, help="JSON configuration document")
        p.add_argument("--out-dir", type=Path, default=None, help="Artifact directory (default STOKES_OUTPUT_DIR)")

    solve = sub.add_parser("solve", help="Solve one configuration and write report, grid, poles and contours")
    common(solve)
    solve.add_argument("--grid", type=int, nargs=2, metavar=("NX", "NY"), help="Field grid resolution")
    solve.add_argument("--levels", type=float, nargs="+", help="Contour levels of psi minus its reference")
    solve.add_argument("--accuracy-target", type=float, default=None, help="Required boundary accuracy in digits")
    solve.add_argument("--weighting", choices=("uniform", "spacing"), default=None, help="Row weighting")

    sweep = sub.add_parser("sweep", help="Pressure drop against the lubrication series over a parameter")
    common(sweep)
    sweep.add_argument("--parameter", default=None, help="Parameter to sweep (default from the document, or lam)")
    sweep.add_argument("--values", type=float, nargs="+", default=None)
    sweep.add_argument("--weighting", choices=("uniform", "spacing"), default=None)

    validate = sub.add_parser("validate", help="Run the acceptance checks")
    common(validate, with_config=False)
    validate.add_argument("--full", action="store_true", help="Add the constricted-channel comparison")

    poles = sub.add_parser("poles", help="Place lightning and AAA poles without solving")
    common(poles)
    poles.add_argument("--weighting", choices=("uniform", "spacing"), default=None)
    return parser.parse_args(argv)


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "validate": cmd_validate, "poles": cmd_poles}


def main(argv: Optional[List[str]] = None) -> int:
    args = _parse_args(argv)
    settings = get_app_settings()
    logging.basicConfig(level=settings.LOG_LEVEL.upper(), format=settings.LOG_FORMAT)
    try:
        return COMMANDS[args.command](args, settings)
    except (ValidationError, ConfigurationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG
    except StokesError as e:
        logger.error(f"Solver failure: {e}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
