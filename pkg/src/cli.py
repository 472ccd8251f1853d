"""
Командная строка: fit, verify, invert, bounds, simulate.

Коды выхода: 0 успех, 1 ошибка использования или входных данных, 2 численный сбой (--strict).
"""

import argparse
import asyncio
import logging
import sys
from typing import Callable, Optional, Sequence

import numpy as np

from src.core.config import get_config
from src.core.constants import EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, LOG_DATE_FORMAT, LOG_FORMAT
from src.domain import DomainException, FitMethod, NumericalFailure, OutputFormat, UsageError
from src.factories import HandlerFactory, OptionsFactory

logger = logging.getLogger(__name__)


class ArgumentParser(argparse.ArgumentParser):
    """argparse, который бросает UsageError вместо выхода из процесса."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _list_of(cast: Callable, name: str) -> Callable[[str], tuple]:
    def parse(raw: str) -> tuple:
        items = []
        for token in raw.split(","):
            token = token.strip()
            try:
                items.append(cast(token))
            except ValueError:
                raise argparse.ArgumentTypeError(f"invalid {name} {token!r}")
        if not items:
            raise argparse.ArgumentTypeError(f"empty {name} list")
        return tuple(items)

    return parse


def _positive_float(raw: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid number {raw!r}")
    if not (value > 0.0 and np.isfinite(value)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {raw!r}")
    return value


def _positive_int(raw: str) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer {raw!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {raw!r}")
    return value


def _add_solver_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("solver")
    group.add_argument("--tol", type=_positive_float, help="characterization tolerance (default 1e-7)")
    group.add_argument("--max-iter", dest="max_iter", type=_positive_int, help="outer iterations cap")
    group.add_argument("--max-inner-iter", dest="max_inner_iter", type=_positive_int, help="EM iterations cap")
    group.add_argument("--prune-weight", dest="prune_weight", type=_positive_float)
    group.add_argument("--grid-density", dest="grid_density", type=_positive_int, help="candidates per data gap")
    group.add_argument("--search-factor", dest="search_factor", type=_positive_float, help="ceiling / X_(n)")


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    sim = get_config().simulation
    parser.add_argument("--grid-lower", dest="grid_lower", type=_positive_float, default=sim.error_grid[0])
    parser.add_argument("--grid-upper", dest="grid_upper", type=_positive_float, default=sim.error_grid[1])
    parser.add_argument("--grid-points", dest="grid_points", type=_positive_int, default=sim.error_grid_points)


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="kmono", description="k-monotone density estimation")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=ArgumentParser)

    fit = commands.add_parser("fit", help="fit the MLE or LSE to a sample")
    fit.add_argument("--method", choices=[FitMethod.MLE.value, FitMethod.LSE.value], required=True)
    fit.add_argument("--k", type=_positive_int, required=True)
    fit.add_argument("--input", required=True, help="sample CSV")
    fit.add_argument("--out", required=True, help="fit-file JSON")
    fit.add_argument("--strict", action="store_true", help="exit 2 when the solver does not converge")
    _add_solver_flags(fit)

    verify = commands.add_parser("verify", help="check the optimality characterization of a fit")
    verify.add_argument("--fit", required=True)
    verify.add_argument("--input", required=True)
    verify.add_argument("--grid", type=_positive_int, default=2048)
    verify.add_argument("--out", help="report JSON")
    verify.add_argument("--strict", action="store_true", help="exit 2 when the characterization is violated")
    _add_solver_flags(verify)

    invert = commands.add_parser("invert", help="mixing distribution of a fit")
    invert.add_argument("--fit", required=True)
    invert.add_argument("--t", type=_list_of(_positive_float, "point"))
    invert.add_argument("--curves", help="CSV of t, g_fit, g0, F_fit, F0")
    invert.add_argument("--truth", help="exp1 or a fit-file of the true mixture")
    _add_grid_flags(invert)

    bounds = commands.add_parser("bounds", help="local minimax lower bounds")
    bounds.add_argument("--k", type=_positive_int, required=True)
    bounds.add_argument("--x0", type=_positive_float, required=True)
    bounds.add_argument("--g0", type=_positive_float, required=True, help="g0(x0)")
    bounds.add_argument("--gk", type=float, required=True, help="g0^(k)(x0)")
    bounds.add_argument("--j", type=_list_of(int, "derivative index"))
    bounds.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.TEXT.value)
    bounds.add_argument("--out", help="CSV table")

    simulate = commands.add_parser("simulate", help="consistency study")
    simulate.add_argument("--dist", default="exp1", help="exp1 or a fit-file")
    simulate.add_argument("--k", type=_list_of(int, "order"), required=True)
    simulate.add_argument("--n", type=_list_of(int, "sample size"), required=True)
    simulate.add_argument("--reps", type=_positive_int, default=get_config().simulation.replications)
    simulate.add_argument("--seed", type=int, help="master seed (fallback KMONO_SEED)")
    simulate.add_argument("--out", default=get_config().files.output_dir)
    simulate.add_argument("--jobs", type=_positive_int, help="worker processes (fallback KMONO_JOBS)")
    simulate.add_argument("--strict", action="store_true", help="exit 2 when any fit fails or does not converge")
    _add_grid_flags(simulate)
    _add_solver_flags(simulate)
    return parser


def setup_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, get_config().log_level, logging.INFO)
    logging.basicConfig(format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT, level=level)


def _dispatch(args: argparse.Namespace) -> str:
    config = get_config()
    options = OptionsFactory.from_args(args, config)
    handlers = HandlerFactory.create_all(options)

    if args.command == "fit":
        return handlers.estimation.fit_command(args)
    if args.command == "verify":
        return handlers.estimation.verify_command(args)
    if args.command == "invert":
        return handlers.inversion.invert_command(args)
    if args.command == "bounds":
        if args.k < 2:
            raise UsageError("bounds needs --k >= 2")
        return handlers.bounds.bounds_command(args)
    if args.command == "simulate":
        if args.seed is None:
            args.seed = config.seed
        if args.jobs is None:
            args.jobs = config.jobs
        return asyncio.run(handlers.simulation.simulate_command(args, options))
    raise UsageError(f"unknown command {args.command!r}")


def run(argv: Optional[Sequence[str]] = None) -> int:
    """Разбирает аргументы, выполняет команду и возвращает код выхода."""
    try:
        get_config()
    except ValueError as e:
        # KMONO_* с нечисловым значением
        logger.error(f"❌ Bad environment: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        print(e.message, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    setup_logging(args.verbose)

    try:
        output = _dispatch(args)
    except NumericalFailure as e:
        logger.error(f"❌ {e.message}")
        return EXIT_NUMERICAL
    except DomainException as e:
        logger.error(f"❌ [{e.code}] {e.message}")
        print(f"error: {e.message}", file=sys.stderr)
        return EXIT_USAGE
    except (ArithmeticError, np.linalg.LinAlgError) as e:
        logger.error("Numerical failure while running the command", exc_info=e)
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"❌ Cannot write output: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE

    if output:
        print(output)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
