# Command-Line Application
# Entry point for the dsr-consensus command

import argparse
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from src.cli.commands.analyze import cmd_analyze
from src.cli.commands.formation import cmd_formation
from src.cli.commands.reproduce import cmd_reproduce, format_table
from src.cli.commands.simulate import MODES, cmd_simulate
from src.cli.commands.sweep import cmd_sweep
from src.cli.schemas import RunConfig, render
from src.core.config import DEFAULT_CONFIG_PATH, ConfigurationError, Settings, load_settings
from src.models.graph import GraphSpecError, PinningError
from src.models.spectral import EigenSolverError
from src.services.design import SweepError
from src.services.simulation import SimulationError
from src.services.stability import StabilityError
from src.utils.logging import LOGGER_NAME, setup_logger

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_REPRODUCTION = 3


class UsageError(Exception):
    pass


class CliParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors instead of exiting with status 2."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, default=DEFAULT_CONFIG_PATH, help="settings YAML")
    p.add_argument("--log-level", default=None, type=str.upper,
                   choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"])


def _add_run_options(p: argparse.ArgumentParser) -> None:
    _add_common(p)
    p.add_argument("--graph", type=Path, default=None, help="graph file (default: built-in ring)")
    p.add_argument("--gamma", type=float, default=None, help="update gain")
    p.add_argument("--beta", type=float, default=None, help="DSR gain")
    p.add_argument("--dt", type=float, default=None, help="update time in seconds")
    p.add_argument("--step", type=float, default=None, help="source step magnitude")
    p.add_argument("--horizon", type=float, default=None, help="run length in seconds")
    p.add_argument("--tilde-dt", type=float, default=None,
                   help="second-order update time (default dt*dt*beta)")
    p.add_argument("--out", type=Path, default=None, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(
        prog="dsr-consensus",
        description="Delayed self-reinforcement for discrete-time networked consensus",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    _add_run_options(sub.add_parser("analyze", help="gain bounds and spectral radii"))

    p = sub.add_parser("sweep", help="spectral radius over a gain grid")
    p.add_argument("which", choices=["gamma", "beta"])
    p.add_argument("--grid", default=None, help="LO:HI:STEP")
    _add_run_options(p)

    p = sub.add_parser("simulate", help="simulate a step response")
    p.add_argument("--mode", choices=MODES, default="first-order")
    p.add_argument("--force", action="store_true", help="simulate unstable configurations")
    _add_run_options(p)

    _add_run_options(sub.add_parser("formation", help="formation runs with and without DSR"))

    p = sub.add_parser("reproduce", help="verdict table for the built-in ring study")
    _add_common(p)
    p.add_argument("--gamma", type=float, default=None, help="override the update gain")
    p.add_argument("--beta", type=float, default=None, help="override the DSR gain")
    return parser


def config_from_args(args: argparse.Namespace, settings: Settings) -> RunConfig:
    scenario = settings.scenario
    values = {
        "graph_path": args.graph,
        "gamma": args.gamma,
        "beta": args.beta,
        "delta_t": args.dt if args.dt is not None else scenario.delta_t,
        "step_magnitude": args.step if args.step is not None else scenario.step_magnitude,
        "horizon": args.horizon,
        "tilde_delta_t": args.tilde_dt,
        "output_dir": args.out if args.out is not None else settings.resolve(settings.paths.output),
    }
    return RunConfig(**values)


def dispatch(args: argparse.Namespace, settings: Settings) -> int:
    if args.command == "reproduce":
        rows = cmd_reproduce(settings, gamma=args.gamma, beta=args.beta)
        sys.stdout.write(format_table(rows))
        return EXIT_OK if all(r.passed for r in rows) else EXIT_REPRODUCTION

    config = config_from_args(args, settings)
    if args.command == "analyze":
        sys.stdout.write(render(cmd_analyze(config, settings)))
        return EXIT_OK
    if args.command == "sweep":
        sys.stdout.write(render(cmd_sweep(config, settings, args.which, args.grid)))
        return EXIT_OK
    if args.command == "simulate":
        summary = cmd_simulate(config, settings, args.mode, force=args.force)
        sys.stdout.write(render(summary))
        return EXIT_NUMERICAL if summary.divergent else EXIT_OK
    if args.command == "formation":
        sys.stdout.write(render(cmd_formation(config, settings)))
        return EXIT_OK
    raise UsageError(f"unknown command {args.command}")


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one command.

    Returns:
        0 success, 1 usage or parse error, 2 numerical failure,
        3 reproduction FAIL
    """
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write(f"{e}\n")
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    try:
        settings = load_settings(args.config)
    except ConfigurationError as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE

    log = setup_logger(LOGGER_NAME, settings.logging.file,
                       (args.log_level or settings.logging.level).upper())

    try:
        return dispatch(args, settings)
    except (PinningError, EigenSolverError, StabilityError) as e:
        log.error(str(e))
        sys.stderr.write(f"numerical failure: {e}\n")
        return EXIT_NUMERICAL
    except (UsageError, GraphSpecError, SweepError, SimulationError, ValidationError,
            OSError, ValueError) as e:
        log.error(str(e))
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
