"""
Main module for the CLI application.
You can start the application by using the main function.
"""

import sys

sys.path.append(".")

import argparse
import logging
from pathlib import Path
from typing import Dict, List, Optional

from src.apps.cli.result_renderer import ResultRenderer
from src.apps.cli.string_consts import EXIT_CODES
from src.core.config_parser.data import ScenarioConfig
from src.core.config_parser.parsers import load_config
from src.core.execution.manager import VerificationManager
from src.core.execution.scenario import FinanceManager
from src.core.execution.writers import render_finance, render_report, render_simulation, write_files
from src.core.utils.errors import ConfigError

logger = logging.getLogger(__name__)

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


class Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        super(Parser, self).__init__(*args, **kwargs)
        self.add_argument("--config", type=str, required=True, help="Path to the scenario config")
        self.add_argument("--seed", type=int, help="Overrides rng.seed")
        self.add_argument("--paths", type=int, help="Overrides rng.n_paths")
        self.add_argument("--out", type=str, help="Output directory (default run.outputs)")
        self.add_argument("--filter", type=str, default="", help="Only run checks whose name contains this")
        self.add_argument("--log-level", type=str, default="WARNING", choices=LOG_LEVELS)


def _overrides(args: argparse.Namespace) -> Dict[str, int]:
    overrides = {}
    if args.seed is not None:
        overrides["rng.seed"] = args.seed
    if args.paths is not None:
        overrides["rng.n_paths"] = args.paths
    return overrides


def run_verify(config: ScenarioConfig, out_dir: Path, pattern: str) -> int:
    report = VerificationManager(config).run(pattern)
    write_files(render_report(report), out_dir)
    ResultRenderer().render_report(report)
    return EXIT_CODES.SUCCESS if report.passed else EXIT_CODES.CHECK_FAILURE


def run_finance(config: ScenarioConfig, out_dir: Path) -> int:
    outcome = FinanceManager(config).run_finance()
    write_files(render_finance(outcome), out_dir)
    ResultRenderer().render_summary("Finance summary", outcome.summary)
    return EXIT_CODES.SUCCESS


def run_simulate(config: ScenarioConfig, out_dir: Path) -> int:
    outcome = FinanceManager(config).run_simulate()
    write_files(render_simulation(outcome), out_dir)
    ResultRenderer().render_summary("Simulation summary", outcome.summary)
    return EXIT_CODES.SUCCESS


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parses the command line arguments, loads the config and runs its mode.
    :param argv: Command line arguments.
    :return: The exit code.
    """
    args = Parser().parse_args(argv)
    logging.basicConfig(level=args.log_level, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(Path(args.config), _overrides(args))
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CODES.CONFIG_ERROR

    out_dir = Path(args.out if args.out is not None else config.run.outputs)
    mode = config.run.mode
    logger.info("running %s mode, seed %d", mode, config.rng.seed)

    try:
        if mode == "verify":
            return run_verify(config, out_dir, args.filter)
        if mode == "simulate":
            return run_simulate(config, out_dir)
        return run_finance(config, out_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CODES.CONFIG_ERROR
    except Exception as e:
        logger.exception("run failed")
        print(f"runtime error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CODES.RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
