# This file is part of irsma.
#
# SPDX-License-Identifier: BSD-3-Clause

"""
Command-line interface: python3 -m irsma <command> [options]

Exit code 0 on success, 1 for an invalid configuration, 2 for any other
failure (including a failed analysis check).
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from irsma.analysis import run_checks
from irsma.config import ConfigError, ScenarioConfig, load_config
from irsma.harness import (InvalidScenarioError, OutputError, emit_csv, emit_manifest,
                           run_single_ma_study, run_sweep)

logger = logging.getLogger(__name__)

SWEEP_COMMANDS = {
    "sweep-distance": "d_bi",
    "sweep-antennas": "n_antennas",
    "sweep-irs": "m_elements",
    "sweep-paths": "n_paths",
}


def parse_values(text: str, variable: str) -> list:
    """Parse a comma-separated list of sweep values.
    """
    try:
        if variable == "d_bi":
            values = [float(s) for s in text.split(",") if s.strip()]
        else:
            values = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise InvalidScenarioError(f'Bad value list "{text}" for {variable}')
    if not values:
        raise InvalidScenarioError(f"Empty value list for {variable}")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irsma",
        description="IRS-assisted MISO link with movable transmit antennas: "
                    "Monte-Carlo sweeps and analysis checks")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario configuration file")
    common.add_argument("--debug", action="store_true", help="log solver iterations")

    run = argparse.ArgumentParser(add_help=False, parents=[common])
    run.add_argument("--out", default=".", help="output directory (default: current)")
    run.add_argument("--trials", type=int, help="Monte-Carlo trials per sweep value")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--workers", type=int, default=1, help="worker processes (default: 1)")
    run.add_argument("--values", help="comma-separated sweep values")

    sub = parser.add_subparsers(dest="command", required=True)
    for command, variable in SWEEP_COMMANDS.items():
        sub.add_parser(command, parents=[run], help=f"SNR of all schemes versus {variable}")
    single = sub.add_parser("single-ma", parents=[run],
                            help="LoS study: 1 and 4 MAs versus fixed antennas over d_bi")
    single.add_argument("--irs-side", type=int, default=25,
                        help="IRS elements per side (default: 25)")
    sub.add_parser("check-analysis", parents=[common],
                   help="evaluate the analytical predictions numerically")
    return parser


def _load(args) -> ScenarioConfig:
    config = load_config(args.config) if args.config else ScenarioConfig()
    overrides = {}
    if getattr(args, "trials", None) is not None:
        overrides["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    return config.with_changes(**overrides) if overrides else config


def _run(args) -> int:
    config = _load(args)
    if args.command == "check-analysis":
        results = run_checks(config.wavelength, config.region())
        for r in results:
            print(r)
        return 0 if all(r.passed for r in results) else 2

    if args.command == "single-ma":
        values = parse_values(args.values, "d_bi") if args.values else None
        result = run_single_ma_study(config, values, args.workers, irs_side=args.irs_side)
        name = "single_ma"
    else:
        variable = SWEEP_COMMANDS[args.command]
        values = parse_values(args.values, variable) if args.values else None
        result = run_sweep(config, variable, values, args.workers)
        name = result.sweeps[0]

    try:
        os.makedirs(args.out, exist_ok=True)
    except OSError as error:
        raise OutputError(args.out, error) from error
    emit_csv(result, os.path.join(args.out, f"{name}.csv"))
    emit_manifest(config, result, os.path.join(args.out, f"{name}.manifest.json"))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.debug else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except ConfigError as error:
        logger.error("%s", error)
        return 1
    except Exception as error:
        logger.error("%s: %s", type(error).__name__, error)
        if args.debug:
            logger.exception("traceback")
        return 2


if __name__ == "__main__":
    sys.exit(main())
