#!/usr/bin/env python3
"""
tickvol command line
- simulate: synthetic quote/trade files plus a manifest
- estimate: per-window and per-day T_Price, T_Volume, gamma and sigma_I
- invariant: gamma invariant report with normality tests
- fillsim: passive fill measurements and the correction curve
- forecast-eval: sigma_I vs realized vs GARCH, plus the normalized-return grid
"""

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file (specify absolute path)
env_path = Path(__file__).parent / ".env"
load_dotenv(dotenv_path=env_path)

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.errors import TickVolError
from src.pipeline import PipelineRunner, RunConfig
from src.utils.log import configure_logging

logger = logging.getLogger("tickvol")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tickvol", description="Tick-data volatility and market invariant toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="Output directory (overrides the config)")
    common.add_argument("--seed", type=int, help="Master seed (unsigned 64-bit)")
    common.add_argument("--format", choices=("csv", "json"), help="Table output format")
    common.add_argument("--window", type=float, help="Aggregation window in seconds")

    sub = parser.add_subparsers(dest="command", required=True)
    simulate = sub.add_parser("simulate", parents=[common], help="Generate a synthetic market")
    simulate.add_argument("--equilibrium", action="store_true", help="Calibrate the trade rate so that gamma = 1")
    for name, text in (("estimate", "Per-window estimates"), ("invariant", "Invariant report"),
                       ("fillsim", "Passive fill simulation"), ("forecast-eval", "Volatility forecast evaluation")):
        sub.add_parser(name, parents=[common], help=text)
    return parser


def load_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.load(args.config).with_overrides(
        out=args.out, seed=args.seed, fmt=args.format, window=args.window
    )
    if getattr(args, "equilibrium", False):
        config = replace(config, simulate_options=replace(config.simulate_options, equilibrium=True))
    return config


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    try:
        config = load_config(args)
        runner = PipelineRunner(config)
        outputs = getattr(runner, args.command.replace("-", "_"))()
    except TickVolError as e:
        logger.error(f"[ERROR] {args.command}: {e}")
        return 1
    for path in outputs:
        logger.info(f"[OK] {path}")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except Exception as e:
        logger.error(f"Fatal error: {e}", exc_info=True)
        sys.exit(1)
