"""
Command-line entry point.

Usage:
    python main.py bands --path L-G-X --samples 50
    python main.py props --material AlAs
    python main.py sl-gap -m 9 -n 4
    python main.py fit --smoke --seed 42
    python main.py qw-sweep --x 0.2 0.3 --thickness 3:30
    python main.py evaluate --materials-dir out/materials
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
from pydantic import ValidationError

from app.cli import bands, evaluate, fit, props, qw_sweep, sl_gap
from app.cli.common import EXIT_NUMERICAL, EXIT_USAGE, global_options
from app.core.config import LOG_FORMAT, settings
from app.core.errors import NUMERICAL_ERRORS, USAGE_ERRORS

logger = logging.getLogger("oiptb")

COMMANDS = (bands, props, sl_gap, fit, qw_sweep, evaluate)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oiptb", description="sp3s* tight-binding bands and parameter fitting")
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [global_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv

    logging.basicConfig(level=(args.log_level or settings.log_level).upper(), format=LOG_FORMAT)
    logger.info("%s start", args.command)
    try:
        code = args.handler(args)
    except (*USAGE_ERRORS, ValidationError) as exc:
        logger.error("%s: %s", args.command, exc)
        return EXIT_USAGE
    except NUMERICAL_ERRORS as exc:
        logger.error("%s: numerical failure: %s", args.command, exc)
        return EXIT_NUMERICAL
    logger.info("%s finished", args.command)
    return code


if __name__ == "__main__":
    sys.exit(main())
