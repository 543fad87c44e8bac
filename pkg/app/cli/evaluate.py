from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List

from pydantic import TypeAdapter, ValidationError

from app.cli.common import EXIT_OK, argv_of, input_files, resolve_database
from app.core.errors import ParameterError
from app.core.json_io import read_json, write_json
from app.schemas.fit import SlTarget
from app.services.fitting import evaluate_fit
from app.services.manifest import build_manifest, write_manifest
from app.services.references import holdout_superlattices
from app.services.superlattice import SAMPLING_SETS

logger = logging.getLogger(__name__)

BUILTIN = "builtin"


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("evaluate", parents=parents, help="Score materials against held-out SL gaps")
    parser.add_argument(
        "--holdout",
        default=BUILTIN,
        help="'builtin' (shipped superlattice PL gaps) or a JSON list of {stack, gap}",
    )
    parser.add_argument("--sampling", choices=SAMPLING_SETS, default="gamma", help="k samples for the gap search")
    parser.set_defaults(handler=run)


def load_holdout(source: str) -> List[SlTarget]:
    if source == BUILTIN:
        return holdout_superlattices()
    path = Path(source)
    try:
        payload = read_json(path)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read holdout file {path}: {exc}") from exc
    if isinstance(payload, dict):
        payload = payload.get("holdout", [])
    try:
        return TypeAdapter(List[SlTarget]).validate_python(payload)
    except ValidationError as exc:
        raise ParameterError(f"invalid holdout file {path}: {exc}") from exc


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    holdout = load_holdout(args.holdout)
    oips = {material.name: material.oips for material in database}

    report = evaluate_fit(oips, holdout, database, sampling=args.sampling)
    out = write_json(args.out / "evaluate.json", report)
    if report.mape is not None:
        logger.info("holdout MAPE %.3f%% over %d structures (%s sampling)", report.mape, len(report.rows), args.sampling)
    extra = None if args.holdout == BUILTIN else Path(args.holdout)
    manifest = build_manifest(
        "evaluate",
        argv_of(args),
        inputs=input_files(args, extra),
        outputs=[out],
        config={"holdout": args.holdout, "sampling": args.sampling},
    )
    write_manifest(args.out, manifest)
    return EXIT_OK


__all__ = ["BUILTIN", "register", "load_holdout", "run"]
