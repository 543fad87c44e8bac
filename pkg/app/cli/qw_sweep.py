from __future__ import annotations

import argparse
import logging

from app.cli.common import (
    EXIT_OK,
    argv_of,
    input_files,
    positive_int,
    resolve_database,
    resolve_threads,
    thickness_range,
)
from app.core.json_io import write_csv
from app.services.alloy_qw import check_sweep_trends, cutoff_sweep
from app.services.manifest import build_manifest, write_manifest

logger = logging.getLogger(__name__)

HEADER = ["thickness_ml", "x", "gap_ev", "cutoff_um"]


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("qw-sweep", parents=parents, help="Quantum-well cutoff wavelength sweep (CSV)")
    parser.add_argument("--x", type=float, nargs="+", required=True, help="Barrier Al fractions")
    parser.add_argument("--thickness", type=thickness_range, required=True, help="Well thicknesses, e.g. 3:30")
    parser.add_argument("--barrier-thickness", type=positive_int, default=20, help="Barrier monolayers")
    parser.add_argument("--well", default="GaAs")
    parser.add_argument("--alloying", default="AlAs", help="Second endpoint of the barrier alloy")
    parser.add_argument("--check-barrier", action="store_true", help="Verify barrier convergence per cell")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    rows = cutoff_sweep(
        args.thickness,
        args.x,
        well=database.get(args.well),
        alloying=database.get(args.alloying),
        barrier_thickness=args.barrier_thickness,
        check_barrier=args.check_barrier,
        workers=resolve_threads(args),
    )
    for problem in check_sweep_trends(rows):
        logger.warning("trend check: %s", problem)

    out = write_csv(
        args.out / "qw_sweep.csv",
        HEADER,
        ([row.thickness_ml, row.x, row.gap_ev, row.cutoff_um] for row in rows),
    )
    manifest = build_manifest(
        "qw-sweep",
        argv_of(args),
        inputs=input_files(args),
        outputs=[out],
        config={
            "x": args.x,
            "thickness": args.thickness,
            "barrier_thickness": args.barrier_thickness,
            "well": args.well,
            "alloying": args.alloying,
        },
    )
    write_manifest(args.out, manifest)
    return EXIT_OK


__all__ = ["HEADER", "register", "run"]
