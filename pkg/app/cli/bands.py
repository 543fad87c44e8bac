from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.cli.common import EXIT_OK, argv_of, input_files, pick_material, resolve_database
from app.core.json_io import write_csv
from app.schemas.kpoint import KPath
from app.services.kpath import band_structure
from app.services.manifest import build_manifest, write_manifest

logger = logging.getLogger(__name__)

N_BANDS = 10
HEADER = ["k_index", "k_frac", "kx", "ky", "kz", *[f"e{i}" for i in range(1, N_BANDS + 1)]]


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("bands", parents=parents, help="Bulk band structure along a k-path (CSV)")
    parser.add_argument("--material", default=None, help="Material name (default: first --material-file, else GaAs)")
    parser.add_argument("--path", default="L-G-X", help="High-symmetry path, e.g. L-G-X")
    parser.add_argument("--samples", type=int, default=50, help="Points per segment, ends included (>= 2)")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    material = pick_material(args, database)
    path = KPath.parse(args.path, args.samples)

    rows = []
    for sample, energies in band_structure(material.oips, material.lattice_constant, path):
        k = sample.k
        rows.append([sample.index, sample.k_frac, k.kx, k.ky, k.kz, *(float(e) for e in energies)])

    out: Path = args.out / f"bands_{material.name}.csv"
    write_csv(out, HEADER, rows)
    logger.info("wrote %d k points for %s to %s", len(rows), material.name, out)
    manifest = build_manifest(
        "bands",
        argv_of(args),
        inputs=input_files(args),
        outputs=[out],
        config={"material": material.name, "path": path.labels, "samples": path.samples_per_segment},
    )
    write_manifest(args.out, manifest)
    return EXIT_OK


__all__ = ["HEADER", "register", "run"]
