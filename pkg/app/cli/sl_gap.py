from __future__ import annotations

import argparse
import logging
from typing import Optional

from pydantic import BaseModel

from app.cli.common import EXIT_OK, argv_of, input_files, positive_int, resolve_database
from app.core.json_io import write_json
from app.models.enums import GapCharacter
from app.schemas.structure import LayerStack, SlOptions
from app.services.band_properties import cutoff_wavelength
from app.services.manifest import build_manifest, write_manifest
from app.services.superlattice import SAMPLING_SETS, require_materials, sl_gap, sl_samples

logger = logging.getLogger(__name__)


class SlGapOutput(BaseModel):
    stack: str
    m: int
    n: int
    gap: float
    character: GapCharacter
    cbm_location: str
    vbm_energy: float
    cbm_energy: float
    cutoff_um: Optional[float] = None


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("sl-gap", parents=parents, help="Gap of a (well)m/(barrier)n superlattice (JSON)")
    parser.add_argument("-m", type=positive_int, required=True, help="Well monolayers")
    parser.add_argument("-n", type=positive_int, required=True, help="Barrier monolayers")
    parser.add_argument("--well", default="GaAs")
    parser.add_argument("--barrier", default="AlAs")
    parser.add_argument("--substrate", default="GaAs", help="Material fixing the in-plane lattice constant")
    parser.add_argument("--no-strain", action="store_true", help="Ideal bonds, no tetragonal distortion")
    parser.add_argument("--sampling", choices=SAMPLING_SETS, default="gamma", help="k samples for the gap search")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    stack = LayerStack.binary(args.well, args.m, args.barrier, args.n)
    require_materials(stack, database)
    options = SlOptions(strain=not args.no_strain, substrate=args.substrate)
    samples = sl_samples(args.sampling)

    report = sl_gap(stack, samples, database, options)
    output = SlGapOutput(
        stack=stack.label,
        m=args.m,
        n=args.n,
        cutoff_um=cutoff_wavelength(report.gap) if report.gap > 0 else None,
        **report.model_dump(),
    )
    out = write_json(args.out / f"sl_gap_{args.m}_{args.n}.json", output)
    logger.info("%s: gap %.4f eV (%s) at %s", stack.label, report.gap, report.character.value, report.cbm_location)
    manifest = build_manifest(
        "sl-gap",
        argv_of(args),
        inputs=input_files(args),
        outputs=[out],
        config={"stack": stack.label, "options": options.model_dump(mode="json"), "sampling": args.sampling},
    )
    write_manifest(args.out, manifest)
    return EXIT_OK


__all__ = ["SlGapOutput", "register", "run"]
