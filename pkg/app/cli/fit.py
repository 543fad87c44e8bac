from __future__ import annotations

import argparse
import logging
from pathlib import Path

from app.cli.common import EXIT_OK, argv_of, input_files, resolve_database, resolve_threads
from app.core.json_io import write_json
from app.services.fitting import estimate_runtime, ga_fit, load_fit_file, resolve_cost_spec
from app.services.manifest import build_manifest, write_manifest
from app.services.materials import dump_material

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("fit", parents=parents, help="Genetic-algorithm fit of the free parameters")
    parser.add_argument("--config", type=Path, default=None, help="Fit config JSON (default: shipped full-scale run)")
    parser.add_argument("--smoke", action="store_true", help="Use the reduced-scale GA settings")
    parser.add_argument("--dry-run", action="store_true", help="Print the runtime estimate and exit")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    fit_file = load_fit_file(args.config, smoke=args.smoke)
    updates: dict = {"workers": resolve_threads(args)}
    if args.seed is not None:
        updates["seed"] = args.seed
    cfg = fit_file.ga.model_copy(update=updates)
    spec = resolve_cost_spec(fit_file)

    if args.dry_run:
        estimate = estimate_runtime(spec, cfg, database)
        print(
            f"{estimate.evaluations} evaluations, {estimate.seconds_per_evaluation:.3g} s each, "
            f"{estimate.workers} workers: about {estimate.estimated_seconds / 3600.0:.2f} h"
        )
        return EXIT_OK

    result = ga_fit(spec, cfg, database)
    out_dir: Path = args.out
    written = [write_json(out_dir / "fit_result.json", result)]
    for name, oips in result.oips.items():
        fitted = database.get(name).with_oips(oips)
        written.append(dump_material(fitted, out_dir / "materials" / f"{name}.json"))
    logger.info("fit finished: best cost %.6g after %d evaluations", result.best_cost, result.evaluations)

    manifest = build_manifest(
        "fit",
        argv_of(args),
        inputs=input_files(args, args.config),
        outputs=written,
        config={"ga": cfg.model_dump(mode="json"), "cost": spec.model_dump(mode="json")},
        seed=cfg.seed,
    )
    write_manifest(out_dir, manifest)
    return EXIT_OK


__all__ = ["register", "run"]
