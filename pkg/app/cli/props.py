from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List, Optional

from app.cli.common import EXIT_OK, argv_of, input_files, pick_material, resolve_database
from app.core.errors import MaterialNotFoundError, ParameterError
from app.core.json_io import read_json, write_json
from app.schemas.fit import PropertyTarget
from app.services.band_properties import extract_features, property_report
from app.services.manifest import build_manifest, write_manifest
from app.services.references import load_bulk_targets, parse_feature_map

logger = logging.getLogger(__name__)


def register(subparsers: argparse._SubParsersAction, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("props", parents=parents, help="Band features against targets (JSON)")
    parser.add_argument("--material", default=None, help="Material name (default: first --material-file, else GaAs)")
    parser.add_argument(
        "--targets",
        type=Path,
        default=None,
        help="Targets file: {feature: value} or {'targets': {...}}; default: shipped targets if any",
    )
    parser.set_defaults(handler=run)


def load_targets_file(path: Path) -> List[PropertyTarget]:
    """Targets from a feature map; missing values become null targets, unknown labels fail."""
    try:
        payload = read_json(path)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read targets file {path}: {exc}") from exc
    if not isinstance(payload, dict):
        raise ParameterError(f"targets file {path} must hold a JSON object")
    raw = payload.get("targets", payload)
    weights = payload.get("weights", {}) if "targets" in payload else {}
    values = parse_feature_map(raw)
    overrides = parse_feature_map(weights)
    targets = []
    for feature, value in values.items():
        target = PropertyTarget.with_default_weight(feature, value)
        if overrides.get(feature) is not None:
            target = target.model_copy(update={"weight": overrides[feature]})
        targets.append(target)
    return targets


def _shipped_targets(name: str) -> List[PropertyTarget]:
    try:
        return load_bulk_targets(name)
    except MaterialNotFoundError:
        logger.info("no shipped targets for %s; reporting computed values only", name)
        return []


def run(args: argparse.Namespace) -> int:
    database = resolve_database(args)
    material = pick_material(args, database)
    targets_path: Optional[Path] = args.targets
    targets = load_targets_file(targets_path) if targets_path is not None else _shipped_targets(material.name)

    features = extract_features(material.oips, material.lattice_constant)
    report = property_report(material.name, features, targets)
    out = write_json(args.out / f"props_{material.name}.json", report)
    logger.info("property report for %s: %d scored, MAPE %s", material.name, report.scored, report.mape_all)
    manifest = build_manifest("props", argv_of(args), inputs=input_files(args, targets_path), outputs=[out])
    write_manifest(args.out, manifest)
    return EXIT_OK


__all__ = ["register", "load_targets_file", "run"]
