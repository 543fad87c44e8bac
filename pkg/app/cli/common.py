from __future__ import annotations

import argparse
import logging
from pathlib import Path
from typing import List, Optional, Sequence

from app.core.config import Settings, settings as default_settings
from app.schemas.material import Material
from app.services.materials import MaterialDatabase, default_database, load_material

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3


def positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def thickness_range(text: str) -> List[int]:
    """``3:30`` (inclusive), ``3,5,8`` or a single value."""
    try:
        if ":" in text:
            start, stop = (int(part) for part in text.split(":", 1))
            values = list(range(start, stop + 1))
        else:
            values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad thickness range: {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"thicknesses must be positive monolayer counts: {text!r}")
    return values


def global_options() -> argparse.ArgumentParser:
    """Flags shared by every subcommand."""
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--seed", type=int, default=None, help="Random seed (fit only)")
    parent.add_argument("--threads", type=positive_int, default=None, help="Worker processes")
    parent.add_argument("--out", type=Path, default=Path("out"), help="Output directory")
    parent.add_argument("--log-level", default=None, help="Root log level (default from OIPTB_LOG_LEVEL)")
    parent.add_argument("--materials-dir", type=Path, default=None, help="Material database directory")
    parent.add_argument(
        "--material-file",
        type=Path,
        action="append",
        default=[],
        help="Material file overriding a database entry (repeatable)",
    )
    return parent


def resolve_database(args: argparse.Namespace, settings: Optional[Settings] = None) -> MaterialDatabase:
    if args.materials_dir is not None:
        base = MaterialDatabase.from_directory(args.materials_dir)
    else:
        base = default_database(settings or default_settings)
    if args.material_file:
        return MaterialDatabase.from_files(args.material_file, base=base)
    return base


def resolve_threads(args: argparse.Namespace, settings: Optional[Settings] = None) -> int:
    return args.threads if args.threads is not None else (settings or default_settings).threads


def input_files(args: argparse.Namespace, *extra: Optional[Path]) -> List[Path]:
    paths: List[Path] = list(args.material_file)
    if args.materials_dir is not None:
        paths.extend(sorted(Path(args.materials_dir).glob("*.json")))
    paths.extend(p for p in extra if p is not None)
    return paths


def argv_of(args: argparse.Namespace) -> Sequence[str]:
    return getattr(args, "argv", [])


def pick_material(args: argparse.Namespace, database: MaterialDatabase) -> Material:
    """``--material`` by name, else the first ``--material-file``, else GaAs."""
    if args.material:
        return database.get(args.material)
    if args.material_file:
        return database.get(load_material(args.material_file[0]).name)
    return database.get("GaAs")


__all__ = [
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_NUMERICAL",
    "positive_int",
    "thickness_range",
    "global_options",
    "resolve_database",
    "resolve_threads",
    "input_files",
    "argv_of",
    "pick_material",
]
