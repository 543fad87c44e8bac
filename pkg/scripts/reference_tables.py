"""
Compare the shipped parameters with the reference columns.

Usage:
    python scripts/reference_tables.py [--materials-dir DIR] [--full]
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

from app.core.config import LOG_FORMAT  # noqa: E402
from app.models.enums import BandFeature  # noqa: E402
from app.services.band_properties import extract_features  # noqa: E402
from app.services.materials import MaterialDatabase  # noqa: E402
from app.services.references import (  # noqa: E402
    load_reference_features,
    load_superlattice_references,
    reference_mape,
)
from app.services.superlattice import sl_gap, sl_samples  # noqa: E402

logger = logging.getLogger("reference_tables")


def _bulk_section(database: MaterialDatabase) -> None:
    for name in ("GaAs", "AlAs"):
        material = database.get(name)
        computed = extract_features(material.oips, material.lattice_constant)
        published = load_reference_features(name)
        print(f"\n{name}: feature, computed, published, diff")
        for feature in BandFeature:
            ref = published.get(feature)
            value = computed[feature]
            diff = "" if ref is None else f"{value - ref:+.4f}"
            ref_text = "-" if ref is None else f"{ref:.4f}"
            print(f"  {feature.value:8s} {value:10.4f} {ref_text:>10s} {diff:>9s}")


def _superlattice_section(database: MaterialDatabase, full: bool) -> None:
    samples = sl_samples("zone" if full else "gamma")
    refs = load_superlattice_references()
    print("\nsuperlattice, computed, character, published, PL")
    for row in refs.superlattices:
        report = sl_gap(row.stack(), samples, database)
        print(
            f"  ({row.m},{row.n})  {report.gap:.4f} {report.character.value}"
            f"  {row.tb_fitted:.3f}  {row.pl:.3f}"
        )
    for column in ("klimeck", "vogl", "tb_fitted"):
        print(f"  MAPE {column:10s} vs PL: {reference_mape(column):.2f}%")
    for column in ("dft", "dft_scissor", "hybrid", "tb_fitted"):
        print(f"  short-period MAPE {column:12s} vs PL: {reference_mape(column, 'short_period'):.2f}%")


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--materials-dir", type=Path, default=None, help="Material files to compare")
    parser.add_argument("--full", action="store_true", help="Search the whole SL zone instead of Γ only")
    args = parser.parse_args()

    logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
    database = MaterialDatabase.from_directory(args.materials_dir) if args.materials_dir else MaterialDatabase.defaults()
    _bulk_section(database)
    _superlattice_section(database, args.full)
    return 0


if __name__ == "__main__":
    sys.exit(main())
