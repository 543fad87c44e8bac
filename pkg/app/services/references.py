from __future__ import annotations

import logging
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Mapping, Optional

from pydantic import BaseModel, ValidationError

from app.core.config import DATA_DIR
from app.core.errors import DomainError, MaterialNotFoundError, ParameterError
from app.core.json_io import read_json
from app.models.enums import BandFeature, GapCharacter
from app.schemas.fit import ConstraintAnchors, CostSpec, PropertyTarget, SlTarget
from app.schemas.structure import LayerStack
from app.services.band_properties import mape

logger = logging.getLogger(__name__)

BULK_TARGETS_PATH = DATA_DIR / "targets" / "bulk_targets.json"
SUPERLATTICE_REFERENCES_PATH = DATA_DIR / "references" / "superlattices.json"
FIT_DIR = DATA_DIR / "fit"

# superlattices whose measured gaps enter the cost function by default
FIT_SUPERLATTICES = ((9, 4), (10, 4))


class SuperlatticeRow(BaseModel):
    m: int
    n: int
    tb_fitted: float
    tb_fitted_character: Optional[GapCharacter] = None
    vogl: Optional[float] = None
    klimeck: Optional[float] = None
    pl: float
    pl_character: Optional[GapCharacter] = None

    def stack(self, well: str = "GaAs", barrier: str = "AlAs") -> LayerStack:
        return LayerStack.binary(well, self.m, barrier, self.n)


class ShortPeriodRow(BaseModel):
    m: int
    n: int
    dft: float
    dft_scissor: float
    hybrid: float
    tb_fitted: float
    pl: float


class QuantumWellRow(BaseModel):
    name: str
    tb_fitted: float
    experimental: float


class SuperlatticeReferences(BaseModel):
    superlattices: List[SuperlatticeRow]
    short_period: List[ShortPeriodRow]
    quantum_wells: List[QuantumWellRow]


def parse_feature_map(raw: Mapping[str, Optional[float]]) -> Dict[BandFeature, Optional[float]]:
    """Feature label -> value; unknown labels raise ParameterError naming them."""
    out: Dict[BandFeature, Optional[float]] = {}
    for label, value in raw.items():
        try:
            feature = BandFeature.parse(label)
        except ValueError as exc:
            raise ParameterError(str(exc)) from exc
        out[feature] = None if value is None else float(value)
    return out


@lru_cache(maxsize=4)
def _bulk_payload(path: Path = BULK_TARGETS_PATH) -> dict:
    return read_json(path)


def _material_entry(material: str) -> dict:
    entries = _bulk_payload()["materials"]
    if material not in entries:
        raise MaterialNotFoundError(f"no shipped targets for material '{material}'")
    return entries[material]


def load_bulk_targets(material: str) -> List[PropertyTarget]:
    values = parse_feature_map(_material_entry(material)["targets"])
    return [PropertyTarget.with_default_weight(feature, values.get(feature)) for feature in BandFeature]


def load_reference_features(material: str) -> Dict[BandFeature, Optional[float]]:
    return parse_feature_map(_material_entry(material)["reference"])


def load_anchors(material: str) -> ConstraintAnchors:
    return ConstraintAnchors.model_validate(_material_entry(material)["anchors"])


@lru_cache(maxsize=4)
def load_superlattice_references(path: Path = SUPERLATTICE_REFERENCES_PATH) -> SuperlatticeReferences:
    try:
        return SuperlatticeReferences.model_validate(read_json(path))
    except ValidationError as exc:
        raise ParameterError(f"invalid reference file {path}: {exc}") from exc


def reference_mape(column: str, table: str = "superlattices") -> float:
    """MAPE of a published column against the measured PL column."""
    refs = load_superlattice_references()
    rows = getattr(refs, table, None)
    if rows is None or table == "quantum_wells":
        raise DomainError(f"unknown reference table '{table}'")
    numeric = [name for name, field in type(rows[0]).model_fields.items() if field.annotation in (float, Optional[float])]
    if column not in numeric or column == "pl":
        raise DomainError(f"unknown column '{column}' in table '{table}'")
    predicted = [getattr(row, column) for row in rows]
    return mape(predicted, [row.pl for row in rows])


def default_sl_targets() -> List[SlTarget]:
    rows = {(row.m, row.n): row for row in load_superlattice_references().superlattices}
    return [SlTarget(stack=rows[key].stack(), gap=rows[key].pl) for key in FIT_SUPERLATTICES]


def default_cost_spec(materials: tuple[str, ...] = ("GaAs", "AlAs")) -> CostSpec:
    return CostSpec(
        bulk_targets={name: load_bulk_targets(name) for name in materials},
        sl_targets=default_sl_targets(),
        anchors={name: load_anchors(name) for name in materials},
    )


def holdout_superlattices() -> List[SlTarget]:
    return [SlTarget(stack=row.stack(), gap=row.pl) for row in load_superlattice_references().superlattices]


__all__ = [
    "BULK_TARGETS_PATH",
    "SUPERLATTICE_REFERENCES_PATH",
    "FIT_DIR",
    "FIT_SUPERLATTICES",
    "SuperlatticeRow",
    "ShortPeriodRow",
    "QuantumWellRow",
    "SuperlatticeReferences",
    "parse_feature_map",
    "load_bulk_targets",
    "load_reference_features",
    "load_anchors",
    "load_superlattice_references",
    "reference_mape",
    "default_sl_targets",
    "default_cost_spec",
    "holdout_superlattices",
]
