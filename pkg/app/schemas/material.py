from __future__ import annotations

import math
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

OIP_FIELDS: tuple[str, ...] = (
    "e_sa",
    "e_sc",
    "e_ssa",
    "e_ssc",
    "e_xayc",
    "e_saxc",
    "e_xasc",
    "e_ssaxc",
    "e_xassc",
    "e_pa",
    "e_pc",
    "e_sasc",
    "e_xaxc",
    "delta_a",
    "delta_c",
)


class OipSet(BaseModel):
    """The fifteen orbital interaction parameters of one binary compound (eV)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    e_sa: float
    e_sc: float
    e_ssa: float
    e_ssc: float
    e_xayc: float
    e_saxc: float
    e_xasc: float
    e_ssaxc: float
    e_xassc: float
    e_pa: float
    e_pc: float
    e_sasc: float
    e_xaxc: float
    delta_a: float
    delta_c: float

    def as_dict(self) -> Dict[str, float]:
        return {name: float(getattr(self, name)) for name in OIP_FIELDS}

    def replace(self, **updates: float) -> "OipSet":
        return OipSet.model_validate({**self.as_dict(), **updates})


class OipValidationReport(BaseModel):
    violations: List[str] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_oips(oips: OipSet) -> OipValidationReport:
    """Collect every violated invariant; an empty report means the set is usable."""
    violations: list[str] = []
    for name in OIP_FIELDS:
        value = getattr(oips, name)
        if not math.isfinite(value):
            violations.append(f"{name} must be finite (got {value})")
    for name in ("delta_a", "delta_c"):
        value = getattr(oips, name)
        if math.isfinite(value) and value < 0:
            violations.append(f"{name} ≥ 0 violated (got {value})")
    return OipValidationReport(violations=violations)


class Material(BaseModel):
    """A binary zinc-blende compound: OIPs plus the geometry they live on."""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    name: str = Field(min_length=1)
    lattice_constant: float = Field(
        gt=0,
        validation_alias="lattice_constant_angstrom",
        serialization_alias="lattice_constant_angstrom",
        description="Cubic lattice constant in Å.",
    )
    oips: OipSet
    anion: str = "As"
    cation: Optional[str] = None
    elastic_ratio: Optional[float] = Field(
        default=None,
        ge=0,
        description="2·C12/C11, drives the tetragonal distortion of strained layers.",
    )

    def with_oips(self, oips: OipSet) -> "Material":
        return self.model_copy(update={"oips": oips})

    def to_file_payload(self) -> dict:
        return self.model_dump(mode="json", by_alias=True, exclude_none=True)


__all__ = ["OIP_FIELDS", "OipSet", "OipValidationReport", "validate_oips", "Material"]
