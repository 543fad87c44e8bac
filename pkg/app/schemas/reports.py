from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field

from app.models.enums import GapCharacter


class GapReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    gap: float = Field(ge=0, description="Conduction minimum minus Γ valence maximum (eV).")
    character: GapCharacter
    cbm_location: str
    vbm_energy: float
    cbm_energy: float


class FeatureRow(BaseModel):
    computed: float
    target: Optional[float] = None
    weight: Optional[float] = None
    abs_error: Optional[float] = None


class PropertyReport(BaseModel):
    """Band features of one material against optional targets."""

    material: str
    features: Dict[str, FeatureRow]
    mape_all: Optional[float] = None
    mape_energy: Optional[float] = None
    scored: int = 0


class HoldoutRow(BaseModel):
    label: str
    predicted: float
    experimental: float
    abs_pct_error: float
    character: Optional[GapCharacter] = None


class MapeReport(BaseModel):
    rows: List[HoldoutRow] = Field(default_factory=list)
    mape: Optional[float] = None
    sampling: str = "gamma"


__all__ = ["GapReport", "FeatureRow", "PropertyReport", "HoldoutRow", "MapeReport"]
