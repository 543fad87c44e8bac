from __future__ import annotations

import math
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.models.enums import BandFeature, EPaForm
from app.schemas.material import OipSet
from app.schemas.structure import LayerStack, SlOptions

FREE_PARAM_FIELDS: tuple[str, ...] = (
    "e_sa",
    "e_sc",
    "e_ssa",
    "e_ssc",
    "e_xayc",
    "e_saxc",
    "e_xasc",
    "e_ssaxc",
    "e_xassc",
)

DEFAULT_GAP_WEIGHT = 1.0e5
DEFAULT_ENERGY_WEIGHT = 1.0e3
DEFAULT_MASS_WEIGHT = 1.0e4
DEFAULT_SL_WEIGHT = 1.0e6


class FreeParams(BaseModel):
    """Genes of one material. ``e_pa`` is a gene unless it is derived from E_so1."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    e_sa: float
    e_sc: float
    e_ssa: float
    e_ssc: float
    e_xayc: float
    e_saxc: float
    e_xasc: float
    e_ssaxc: float
    e_xassc: float
    e_pa: Optional[float] = None

    @classmethod
    def from_oips(cls, oips: OipSet, include_e_pa: bool = True) -> "FreeParams":
        data = {name: getattr(oips, name) for name in FREE_PARAM_FIELDS}
        if include_e_pa:
            data["e_pa"] = oips.e_pa
        return cls(**data)

    @staticmethod
    def gene_names(include_e_pa: bool) -> Tuple[str, ...]:
        return FREE_PARAM_FIELDS + (("e_pa",) if include_e_pa else ())


class ConstraintAnchors(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    e_g: float = Field(gt=0, description="Γ bandgap pinned by the s-block relation (eV).")
    delta: float = Field(gt=0, description="Spin-orbit splitting pinned at Γ (eV).")
    e_so1: Optional[float] = Field(default=None, description="Upper split-off (Γ7) level (eV).")
    delta_a: float = Field(ge=0)
    delta_c: float = Field(ge=0)


class PropertyTarget(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    feature: BandFeature
    target: Optional[float] = None
    weight: float = Field(gt=0)

    @classmethod
    def with_default_weight(cls, feature: BandFeature, target: Optional[float]) -> "PropertyTarget":
        return cls(feature=feature, target=target, weight=default_weight(feature))


def default_weight(feature: BandFeature) -> float:
    if feature.is_gap:
        return DEFAULT_GAP_WEIGHT
    if feature.is_mass:
        return DEFAULT_MASS_WEIGHT
    return DEFAULT_ENERGY_WEIGHT


class SlTarget(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    stack: LayerStack
    gap: float = Field(gt=0)
    weight: float = Field(default=DEFAULT_SL_WEIGHT, gt=0)


class CostSpec(BaseModel):
    """Weighted bulk features per material plus superlattice gap targets."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    bulk_targets: Dict[str, List[PropertyTarget]] = Field(default_factory=dict)
    sl_targets: List[SlTarget] = Field(default_factory=list)
    anchors: Dict[str, ConstraintAnchors] = Field(default_factory=dict)
    sl_options: SlOptions = Field(default_factory=SlOptions)
    # "gamma" evaluates SL gaps at Γ̄ only; "axial" adds the growth axis, "zone" also the in-plane edges
    sl_sampling: str = Field(default="gamma", pattern="^(gamma|axial|zone)$")

    @model_validator(mode="after")
    def _check_targets(self) -> "CostSpec":
        for material, targets in self.bulk_targets.items():
            seen = [t.feature for t in targets]
            if len(seen) != len(set(seen)):
                raise ValueError(f"duplicate feature targets for {material}")
            if material not in self.anchors:
                raise ValueError(f"no constraint anchors for fitted material {material}")
        return self

    @property
    def materials(self) -> List[str]:
        return list(self.anchors)


class GeneBounds(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    low: float
    high: float

    @model_validator(mode="after")
    def _ordered(self) -> "GeneBounds":
        if not (math.isfinite(self.low) and math.isfinite(self.high)) or not self.low < self.high:
            raise ValueError(f"gene bounds must be finite with low < high, got [{self.low}, {self.high}]")
        return self


class FitConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    population_size: int = Field(default=10_000, ge=2)
    generations: int = Field(default=453, ge=1)
    seed: int = Field(default=0, ge=0)
    tournament_size: int = Field(default=4, ge=1)
    crossover_rate: float = Field(default=0.9, ge=0, le=1)
    mutation_rate: float = Field(default=0.1, ge=0, le=1)
    mutation_sigma: float = Field(default=0.05, gt=0, description="Fraction of each gene's range.")
    # σ shrinks as ((G − g + 1)/G)^mutation_decay over the run; 0 keeps it fixed
    mutation_decay: float = Field(default=0.0, ge=0)
    elite_fraction: float = Field(default=0.02, ge=0, lt=1)
    bound_fraction: float = Field(default=0.6, gt=0, lt=1)
    # material -> gene -> bounds; missing genes fall back to bound_fraction around the reference
    bounds: Dict[str, Dict[str, GeneBounds]] = Field(default_factory=dict)
    use_eq5: bool = False
    e_pa_form: EPaForm = EPaForm.ROUND_TRIP
    workers: int = Field(default=1, ge=1)
    log_every: int = Field(default=10, ge=1)

    @field_validator("bounds")
    @classmethod
    def _known_genes(cls, bounds: Dict[str, Dict[str, GeneBounds]]) -> Dict[str, Dict[str, GeneBounds]]:
        allowed = set(FREE_PARAM_FIELDS) | {"e_pa"}
        for material, genes in bounds.items():
            unknown = sorted(set(genes) - allowed)
            if unknown:
                raise ValueError(f"unknown genes for {material}: {', '.join(unknown)}")
        return bounds


class FitFile(BaseModel):
    """On-disk fit description. Without ``cost`` the shipped targets are used."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cost: Optional[CostSpec] = None
    ga: FitConfig = Field(default_factory=FitConfig)


class FitResult(BaseModel):
    best_free: Dict[str, FreeParams]
    oips: Dict[str, OipSet]
    best_cost: float
    history: List[float]
    seed: int
    evaluations: int
    config: FitConfig

    @model_validator(mode="after")
    def _history_consistent(self) -> "FitResult":
        if self.history and self.history[-1] != self.best_cost:
            raise ValueError("best cost must equal the last history entry")
        return self


__all__ = [
    "FREE_PARAM_FIELDS",
    "DEFAULT_GAP_WEIGHT",
    "DEFAULT_ENERGY_WEIGHT",
    "DEFAULT_MASS_WEIGHT",
    "DEFAULT_SL_WEIGHT",
    "FreeParams",
    "ConstraintAnchors",
    "PropertyTarget",
    "default_weight",
    "SlTarget",
    "CostSpec",
    "GeneBounds",
    "FitConfig",
    "FitFile",
    "FitResult",
]
