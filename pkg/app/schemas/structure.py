from __future__ import annotations

from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, model_validator

from app.schemas.material import Material


class LayerSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    material: str = Field(min_length=1)
    monolayers: PositiveInt


class LayerStack(BaseModel):
    """One period of a [001] stack; each monolayer is one anion plus one cation plane."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    layers: List[LayerSpec] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_total(self) -> "LayerStack":
        if self.total_monolayers < 2:
            raise ValueError("a layer stack needs at least 2 monolayers per period")
        return self

    @classmethod
    def binary(cls, first: str, m: int, second: str, n: int) -> "LayerStack":
        return cls(layers=[LayerSpec(material=first, monolayers=m), LayerSpec(material=second, monolayers=n)])

    @property
    def total_monolayers(self) -> int:
        return sum(layer.monolayers for layer in self.layers)

    @property
    def materials(self) -> Tuple[str, ...]:
        return tuple(dict.fromkeys(layer.material for layer in self.layers))

    def monolayer_materials(self) -> List[str]:
        """Material of every monolayer, bottom to top."""
        out: List[str] = []
        for layer in self.layers:
            out.extend([layer.material] * layer.monolayers)
        return out

    def doubled(self) -> "LayerStack":
        return LayerStack(layers=[*self.layers, *self.layers])

    def key(self) -> Tuple[Tuple[str, int], ...]:
        return tuple((layer.material, layer.monolayers) for layer in self.layers)

    @property
    def label(self) -> str:
        return "/".join(f"({layer.material}){layer.monolayers}" for layer in self.layers)


class SlOptions(BaseModel):
    """Geometry knobs of the superlattice builder."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    strain: bool = True
    eta: float = Field(default=2.0, ge=0)
    substrate: Optional[str] = "GaAs"
    # rigid on-site shift per material (eV)
    offsets: Dict[str, float] = Field(default_factory=dict)

    def key(self) -> tuple:
        return (self.strain, self.eta, self.substrate, tuple(sorted(self.offsets.items())))


class AlloySpec(BaseModel):
    """Virtual-crystal alloy (1−x)·endpoints[0] + x·endpoints[1]."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    x: float
    endpoints: Tuple[Material, Material]

    @property
    def name(self) -> str:
        low, high = self.endpoints
        return f"{high.cation or high.name}{self.x:.4g}{low.cation or low.name}{1.0 - self.x:.4g}{low.anion}"


class QwSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    well: Material
    barrier: AlloySpec
    well_thickness: PositiveInt
    barrier_thickness: PositiveInt


__all__ = ["LayerSpec", "LayerStack", "SlOptions", "AlloySpec", "QwSpec"]
