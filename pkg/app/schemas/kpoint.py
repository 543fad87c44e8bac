from __future__ import annotations

import math
from typing import List, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.errors import DomainError

POINT_ALIASES = {"G": "Γ", "GAMMA": "Γ", "Γ": "Γ", "X": "X", "L": "L", "K": "K", "W": "W", "U": "U"}


class WaveVector(BaseModel):
    """Reciprocal-space point in units of 2π/a."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kx: float = 0.0
    ky: float = 0.0
    kz: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.kx, self.ky, self.kz], dtype=float)

    def to_cartesian(self, lattice_constant: float) -> np.ndarray:
        """Same point in 1/Å."""
        return (2.0 * math.pi / lattice_constant) * self.as_array()

    def shifted(self, delta: Sequence[float]) -> "WaveVector":
        return WaveVector(kx=self.kx + delta[0], ky=self.ky + delta[1], kz=self.kz + delta[2])

    def negated(self) -> "WaveVector":
        return WaveVector(kx=-self.kx, ky=-self.ky, kz=-self.kz)


KLike = Union[WaveVector, Sequence[float], np.ndarray]


def coerce_k(k: KLike) -> WaveVector:
    """Accept a WaveVector or a 3-sequence; anything non-finite is a domain error."""
    if isinstance(k, WaveVector):
        return k
    values = [float(c) for c in k]
    if len(values) != 3:
        raise DomainError(f"wave vector needs 3 components, got {len(values)}")
    if not all(math.isfinite(c) for c in values):
        raise DomainError(f"wave vector components must be finite, got {values}")
    return WaveVector(kx=values[0], ky=values[1], kz=values[2])


# fcc zone, units of 2π/a
HIGH_SYMMETRY_POINTS: dict[str, tuple[float, float, float]] = {
    "Γ": (0.0, 0.0, 0.0),
    "X": (1.0, 0.0, 0.0),
    "L": (0.5, 0.5, 0.5),
    "K": (0.75, 0.75, 0.0),
    "W": (1.0, 0.5, 0.0),
    "U": (1.0, 0.25, 0.25),
}


class KPath(BaseModel):
    """Ordered high-symmetry labels with a fixed number of samples per segment."""

    model_config = ConfigDict(frozen=True)

    labels: List[str] = Field(min_length=2)
    samples_per_segment: int = Field(ge=2)

    @field_validator("labels")
    @classmethod
    def _normalize_labels(cls, labels: List[str]) -> List[str]:
        normalized = []
        for label in labels:
            key = label.strip().upper()
            if key not in POINT_ALIASES:
                raise ValueError(f"unknown high-symmetry label: {label!r}")
            normalized.append(POINT_ALIASES[key])
        return normalized

    @classmethod
    def parse(cls, text: str, samples_per_segment: int) -> "KPath":
        parts = [p for p in text.replace("–", "-").split("-") if p.strip()]
        return cls(labels=parts, samples_per_segment=samples_per_segment)


__all__ = ["WaveVector", "KLike", "coerce_k", "HIGH_SYMMETRY_POINTS", "KPath"]
