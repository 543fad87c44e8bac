from __future__ import annotations

from enum import Enum


class BandFeature(str, Enum):
    GAMMA_6C = "Γ6c"
    DELTA_SO = "Δso"
    M_GAMMA = "mΓ"
    M_LH_001 = "mlh_001"
    M_LH_011 = "mlh_011"
    M_LH_111 = "mlh_111"
    M_HH_001 = "mhh_001"
    M_HH_011 = "mhh_011"
    M_HH_111 = "mhh_111"
    M_SO = "mso"
    L6C = "L6c"
    GAMMA_6V = "Γ6v"
    GAMMA_7C = "Γ7c"
    GAMMA_8C = "Γ8c"
    X5V = "X5v"
    X6V = "X6v"
    X7V = "X7v"
    X6C = "X6c"
    X7C = "X7c"
    L5V = "L5v"
    L6V = "L6v"
    L7V = "L7v"
    L7C = "L7c"

    @property
    def is_mass(self) -> bool:
        return self.value.startswith("m")

    @property
    def is_gap(self) -> bool:
        return self is BandFeature.GAMMA_6C

    @classmethod
    def parse(cls, label: str) -> "BandFeature":
        """Look a feature up by its table label; raises ValueError naming the label."""
        try:
            return cls(label)
        except ValueError:
            raise ValueError(f"unknown band feature label: {label!r}") from None


class GapCharacter(str, Enum):
    DIRECT = "D"
    INDIRECT = "I"


class CriticalPoint(str, Enum):
    GAMMA = "Γ"
    X = "X"
    L = "L"

    @property
    def coordinates(self) -> tuple[float, float, float]:
        return CRITICAL_POINT_COORDINATES[self]


# fcc zone, units of 2π/a
CRITICAL_POINT_COORDINATES: dict[CriticalPoint, tuple[float, float, float]] = {
    CriticalPoint.GAMMA: (0.0, 0.0, 0.0),
    CriticalPoint.X: (1.0, 0.0, 0.0),
    CriticalPoint.L: (0.5, 0.5, 0.5),
}


class EPaForm(str, Enum):
    """Which closed form links E_pa to the split-off antibonding level."""

    ROUND_TRIP = "round_trip"
    PRINTED = "printed"


__all__ = [
    "BandFeature",
    "GapCharacter",
    "CriticalPoint",
    "CRITICAL_POINT_COORDINATES",
    "EPaForm",
]
