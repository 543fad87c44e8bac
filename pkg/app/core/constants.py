from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class PhysicalConstants:
    """Fixed constants shared by the property extractors."""

    # eV·Å², so m*/m0 = hbar2_over_m0 / (d²E/dk²) with k in 1/Å
    hbar2_over_m0: float = 7.61996
    # eV·μm, cutoff wavelength = hc / gap
    hc: float = 1.23984


CONSTANTS = PhysicalConstants()

# Relative step of the finite-difference stencil, in units of 2π/a.
MASS_STEP_FRACTION = 1.0e-3
HERMITIAN_ATOL = 1.0e-12
DEGENERACY_TOL = 1.0e-6

__all__ = ["PhysicalConstants", "CONSTANTS", "MASS_STEP_FRACTION", "HERMITIAN_ATOL", "DEGENERACY_TOL"]
