from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from app.core.errors import ParameterError
from app.models.matrix import HermitianMatrix
from app.schemas.kpoint import KLike, coerce_k
from app.schemas.material import OipSet, validate_oips
from app.services.eigen import eigvalsh

logger = logging.getLogger(__name__)

# Canonical index map of the 10x10 basis.
BASIS: tuple[str, ...] = ("s_a", "px_a", "py_a", "pz_a", "s*_a", "s_c", "px_c", "py_c", "pz_c", "s*_c")
ORBITALS_PER_ATOM = 5

# Sign of each bond vector component, rows tau1..tau4.
BOND_SIGNS = np.array(
    [
        [1.0, 1.0, 1.0],
        [-1.0, -1.0, 1.0],
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
    ]
)

_SO_PATTERN = np.array(
    [
        [0.0, -1.0j, 1.0],
        [1.0j, 0.0, -1.0j],
        [1.0, 1.0j, 0.0],
    ],
    dtype=np.complex128,
)


@dataclass(frozen=True, eq=False)
class BondVectors:
    """Anion-to-cation nearest-neighbour vectors (Å)."""

    vectors: np.ndarray
    lattice_constant: float

    @classmethod
    def zinc_blende(cls, lattice_constant: float) -> "BondVectors":
        if not lattice_constant > 0:
            raise ParameterError(f"lattice constant must be positive, got {lattice_constant}")
        vectors = (lattice_constant / 4.0) * BOND_SIGNS
        vectors.setflags(write=False)
        return cls(vectors=vectors, lattice_constant=lattice_constant)

    @property
    def tau1(self) -> np.ndarray:
        return self.vectors[0]

    @property
    def tau2(self) -> np.ndarray:
        return self.vectors[1]

    @property
    def tau3(self) -> np.ndarray:
        return self.vectors[2]

    @property
    def tau4(self) -> np.ndarray:
        return self.vectors[3]


@dataclass(frozen=True)
class PhaseFactors:
    g0: complex
    g1: complex
    g2: complex
    g3: complex

    def as_tuple(self) -> tuple[complex, complex, complex, complex]:
        return (self.g0, self.g1, self.g2, self.g3)


def phase_factors(k: KLike, tau: BondVectors) -> PhaseFactors:
    kvec = coerce_k(k).to_cartesian(tau.lattice_constant)
    e = np.exp(1j * (tau.vectors @ kvec))
    return PhaseFactors(
        g0=complex((e[0] + e[1] + e[2] + e[3]) / 4.0),
        g1=complex((e[0] - e[1] + e[2] - e[3]) / 4.0),
        g2=complex((e[0] - e[1] - e[2] + e[3]) / 4.0),
        g3=complex((e[0] + e[1] - e[2] - e[3]) / 4.0),
    )


def spin_orbit_block(delta: float) -> np.ndarray:
    """3x3 p-shell spin-orbit coupling of one atom."""
    return (delta / 3.0) * _SO_PATTERN


def onsite_block(e_s: float, e_p: float, e_ss: float, delta: float, shift: float = 0.0) -> np.ndarray:
    """5x5 on-site block (s, px, py, pz, s*) including spin-orbit."""
    block = np.zeros((5, 5), dtype=np.complex128)
    block[0, 0] = e_s + shift
    block[1, 1] = block[2, 2] = block[3, 3] = e_p + shift
    block[4, 4] = e_ss + shift
    block[1:4, 1:4] += spin_orbit_block(delta)
    return block


def anion_onsite(oips: OipSet, shift: float = 0.0) -> np.ndarray:
    return onsite_block(oips.e_sa, oips.e_pa, oips.e_ssa, oips.delta_a, shift)


def cation_onsite(oips: OipSet, shift: float = 0.0) -> np.ndarray:
    return onsite_block(oips.e_sc, oips.e_pc, oips.e_ssc, oips.delta_c, shift)


def bond_matrix(oips: OipSet, cosines: Sequence[float], scale: float = 1.0) -> np.ndarray:
    """
    Real 5x5 anion->cation coupling carried by one bond with direction cosines
    (l, m, n). Summed over the four ideal bonds with their Bloch phases this is
    exactly the g-weighted block of the bulk matrix.
    """
    l = np.asarray(cosines, dtype=float)
    root3 = math.sqrt(3.0)
    t = np.zeros((5, 5), dtype=float)
    t[0, 0] = oips.e_sasc
    t[0, 1:4] = root3 * l * oips.e_saxc
    t[1:4, 0] = -root3 * l * oips.e_xasc
    t[4, 1:4] = root3 * l * oips.e_ssaxc
    t[1:4, 4] = -root3 * l * oips.e_xassc
    t[1:4, 1:4] = 3.0 * np.outer(l, l) * oips.e_xayc + np.eye(3) * (oips.e_xaxc - oips.e_xayc)
    return (scale / 4.0) * t


def anion_cation_block(oips: OipSet, g: PhaseFactors) -> np.ndarray:
    g0, g1, g2, g3 = g.as_tuple()
    gp = (g1, g2, g3)
    block = np.zeros((5, 5), dtype=np.complex128)
    block[0, 0] = g0 * oips.e_sasc
    for j in range(3):
        block[0, 1 + j] = gp[j] * oips.e_saxc
        block[1 + j, 0] = -gp[j] * oips.e_xasc
        block[4, 1 + j] = gp[j] * oips.e_ssaxc
        block[1 + j, 4] = -gp[j] * oips.e_xassc
        block[1 + j, 1 + j] = g0 * oips.e_xaxc
    block[1, 2] = block[2, 1] = g3 * oips.e_xayc
    block[1, 3] = block[3, 1] = g2 * oips.e_xayc
    block[2, 3] = block[3, 2] = g1 * oips.e_xayc
    return block


def _require_valid(oips: OipSet) -> None:
    report = validate_oips(oips)
    if not report.ok:
        raise ParameterError("invalid OIP set: " + "; ".join(report.violations))


def build_bulk_hamiltonian(oips: OipSet, k: KLike, lattice_constant: float) -> HermitianMatrix:
    _require_valid(oips)
    tau = BondVectors.zinc_blende(lattice_constant)
    g = phase_factors(k, tau)
    upper = anion_cation_block(oips, g)
    h = np.zeros((10, 10), dtype=np.complex128)
    h[:5, :5] = anion_onsite(oips)
    h[5:, 5:] = cation_onsite(oips)
    h[:5, 5:] = upper
    h[5:, :5] = upper.conj().T
    return HermitianMatrix.from_array(h)


def band_energies(oips: OipSet, k: KLike, lattice_constant: float) -> np.ndarray:
    """Ten ascending eigenvalues (eV) at one k point."""
    wave = coerce_k(k)
    h = build_bulk_hamiltonian(oips, wave, lattice_constant)
    return eigvalsh(h, k=(wave.kx, wave.ky, wave.kz))


__all__ = [
    "BASIS",
    "ORBITALS_PER_ATOM",
    "BOND_SIGNS",
    "BondVectors",
    "PhaseFactors",
    "phase_factors",
    "spin_orbit_block",
    "onsite_block",
    "anion_onsite",
    "cation_onsite",
    "bond_matrix",
    "anion_cation_block",
    "build_bulk_hamiltonian",
    "band_energies",
]
