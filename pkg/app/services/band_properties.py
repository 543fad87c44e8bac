from __future__ import annotations

import logging
import math
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from app.core.constants import CONSTANTS, DEGENERACY_TOL, MASS_STEP_FRACTION
from app.core.errors import DegenerateBandError, DomainError
from app.models.enums import BandFeature, CriticalPoint, GapCharacter
from app.schemas.kpoint import KLike, coerce_k
from app.schemas.fit import PropertyTarget
from app.schemas.material import OipSet
from app.schemas.reports import FeatureRow, GapReport, PropertyReport
from app.services.bulk_hamiltonian import band_energies

logger = logging.getLogger(__name__)

BULK_VALENCE_BANDS = 4
GAMMA_VBM_INDEX = 3

MASS_DIRECTIONS: Dict[str, np.ndarray] = {
    "001": np.array([0.0, 0.0, 1.0]),
    "011": np.array([0.0, 1.0, 1.0]) / math.sqrt(2.0),
    "111": np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0),
}

# Band index of each energy feature at its critical point (ascending order).
ENERGY_FEATURE_INDEX: Dict[BandFeature, tuple[CriticalPoint, int]] = {
    BandFeature.GAMMA_6V: (CriticalPoint.GAMMA, 0),
    BandFeature.GAMMA_6C: (CriticalPoint.GAMMA, 4),
    BandFeature.GAMMA_7C: (CriticalPoint.GAMMA, 5),
    BandFeature.GAMMA_8C: (CriticalPoint.GAMMA, 6),
    BandFeature.X5V: (CriticalPoint.X, 1),
    BandFeature.X6V: (CriticalPoint.X, 2),
    BandFeature.X7V: (CriticalPoint.X, 3),
    BandFeature.X6C: (CriticalPoint.X, 4),
    BandFeature.X7C: (CriticalPoint.X, 5),
    BandFeature.L5V: (CriticalPoint.L, 1),
    BandFeature.L6V: (CriticalPoint.L, 2),
    BandFeature.L7V: (CriticalPoint.L, 3),
    BandFeature.L6C: (CriticalPoint.L, 4),
    BandFeature.L7C: (CriticalPoint.L, 5),
}
SPLIT_OFF_INDEX = 1
CONDUCTION_INDEX = 4


def second_derivative(energy_at: Callable[[float], float], step: float) -> float:
    """Central five-point stencil for d²E/dt² at t = 0."""
    if not step > 0:
        raise DomainError(f"finite-difference step must be positive, got {step}")
    e_m2 = energy_at(-2.0 * step)
    e_m1 = energy_at(-step)
    e_0 = energy_at(0.0)
    e_p1 = energy_at(step)
    e_p2 = energy_at(2.0 * step)
    return (-e_p2 + 16.0 * e_p1 - 30.0 * e_0 + 16.0 * e_m1 - e_m2) / (12.0 * step * step)


def mass_from_curvature(curvature: float) -> float:
    if curvature == 0.0 or not math.isfinite(curvature):
        raise DomainError(f"band curvature {curvature} does not define an effective mass")
    return CONSTANTS.hbar2_over_m0 / curvature


def mass_from_dispersion(energy_at: Callable[[float], float], step: float) -> float:
    """m*/m0 of an arbitrary dispersion E(t), t in 1/Å."""
    return mass_from_curvature(second_derivative(energy_at, step))


def _unit(direction: Sequence[float]) -> np.ndarray:
    d = np.asarray(direction, dtype=float)
    norm = float(np.linalg.norm(d))
    if d.shape != (3,) or not norm > 0 or not math.isfinite(norm):
        raise DomainError(f"direction must be a non-zero finite 3-vector, got {direction}")
    return d / norm


def band_curvatures(
    oips: OipSet,
    lattice_constant: float,
    direction: Sequence[float],
    at: KLike = (0.0, 0.0, 0.0),
    step_fraction: float = MASS_STEP_FRACTION,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Curvature d²E/dk² (eV·Å²) of every sorted band along ``direction``, plus the
    energies at the expansion point. Five diagonalizations in total.
    """
    d = _unit(direction)
    origin = coerce_k(at).as_array()
    # k in units of 2π/a, step in 1/Å
    to_frac = lattice_constant / (2.0 * math.pi)
    step = step_fraction * 2.0 * math.pi / lattice_constant
    samples = {}
    for n in (-2, -1, 0, 1, 2):
        k = origin + (n * step * to_frac) * d
        samples[n] = band_energies(oips, k, lattice_constant)
    curv = (-samples[2] + 16.0 * samples[1] - 30.0 * samples[0] + 16.0 * samples[-1] - samples[-2]) / (
        12.0 * step * step
    )
    return curv, samples[0]


def _degenerate_partners(energies: np.ndarray, band_index: int, tol: float = DEGENERACY_TOL) -> list[int]:
    return [j for j in range(len(energies)) if j != band_index and abs(energies[j] - energies[band_index]) < tol]


def effective_mass(
    oips: OipSet,
    lattice_constant: float,
    band_index: int,
    direction: Sequence[float],
    at: KLike = (0.0, 0.0, 0.0),
    *,
    step_fraction: float = MASS_STEP_FRACTION,
    allow_degenerate: bool = False,
) -> float:
    if not 0 <= band_index < 10:
        raise DomainError(f"band index must be in 0..9, got {band_index}")
    curv, energies = band_curvatures(oips, lattice_constant, direction, at, step_fraction)
    partners = _degenerate_partners(energies, band_index)
    if partners and not allow_degenerate:
        raise DegenerateBandError(band_index, partners)
    return mass_from_curvature(float(curv[band_index]))


def _hole_pair(curv: np.ndarray) -> tuple[float, float]:
    """(heavy, light) from the two bands meeting at the valence maximum."""
    m_a = mass_from_curvature(float(curv[2]))
    m_b = mass_from_curvature(float(curv[3]))
    return (m_a, m_b) if abs(m_a) >= abs(m_b) else (m_b, m_a)


def hole_masses(oips: OipSet, lattice_constant: float, direction: Sequence[float]) -> tuple[float, float]:
    curv, _ = band_curvatures(oips, lattice_constant, direction)
    return _hole_pair(curv)


def critical_point_energies(oips: OipSet, lattice_constant: float) -> Dict[CriticalPoint, np.ndarray]:
    return {point: band_energies(oips, point.coordinates, lattice_constant) for point in CriticalPoint}


def extract_features(oips: OipSet, lattice_constant: float) -> Dict[BandFeature, float]:
    """All 23 bulk features; energies relative to the Γ valence maximum."""
    levels = critical_point_energies(oips, lattice_constant)
    vbm = float(levels[CriticalPoint.GAMMA][GAMMA_VBM_INDEX])

    values: Dict[BandFeature, float] = {}
    for feature, (point, index) in ENERGY_FEATURE_INDEX.items():
        values[feature] = float(levels[point][index]) - vbm
    gamma = levels[CriticalPoint.GAMMA]
    values[BandFeature.DELTA_SO] = float(gamma[GAMMA_VBM_INDEX] - gamma[SPLIT_OFF_INDEX])

    curv_001, _ = band_curvatures(oips, lattice_constant, MASS_DIRECTIONS["001"])
    values[BandFeature.M_GAMMA] = mass_from_curvature(float(curv_001[CONDUCTION_INDEX]))
    values[BandFeature.M_SO] = mass_from_curvature(float(curv_001[SPLIT_OFF_INDEX]))
    hh, lh = _hole_pair(curv_001)
    values[BandFeature.M_HH_001], values[BandFeature.M_LH_001] = hh, lh
    for label, hh_feature, lh_feature in (
        ("011", BandFeature.M_HH_011, BandFeature.M_LH_011),
        ("111", BandFeature.M_HH_111, BandFeature.M_LH_111),
    ):
        curv, _ = band_curvatures(oips, lattice_constant, MASS_DIRECTIONS[label])
        values[hh_feature], values[lh_feature] = _hole_pair(curv)

    return {feature: values[feature] for feature in BandFeature}


def gap_report(
    energies_by_kpoint: Mapping[str, Sequence[float]],
    n_valence: int = BULK_VALENCE_BANDS,
    gamma_label: str = CriticalPoint.GAMMA.value,
) -> GapReport:
    """
    Gap = lowest conduction level over all samples minus the valence maximum
    at Γ. The gap is direct when the conduction minimum sits at Γ.
    """
    if not energies_by_kpoint:
        raise DomainError("gap search needs at least one k sample")
    if gamma_label not in energies_by_kpoint:
        raise DomainError(f"gap search needs the {gamma_label} point among the samples")
    gamma = np.asarray(energies_by_kpoint[gamma_label], dtype=float)
    if not 0 < n_valence < len(gamma):
        raise DomainError(f"valence band count {n_valence} incompatible with {len(gamma)} bands")
    vbm = float(np.max(gamma[:n_valence]))

    cbm_label = gamma_label
    cbm = float(np.min(gamma[n_valence:]))
    for label, energies in energies_by_kpoint.items():
        conduction = float(np.min(np.asarray(energies, dtype=float)[n_valence:]))
        if conduction < cbm:
            cbm, cbm_label = conduction, label

    gap = cbm - vbm
    if gap < 0:
        logger.warning("conduction minimum %.6f below valence maximum %.6f; gap clamped to 0", cbm, vbm)
        gap = 0.0
    character = GapCharacter.DIRECT if cbm_label == gamma_label else GapCharacter.INDIRECT
    return GapReport(gap=gap, character=character, cbm_location=cbm_label, vbm_energy=vbm, cbm_energy=cbm)


def bulk_gap_report(oips: OipSet, lattice_constant: float) -> GapReport:
    levels = critical_point_energies(oips, lattice_constant)
    return gap_report({point.value: energies for point, energies in levels.items()})


def cutoff_wavelength(gap: float) -> float:
    """Cutoff wavelength in μm for a gap in eV."""
    if not gap > 0 or not math.isfinite(gap):
        raise DomainError(f"cutoff wavelength needs a positive gap, got {gap}")
    return CONSTANTS.hc / gap


def mape(predicted: Sequence[float], target: Sequence[Optional[float]]) -> float:
    """
    Mean absolute percentage error. Missing targets are skipped; zero targets
    are skipped with a warning.
    """
    if len(predicted) != len(target):
        raise DomainError(f"mape needs equal lengths, got {len(predicted)} and {len(target)}")
    errors = []
    for p, t in zip(predicted, target):
        if t is None:
            continue
        if t == 0:
            logger.warning("skipping zero target in MAPE (predicted %.6g)", p)
            continue
        errors.append(abs(p - t) / abs(t))
    if not errors:
        raise DomainError("mape has no scorable (predicted, target) pairs")
    return 100.0 * math.fsum(errors) / len(errors)


def property_report(
    material: str,
    features: Mapping[BandFeature, float],
    targets: Sequence[PropertyTarget] = (),
) -> PropertyReport:
    """
    Computed features against optional targets. MAPE is reported over every
    scorable feature and over the energy features alone; ``None`` when a subset
    has nothing to score.
    """
    by_feature = {t.feature: t for t in targets}
    rows: Dict[str, FeatureRow] = {}
    scored_all: list[tuple[float, float]] = []
    scored_energy: list[tuple[float, float]] = []
    for feature in BandFeature:
        computed = float(features[feature])
        target = by_feature.get(feature)
        if target is None or target.target is None:
            rows[feature.value] = FeatureRow(computed=computed, weight=None if target is None else target.weight)
            continue
        rows[feature.value] = FeatureRow(
            computed=computed,
            target=target.target,
            weight=target.weight,
            abs_error=abs(computed - target.target),
        )
        if target.target == 0:
            logger.warning("skipping zero target for %s in MAPE", feature.value)
            continue
        scored_all.append((computed, target.target))
        if not feature.is_mass:
            scored_energy.append((computed, target.target))

    def _subset(pairs: list[tuple[float, float]]) -> Optional[float]:
        if not pairs:
            return None
        predicted, expected = zip(*pairs)
        return mape(list(predicted), list(expected))

    return PropertyReport(
        material=material,
        features=rows,
        mape_all=_subset(scored_all),
        mape_energy=_subset(scored_energy),
        scored=len(scored_all),
    )


__all__ = [
    "BULK_VALENCE_BANDS",
    "MASS_DIRECTIONS",
    "ENERGY_FEATURE_INDEX",
    "second_derivative",
    "mass_from_curvature",
    "mass_from_dispersion",
    "band_curvatures",
    "effective_mass",
    "hole_masses",
    "critical_point_energies",
    "extract_features",
    "gap_report",
    "bulk_gap_report",
    "cutoff_wavelength",
    "mape",
    "property_report",
]
