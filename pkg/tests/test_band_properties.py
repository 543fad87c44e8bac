import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.core.constants import CONSTANTS, MASS_STEP_FRACTION
from app.core.errors import DegenerateBandError, DomainError
from app.models.enums import BandFeature, GapCharacter
from app.schemas.fit import PropertyTarget
from app.services.band_properties import (
    MASS_DIRECTIONS,
    bulk_gap_report,
    cutoff_wavelength,
    effective_mass,
    extract_features,
    gap_report,
    mape,
    mass_from_dispersion,
    property_report,
)


def test_free_particle_parabola_gives_unit_mass():
    half = CONSTANTS.hbar2_over_m0 / 2.0

    assert mass_from_dispersion(lambda t: half * t * t, 1e-2) == pytest.approx(1.0, abs=1e-6)
    assert mass_from_dispersion(lambda t: -half * t * t / 0.5, 1e-2) == pytest.approx(-0.5, abs=1e-6)


def test_flat_band_has_no_mass():
    with pytest.raises(DomainError):
        mass_from_dispersion(lambda t: 1.0, 1e-2)


def test_extract_features_covers_every_feature(gaas):
    features = extract_features(gaas.oips, gaas.lattice_constant)

    assert set(features) == set(BandFeature)
    assert len(features) == 23
    assert all(math.isfinite(v) for v in features.values())


def test_gamma_features_of_gaas(gaas):
    features = extract_features(gaas.oips, gaas.lattice_constant)

    assert features[BandFeature.GAMMA_6C] == pytest.approx(1.424, abs=1e-3)
    assert features[BandFeature.DELTA_SO] == pytest.approx(0.340, abs=1e-3)
    assert features[BandFeature.GAMMA_6V] == pytest.approx(-12.224, abs=1e-3)
    assert features[BandFeature.M_GAMMA] > 0
    assert features[BandFeature.M_SO] < 0


def test_gamma_features_of_alas(alas):
    features = extract_features(alas.oips, alas.lattice_constant)

    assert features[BandFeature.GAMMA_6C] == pytest.approx(3.020, abs=1e-3)
    assert features[BandFeature.DELTA_SO] == pytest.approx(0.300, abs=1e-3)


def test_heavy_hole_is_the_flatter_band(gaas):
    features = extract_features(gaas.oips, gaas.lattice_constant)

    for hh, lh in (
        (BandFeature.M_HH_001, BandFeature.M_LH_001),
        (BandFeature.M_HH_011, BandFeature.M_LH_011),
        (BandFeature.M_HH_111, BandFeature.M_LH_111),
    ):
        assert abs(features[hh]) >= abs(features[lh])


def test_conduction_mass_is_invariant_under_direction_flip(gaas):
    a = gaas.lattice_constant
    forward = effective_mass(gaas.oips, a, 4, MASS_DIRECTIONS["111"])
    backward = effective_mass(gaas.oips, a, 4, -MASS_DIRECTIONS["111"])

    assert backward == pytest.approx(forward, rel=1e-9)


def test_conduction_mass_converges_under_step_halving(gaas):
    a = gaas.lattice_constant
    coarse = effective_mass(gaas.oips, a, 4, MASS_DIRECTIONS["001"])
    fine = effective_mass(gaas.oips, a, 4, MASS_DIRECTIONS["001"], step_fraction=MASS_STEP_FRACTION / 2)

    assert abs(fine - coarse) / abs(coarse) < 5e-3


def test_degenerate_band_reports_its_partners(gaas):
    with pytest.raises(DegenerateBandError) as excinfo:
        effective_mass(gaas.oips, gaas.lattice_constant, 2, MASS_DIRECTIONS["001"])

    assert 3 in excinfo.value.indices
    value = effective_mass(gaas.oips, gaas.lattice_constant, 2, MASS_DIRECTIONS["001"], allow_degenerate=True)
    assert np.isfinite(value)


def test_band_index_and_direction_are_checked(gaas):
    with pytest.raises(DomainError):
        effective_mass(gaas.oips, gaas.lattice_constant, 10, MASS_DIRECTIONS["001"])
    with pytest.raises(DomainError):
        effective_mass(gaas.oips, gaas.lattice_constant, 4, (0.0, 0.0, 0.0))


def test_gap_report_flags_indirect_minimum():
    energies = {"Γ": [-1.0, 0.0, 2.0], "X": [-2.0, -0.5, 1.5]}
    report = gap_report(energies, n_valence=2)

    assert report.gap == pytest.approx(1.5)
    assert report.character is GapCharacter.INDIRECT
    assert report.cbm_location == "X"


def test_gap_report_needs_gamma_and_samples():
    with pytest.raises(DomainError):
        gap_report({})
    with pytest.raises(DomainError):
        gap_report({"X": [0.0, 1.0]}, n_valence=1)


def test_gap_report_clamps_overlapping_bands(caplog):
    report = gap_report({"Γ": [-1.0, 0.5, 0.2, 3.0]}, n_valence=2)

    assert report.gap == 0.0
    assert "clamped" in caplog.text


def test_bulk_gaas_gap_is_direct(gaas):
    report = bulk_gap_report(gaas.oips, gaas.lattice_constant)

    assert report.gap == pytest.approx(1.424, abs=1e-3)
    assert report.character is GapCharacter.DIRECT
    assert report.vbm_energy == pytest.approx(0.0, abs=1e-3)


@pytest.mark.parametrize(
    "gap, expected",
    [(1.23984, 1.0), (1.424, 0.87067), (1.75, 0.70848)],
)
def test_cutoff_wavelength(gap, expected):
    assert cutoff_wavelength(gap) == pytest.approx(expected, abs=1e-4)


@pytest.mark.parametrize("gap", [0.0, -1.0, float("nan")])
def test_cutoff_wavelength_needs_positive_gap(gap):
    with pytest.raises(DomainError):
        cutoff_wavelength(gap)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0.1, max_value=5.0), st.floats(min_value=0.1, max_value=5.0))
def test_cutoff_wavelength_decreases_with_gap(a, b):
    if a < b:
        assert cutoff_wavelength(a) > cutoff_wavelength(b)


def test_mape_arithmetic(caplog):
    assert mape([1.0, 2.0], [1.0, 2.0]) == 0.0
    assert mape([1.1, 1.8], [1.0, 2.0]) == pytest.approx(10.0)
    assert mape([1.1, 5.0, 3.0], [1.0, None, 0.0]) == pytest.approx(10.0)
    assert "zero target" in caplog.text


def test_mape_rejects_mismatch_and_nothing_to_score():
    with pytest.raises(DomainError):
        mape([1.0], [1.0, 2.0])
    with pytest.raises(DomainError):
        mape([1.0], [None])


@settings(max_examples=30, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(min_value=-10, max_value=10), st.floats(min_value=0.1, max_value=10)),
        min_size=1,
        max_size=12,
    ),
    st.randoms(use_true_random=False),
)
def test_mape_is_permutation_invariant(pairs, rnd):
    shuffled = list(pairs)
    rnd.shuffle(shuffled)

    original = mape([p for p, _ in pairs], [t for _, t in pairs])
    permuted = mape([p for p, _ in shuffled], [t for _, t in shuffled])
    assert permuted == pytest.approx(original, rel=1e-12)


def test_property_report_skips_missing_targets(gaas):
    features = extract_features(gaas.oips, gaas.lattice_constant)
    targets = [
        PropertyTarget.with_default_weight(BandFeature.GAMMA_6C, 1.5),
        PropertyTarget.with_default_weight(BandFeature.M_GAMMA, features[BandFeature.M_GAMMA]),
        PropertyTarget.with_default_weight(BandFeature.L7V, None),
    ]
    report = property_report("GaAs", features, targets)

    assert report.scored == 2
    assert report.features["L7v"].target is None
    assert report.features["L7v"].abs_error is None
    assert report.features["Γ6c"].abs_error == pytest.approx(abs(features[BandFeature.GAMMA_6C] - 1.5))
    gap_error = 100 * abs(features[BandFeature.GAMMA_6C] - 1.5) / 1.5
    assert report.mape_energy == pytest.approx(gap_error)
    assert report.mape_all == pytest.approx(gap_error / 2)


def test_property_report_without_targets_is_computed_only(gaas):
    features = extract_features(gaas.oips, gaas.lattice_constant)
    report = property_report("GaAs", features)

    assert report.scored == 0
    assert report.mape_all is None
    assert len(report.features) == 23
    assert np.isclose(report.features["Γ6c"].computed, 1.424, atol=1e-3)
