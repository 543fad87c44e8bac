import pytest

from app.core.errors import DomainError
from app.schemas.material import OIP_FIELDS
from app.schemas.structure import AlloySpec, QwSpec
from app.services.alloy_qw import (
    SweepRow,
    check_sweep_trends,
    cutoff_sweep,
    qw_gap,
    qw_stack,
    vegard_material,
    vegard_oips,
)


def test_alloy_name(gaas, alas):
    assert AlloySpec(x=0.3, endpoints=(gaas, alas)).name == "Al0.3Ga0.7As"


def test_vegard_is_exact_at_the_endpoints(gaas, alas):
    assert vegard_oips(AlloySpec(x=0.0, endpoints=(gaas, alas))) == gaas.oips
    assert vegard_oips(AlloySpec(x=1.0, endpoints=(gaas, alas))) == alas.oips


def test_vegard_midpoint(gaas, alas):
    mid = vegard_oips(AlloySpec(x=0.5, endpoints=(gaas, alas)))

    assert mid.e_sa == pytest.approx(-6.46405, abs=1e-9)


@pytest.mark.parametrize("x", [0.1, 0.25, 0.6, 0.9])
def test_vegard_is_linear_in_every_component(gaas, alas, x):
    mixed = vegard_oips(AlloySpec(x=x, endpoints=(gaas, alas)))

    for name in OIP_FIELDS:
        low, high = getattr(gaas.oips, name), getattr(alas.oips, name)
        assert getattr(mixed, name) == pytest.approx(low + x * (high - low), abs=1e-12)


def test_vegard_material_mixes_lattice_and_elastic_ratio(gaas, alas):
    material = vegard_material(AlloySpec(x=0.5, endpoints=(gaas, alas)))

    assert material.lattice_constant == pytest.approx((gaas.lattice_constant + alas.lattice_constant) / 2)
    assert material.elastic_ratio == pytest.approx((gaas.elastic_ratio + alas.elastic_ratio) / 2)
    assert material.anion == "As"


@pytest.mark.parametrize("x", [-0.1, 1.5])
def test_fraction_outside_unit_interval(gaas, alas, x):
    with pytest.raises(DomainError):
        vegard_oips(AlloySpec(x=x, endpoints=(gaas, alas)))


def test_qw_stack_layout(gaas, alas):
    spec = QwSpec(well=gaas, barrier=AlloySpec(x=0.3, endpoints=(gaas, alas)), well_thickness=5, barrier_thickness=8)

    assert qw_stack(spec).key() == (("GaAs", 5), ("Al0.3Ga0.7As", 8))
    assert qw_stack(spec, 16).total_monolayers == 21


def test_gaas_barrier_reduces_to_bulk_gaas(gaas, alas):
    spec = QwSpec(well=gaas, barrier=AlloySpec(x=0.0, endpoints=(gaas, alas)), well_thickness=3, barrier_thickness=3)
    report = qw_gap(spec)

    assert report.gap == pytest.approx(1.424, abs=2e-3)
    assert report.barrier_converged
    assert report.barrier_shift < 1e-6


def test_sweep_rows_are_grouped_by_fraction(gaas, alas):
    rows = cutoff_sweep([2, 3], [0.0], well=gaas, alloying=alas, barrier_thickness=2)

    assert [(r.x, r.thickness_ml) for r in rows] == [(0.0, 2), (0.0, 3)]
    for row in rows:
        assert row.cutoff_um == pytest.approx(0.8707, abs=2e-3)


def test_sweep_rejects_bad_grid(gaas, alas):
    with pytest.raises(DomainError):
        cutoff_sweep([2], [1.2], well=gaas, alloying=alas, barrier_thickness=2)
    with pytest.raises(DomainError):
        cutoff_sweep([], [0.2], well=gaas, alloying=alas, barrier_thickness=2)
    with pytest.raises(DomainError):
        cutoff_sweep([2], [0.2], well=gaas, alloying=alas, barrier_thickness=0)


def _row(t, x, cutoff):
    return SweepRow(thickness_ml=t, x=x, gap_ev=1.23984 / cutoff, cutoff_um=cutoff)


def test_trend_check_accepts_monotone_grid():
    rows = [_row(3, 0.2, 0.80), _row(5, 0.2, 0.83), _row(3, 0.3, 0.75), _row(5, 0.3, 0.78)]

    assert check_sweep_trends(rows) == []


def test_trend_check_reports_each_violation():
    rows = [_row(3, 0.2, 0.80), _row(5, 0.2, 0.79), _row(3, 0.3, 0.81), _row(5, 0.3, 0.78)]
    problems = check_sweep_trends(rows)

    assert any("x=0.2" in p for p in problems)
    assert any("x=0.3" in p for p in problems)
    assert any("t=3 ML" in p for p in problems)
    assert len(problems) == 3
