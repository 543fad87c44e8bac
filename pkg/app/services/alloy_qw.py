from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from typing import Dict, Iterable, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from app.core.errors import DomainError
from app.schemas.kpoint import KLike
from app.schemas.material import OIP_FIELDS, Material, OipSet
from app.schemas.reports import GapReport
from app.schemas.structure import AlloySpec, LayerSpec, LayerStack, QwSpec, SlOptions
from app.services.band_properties import cutoff_wavelength
from app.services.materials import MaterialDatabase
from app.services.superlattice import gamma_sample, sl_gap

logger = logging.getLogger(__name__)

BARRIER_CONVERGENCE_TOL = 1.0e-3


def _mix(low: float, high: float, x: float) -> float:
    return (1.0 - x) * low + x * high


def _check_fraction(x: float) -> None:
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"alloy fraction must lie in [0, 1], got {x}")


def vegard_oips(spec: AlloySpec) -> OipSet:
    """Component-wise linear interpolation, exact at both endpoints."""
    _check_fraction(spec.x)
    low, high = spec.endpoints
    return OipSet(**{name: _mix(getattr(low.oips, name), getattr(high.oips, name), spec.x) for name in OIP_FIELDS})


def vegard_material(spec: AlloySpec) -> Material:
    _check_fraction(spec.x)
    low, high = spec.endpoints
    ratio = None
    if low.elastic_ratio is not None and high.elastic_ratio is not None:
        ratio = _mix(low.elastic_ratio, high.elastic_ratio, spec.x)
    return Material(
        name=spec.name,
        lattice_constant=_mix(low.lattice_constant, high.lattice_constant, spec.x),
        oips=vegard_oips(spec),
        anion=low.anion,
        cation=None,
        elastic_ratio=ratio,
    )


class QwGapReport(GapReport):
    barrier_converged: bool = True
    barrier_shift: float = 0.0


class SweepRow(BaseModel):
    thickness_ml: int
    x: float
    gap_ev: float
    cutoff_um: float


def qw_stack(spec: QwSpec, barrier_thickness: Optional[int] = None) -> LayerStack:
    thickness = barrier_thickness or spec.barrier_thickness
    return LayerStack(
        layers=[
            LayerSpec(material=spec.well.name, monolayers=spec.well_thickness),
            LayerSpec(material=spec.barrier.name, monolayers=thickness),
        ]
    )


def qw_gap(
    spec: QwSpec,
    database: Optional[MaterialDatabase] = None,
    k_samples: Optional[Mapping[str, KLike]] = None,
    options: Optional[SlOptions] = None,
    *,
    check_barrier: bool = True,
) -> QwGapReport:
    """
    Gap of a well modelled as a periodic well/barrier stack. With
    ``check_barrier`` the barrier is doubled and the gap must move by less
    than 1 meV, otherwise a warning is logged and the report is flagged.
    """
    database = (database or MaterialDatabase([spec.well])).with_material(spec.well)
    database = database.with_material(vegard_material(spec.barrier))
    options = options or SlOptions(substrate=spec.well.name)
    samples = k_samples if k_samples is not None else gamma_sample()

    report = sl_gap(qw_stack(spec), samples, database, options)
    converged, shift = True, 0.0
    if check_barrier:
        thick = sl_gap(qw_stack(spec, 2 * spec.barrier_thickness), samples, database, options)
        shift = abs(thick.gap - report.gap)
        converged = shift < BARRIER_CONVERGENCE_TOL
        if not converged:
            logger.warning(
                "barrier of %d ML not converged for well %d ML, x=%.3g: doubling it moves the gap by %.2f meV",
                spec.barrier_thickness,
                spec.well_thickness,
                spec.barrier.x,
                shift * 1e3,
            )
    return QwGapReport(**report.model_dump(), barrier_converged=converged, barrier_shift=shift)


def _sweep_cell(args: tuple) -> SweepRow:
    well, high, thickness, x, barrier_thickness, check_barrier = args
    spec = QwSpec(
        well=well,
        barrier=AlloySpec(x=x, endpoints=(well, high)),
        well_thickness=thickness,
        barrier_thickness=barrier_thickness,
    )
    report = qw_gap(spec, check_barrier=check_barrier)
    return SweepRow(thickness_ml=thickness, x=x, gap_ev=report.gap, cutoff_um=cutoff_wavelength(report.gap))


def cutoff_sweep(
    thicknesses: Iterable[int],
    xs: Iterable[float],
    *,
    well: Material,
    alloying: Material,
    barrier_thickness: int,
    check_barrier: bool = False,
    workers: int = 1,
) -> List[SweepRow]:
    """One row per (x, thickness) cell, grouped by x so each series is contiguous."""
    xs = list(xs)
    thicknesses = list(thicknesses)
    for x in xs:
        _check_fraction(x)
    if not thicknesses or any(t < 1 for t in thicknesses):
        raise DomainError(f"well thicknesses must be positive monolayer counts, got {thicknesses}")
    if barrier_thickness < 1:
        raise DomainError(f"barrier thickness must be positive, got {barrier_thickness}")
    cells = [(well, alloying, t, x, barrier_thickness, check_barrier) for x, t in product(xs, thicknesses)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_cell, cells))
    else:
        rows = [_sweep_cell(cell) for cell in cells]
    logger.info("cutoff sweep finished: %d cells", len(rows))
    return rows


def check_sweep_trends(rows: Sequence[SweepRow]) -> List[str]:
    """Cells where the cutoff does not grow with thickness or shrink with x."""
    problems: List[str] = []
    by_x: Dict[float, List[SweepRow]] = {}
    for row in rows:
        by_x.setdefault(row.x, []).append(row)
    for x, series in by_x.items():
        series = sorted(series, key=lambda r: r.thickness_ml)
        for prev, cur in zip(series, series[1:]):
            if not cur.cutoff_um > prev.cutoff_um:
                problems.append(f"x={x:g}: cutoff not increasing from {prev.thickness_ml} to {cur.thickness_ml} ML")
    by_t: Dict[int, List[SweepRow]] = {}
    for row in rows:
        by_t.setdefault(row.thickness_ml, []).append(row)
    for t, series in by_t.items():
        series = sorted(series, key=lambda r: r.x)
        for prev, cur in zip(series, series[1:]):
            if not cur.cutoff_um < prev.cutoff_um:
                problems.append(f"t={t} ML: cutoff not decreasing from x={prev.x:g} to x={cur.x:g}")
    return problems


__all__ = [
    "BARRIER_CONVERGENCE_TOL",
    "vegard_oips",
    "vegard_material",
    "QwGapReport",
    "SweepRow",
    "qw_stack",
    "qw_gap",
    "cutoff_sweep",
    "check_sweep_trends",
]
