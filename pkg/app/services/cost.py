from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional

from app.core.errors import (
    ConstraintDegenerateError,
    ConstraintInfeasibleError,
    DegenerateBandError,
    DomainError,
    EigenSolverError,
    ParameterError,
)
from app.models.enums import BandFeature, EPaForm
from app.schemas.fit import CostSpec, FreeParams
from app.schemas.kpoint import WaveVector
from app.schemas.material import OipSet
from app.services.band_properties import extract_features
from app.services.constraints import expand
from app.services.genetic import PENALTY
from app.services.materials import MaterialDatabase
from app.services.superlattice import sl_gap, sl_samples

logger = logging.getLogger(__name__)

DEGENERATE_DISTANCE = 1.0e3


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    bulk: Dict[str, float] = field(default_factory=dict)
    superlattice: List[float] = field(default_factory=list)
    feasible: bool = True
    reason: Optional[str] = None


def weighted_bulk_error(
    features: Mapping[BandFeature, float],
    targets: Mapping[BandFeature, tuple[Optional[float], float]],
) -> float:
    """Σ λ|X − X'| over features with a target; missing targets contribute nothing."""
    terms = []
    for feature, (target, weight) in targets.items():
        if target is None:
            continue
        terms.append(weight * abs(features[feature] - target))
    return math.fsum(terms)


class CostModel:
    """
    Weighted bulk-plus-superlattice cost of a genome. Picklable, so it can be
    shipped to worker processes as the fitness function.
    """

    def __init__(
        self,
        spec: CostSpec,
        database: Optional[MaterialDatabase] = None,
        *,
        use_eq5: bool = False,
        e_pa_form: EPaForm = EPaForm.ROUND_TRIP,
    ):
        self.spec = spec
        self.database = database or MaterialDatabase.defaults()
        self.use_eq5 = use_eq5
        self.e_pa_form = e_pa_form
        self._targets = {
            name: {t.feature: (t.target, t.weight) for t in targets} for name, targets in spec.bulk_targets.items()
        }
        for name in spec.materials:
            self.database.get(name)

    @property
    def sl_samples(self) -> Dict[str, WaveVector]:
        return sl_samples(self.spec.sl_sampling)

    def expand_genome(self, genome: Mapping[str, FreeParams]) -> Dict[str, OipSet]:
        return {
            name: expand(genome[name], anchors, use_eq5=self.use_eq5, e_pa_form=self.e_pa_form)
            for name, anchors in self.spec.anchors.items()
        }

    def _penalty(self, genome: Mapping[str, FreeParams], reason: str) -> CostBreakdown:
        distance = 0.0
        for name, anchors in self.spec.anchors.items():
            try:
                expand(genome[name], anchors, use_eq5=self.use_eq5, e_pa_form=self.e_pa_form)
            except ConstraintInfeasibleError as exc:
                distance += exc.distance
            except ConstraintDegenerateError:
                distance += DEGENERATE_DISTANCE
            except ParameterError:
                distance += DEGENERATE_DISTANCE
        return CostBreakdown(total=PENALTY + distance, feasible=False, reason=reason)

    def evaluate(self, genome: Mapping[str, FreeParams]) -> CostBreakdown:
        try:
            oips = self.expand_genome(genome)
        except (ConstraintInfeasibleError, ConstraintDegenerateError, ParameterError) as exc:
            return self._penalty(genome, str(exc))

        try:
            bulk: Dict[str, float] = {}
            for name, targets in self._targets.items():
                lattice = self.database.get(name).lattice_constant
                bulk[name] = weighted_bulk_error(extract_features(oips[name], lattice), targets)

            fitted = self.database.with_oips(oips)
            sl_terms: List[float] = []
            samples = self.sl_samples
            for target in self.spec.sl_targets:
                report = sl_gap(target.stack, samples, fitted, self.spec.sl_options)
                sl_terms.append(target.weight * abs(report.gap - target.gap))
        except (EigenSolverError, DegenerateBandError, DomainError, ParameterError) as exc:
            logger.debug("genome rejected during evaluation: %s", exc)
            return CostBreakdown(total=PENALTY, feasible=False, reason=str(exc))

        total = math.fsum(bulk.values()) + math.fsum(sl_terms)
        if not math.isfinite(total):
            return CostBreakdown(total=PENALTY, feasible=False, reason="non-finite cost")
        return CostBreakdown(total=total, bulk=bulk, superlattice=sl_terms)

    def __call__(self, genome: Mapping[str, FreeParams]) -> float:
        return self.evaluate(genome).total


def cost(
    genome: Mapping[str, FreeParams],
    spec: CostSpec,
    database: Optional[MaterialDatabase] = None,
    *,
    use_eq5: bool = False,
    e_pa_form: EPaForm = EPaForm.ROUND_TRIP,
) -> float:
    return CostModel(spec, database, use_eq5=use_eq5, e_pa_form=e_pa_form)(genome)


__all__ = ["PENALTY", "CostBreakdown", "weighted_bulk_error", "CostModel", "cost"]
