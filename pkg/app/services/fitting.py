from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from app.core.errors import ParameterError
from app.core.json_io import read_json
from app.schemas.fit import ConstraintAnchors, CostSpec, FitConfig, FitFile, FitResult, FreeParams, SlTarget
from app.schemas.material import OipSet
from app.schemas.reports import HoldoutRow, MapeReport
from app.schemas.structure import SlOptions
from app.services.band_properties import mape
from app.services.constraints import repair_free_params
from app.services.cost import CostModel
from app.services.genetic import GAConfig, GeneticOptimizer
from app.services.materials import MaterialDatabase
from app.services.references import FIT_DIR, default_cost_spec
from app.services.superlattice import sl_gap, sl_samples

logger = logging.getLogger(__name__)

DEFAULT_FIT_FILE = FIT_DIR / "default.json"
SMOKE_FIT_FILE = FIT_DIR / "smoke.json"


@dataclass(frozen=True)
class GenomeLayout:
    """Flat gene vector <-> per-material FreeParams."""

    materials: tuple[str, ...]
    genes: tuple[str, ...]

    @property
    def size(self) -> int:
        return len(self.materials) * len(self.genes)

    def decode(self, vector: np.ndarray) -> Dict[str, FreeParams]:
        width = len(self.genes)
        out: Dict[str, FreeParams] = {}
        for i, name in enumerate(self.materials):
            chunk = vector[i * width : (i + 1) * width]
            out[name] = FreeParams(**{gene: float(v) for gene, v in zip(self.genes, chunk)})
        return out

    def encode(self, genome: Mapping[str, FreeParams]) -> np.ndarray:
        values: List[float] = []
        for name in self.materials:
            params = genome[name]
            for gene in self.genes:
                value = getattr(params, gene)
                if value is None:
                    raise ParameterError(f"genome for {name} lacks gene {gene}")
                values.append(float(value))
        return np.array(values)


class GenomeFitness:
    """Picklable fitness: decode the vector and price it with the cost model."""

    def __init__(self, model: CostModel, layout: GenomeLayout):
        self.model = model
        self.layout = layout

    def __call__(self, vector: np.ndarray) -> float:
        return self.model(self.layout.decode(vector))


class GenomeRepair:
    """Picklable repair step: pull each material's genes back into the feasible region."""

    def __init__(self, layout: GenomeLayout, anchors: Mapping[str, ConstraintAnchors], use_eq5: bool = False):
        self.layout = layout
        self.anchors = dict(anchors)
        self.use_eq5 = use_eq5

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        genome = self.layout.decode(vector)
        repaired = {
            name: repair_free_params(params, self.anchors[name], use_eq5=self.use_eq5)
            for name, params in genome.items()
        }
        return self.layout.encode(repaired)


def gene_bounds(
    layout: GenomeLayout, database: MaterialDatabase, cfg: FitConfig
) -> tuple[np.ndarray, np.ndarray]:
    """Sign-preserving ±fraction box around the reference values unless overridden."""
    low, high = [], []
    for name in layout.materials:
        reference = database.get(name).oips
        overrides = cfg.bounds.get(name, {})
        for gene in layout.genes:
            if gene in overrides:
                low.append(overrides[gene].low)
                high.append(overrides[gene].high)
                continue
            value = getattr(reference, gene)
            span = cfg.bound_fraction * abs(value) if value != 0 else cfg.bound_fraction
            low.append(value - span)
            high.append(value + span)
    return np.array(low), np.array(high)


def layout_for(spec: CostSpec, cfg: FitConfig) -> GenomeLayout:
    return GenomeLayout(materials=tuple(spec.materials), genes=FreeParams.gene_names(not cfg.use_eq5))


def ga_settings(cfg: FitConfig) -> GAConfig:
    return GAConfig(
        population_size=cfg.population_size,
        generations=cfg.generations,
        seed=cfg.seed,
        tournament_size=cfg.tournament_size,
        crossover_rate=cfg.crossover_rate,
        mutation_rate=cfg.mutation_rate,
        mutation_strength=cfg.mutation_sigma,
        mutation_decay=cfg.mutation_decay,
        elitism_rate=cfg.elite_fraction,
        max_workers=cfg.workers,
        log_every=cfg.log_every,
    )


def validate_fit_setup(spec: CostSpec, cfg: FitConfig, database: MaterialDatabase) -> CostModel:
    """Cost model for the run; raises when the reference genome cannot be expanded."""
    model = CostModel(spec, database, use_eq5=cfg.use_eq5, e_pa_form=cfg.e_pa_form)
    layout = layout_for(spec, cfg)
    reference = {name: FreeParams.from_oips(database.get(name).oips, not cfg.use_eq5) for name in layout.materials}
    model.expand_genome(reference)
    return model


def build_optimizer(
    spec: CostSpec, cfg: FitConfig, database: MaterialDatabase
) -> tuple[GeneticOptimizer, GenomeLayout, CostModel]:
    """Optimizer over the genome box with constraint repair after every variation step."""
    model = validate_fit_setup(spec, cfg, database)
    layout = layout_for(spec, cfg)
    low, high = gene_bounds(layout, database, cfg)
    optimizer = GeneticOptimizer(
        GenomeFitness(model, layout),
        low,
        high,
        ga_settings(cfg),
        repair=GenomeRepair(layout, spec.anchors, cfg.use_eq5),
    )
    return optimizer, layout, model


def ga_fit(
    spec: CostSpec,
    cfg: FitConfig,
    database: Optional[MaterialDatabase] = None,
    progress: Optional[Callable[[int, float], None]] = None,
) -> FitResult:
    database = database or MaterialDatabase.defaults()
    optimizer, layout, model = build_optimizer(spec, cfg, database)
    outcome = optimizer.run(progress)

    best = layout.decode(outcome.best_vector)
    return FitResult(
        best_free=best,
        oips=model.expand_genome(best),
        best_cost=outcome.best_cost,
        history=outcome.fitness_history,
        seed=cfg.seed,
        evaluations=outcome.evaluations,
        config=cfg,
    )


def evaluate_fit(
    fitted: Union[FitResult, Mapping[str, OipSet]],
    holdout: Sequence[SlTarget],
    database: Optional[MaterialDatabase] = None,
    *,
    options: Optional[SlOptions] = None,
    sampling: str = "gamma",
) -> MapeReport:
    """
    Predict every holdout superlattice gap with the fitted parameters and score
    it. ``sampling`` names the k set of the gap search and is echoed in the report.
    """
    samples = sl_samples(sampling)
    if not holdout:
        return MapeReport(sampling=sampling)
    oips = fitted.oips if isinstance(fitted, FitResult) else dict(fitted)
    database = (database or MaterialDatabase.defaults()).with_oips(oips)
    rows: List[HoldoutRow] = []
    for target in holdout:
        report = sl_gap(target.stack, samples, database, options)
        rows.append(
            HoldoutRow(
                label=target.stack.label,
                predicted=report.gap,
                experimental=target.gap,
                abs_pct_error=100.0 * abs(report.gap - target.gap) / abs(target.gap),
                character=report.character,
            )
        )
    score = mape([r.predicted for r in rows], [r.experimental for r in rows])
    return MapeReport(rows=rows, mape=score, sampling=sampling)


class RuntimeEstimate(BaseModel):
    seconds_per_evaluation: float
    evaluations: int
    workers: int
    estimated_seconds: float


def estimate_runtime(
    spec: CostSpec,
    cfg: FitConfig,
    database: Optional[MaterialDatabase] = None,
    samples: int = 3,
) -> RuntimeEstimate:
    """Time a few cost evaluations and extrapolate to the whole run."""
    database = database or MaterialDatabase.defaults()
    model = validate_fit_setup(spec, cfg, database)
    layout = layout_for(spec, cfg)
    low, high = gene_bounds(layout, database, cfg)
    fitness = GenomeFitness(model, layout)
    rng = np.random.default_rng([cfg.seed, 1])
    start = time.perf_counter()
    for _ in range(samples):
        fitness(low + (high - low) * rng.random(layout.size))
    per_eval = (time.perf_counter() - start) / samples
    evaluations = cfg.population_size * (cfg.generations + 1)
    estimate = RuntimeEstimate(
        seconds_per_evaluation=per_eval,
        evaluations=evaluations,
        workers=cfg.workers,
        estimated_seconds=per_eval * evaluations / cfg.workers,
    )
    logger.info(
        "estimated runtime %.1f h (%d evaluations at %.3g s, %d workers)",
        estimate.estimated_seconds / 3600.0,
        evaluations,
        per_eval,
        cfg.workers,
    )
    return estimate


def load_fit_file(path: Optional[Path] = None, *, smoke: bool = False) -> FitFile:
    """Fit description from disk; ``smoke`` overlays the reduced-scale GA settings."""
    path = Path(path) if path is not None else DEFAULT_FIT_FILE
    try:
        payload = read_json(path)
    except (OSError, ValueError) as exc:
        raise ParameterError(f"cannot read fit config {path}: {exc}") from exc
    if smoke:
        overlay = read_json(SMOKE_FIT_FILE).get("ga", {})
        payload = {**payload, "ga": {**payload.get("ga", {}), **overlay}}
    try:
        return FitFile.model_validate(payload)
    except ValidationError as exc:
        raise ParameterError(f"invalid fit config {path}: {exc}") from exc


def resolve_cost_spec(fit_file: FitFile) -> CostSpec:
    return fit_file.cost if fit_file.cost is not None else default_cost_spec()


__all__ = [
    "DEFAULT_FIT_FILE",
    "SMOKE_FIT_FILE",
    "GenomeLayout",
    "GenomeFitness",
    "GenomeRepair",
    "gene_bounds",
    "layout_for",
    "ga_settings",
    "validate_fit_setup",
    "build_optimizer",
    "ga_fit",
    "evaluate_fit",
    "RuntimeEstimate",
    "estimate_runtime",
    "load_fit_file",
    "resolve_cost_spec",
]
