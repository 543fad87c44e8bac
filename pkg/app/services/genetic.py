from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from app.core.errors import (
    ConstraintError,
    DegenerateBandError,
    DomainError,
    EigenSolverError,
    ParameterError,
    PopulationPenalizedError,
)

logger = logging.getLogger(__name__)

PENALTY = 1.0e9


@dataclass(frozen=True)
class GAConfig:
    """Operator settings of the real-coded genetic algorithm."""

    population_size: int = 10_000
    generations: int = 453
    seed: int = 0
    tournament_size: int = 4
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_strength: float = 0.05
    # exponent of the late-generation shrink of the mutation step; 0 keeps it constant
    mutation_decay: float = 0.0
    elitism_rate: float = 0.02
    max_workers: int = 1
    log_every: int = 10

    @property
    def elite_count(self) -> int:
        if self.elitism_rate <= 0:
            return 0
        return min(self.population_size - 1, max(1, int(round(self.elitism_rate * self.population_size))))

    def mutation_scale(self, generation: int) -> float:
        if self.mutation_decay <= 0:
            return 1.0
        remaining = (self.generations - generation + 1) / self.generations
        return float(remaining**self.mutation_decay)


@dataclass
class GAOutcome:
    best_vector: np.ndarray
    best_cost: float
    fitness_history: List[float]
    evaluations: int
    population: np.ndarray = field(repr=False)
    costs: np.ndarray = field(repr=False)
    elapsed: float = 0.0


# failures that mark a genome as unfit; anything else is a bug and propagates
UNFIT_ERRORS: tuple[type[Exception], ...] = (
    ConstraintError,
    DegenerateBandError,
    DomainError,
    EigenSolverError,
    ParameterError,
)


class SafeFitness:
    """Wraps a fitness callable so unfit genomes and non-finite values become the penalty."""

    def __init__(self, fitness: Callable[[np.ndarray], float]):
        self.fitness = fitness

    def __call__(self, vector: np.ndarray) -> float:
        try:
            value = float(self.fitness(vector))
        except UNFIT_ERRORS as exc:
            logger.debug("genome rejected: %s", exc)
            return PENALTY
        return value if math.isfinite(value) else PENALTY


class GeneticOptimizer:
    """
    Minimizes a fitness over a box. Every random draw comes from a generator
    seeded by (seed, generation, genome index), so the outcome does not depend
    on how evaluations are spread over workers.
    """

    def __init__(
        self,
        fitness: Callable[[np.ndarray], float],
        low: np.ndarray,
        high: np.ndarray,
        config: GAConfig,
        *,
        repair: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self.low = np.asarray(low, dtype=float)
        self.high = np.asarray(high, dtype=float)
        if self.low.shape != self.high.shape or self.low.ndim != 1 or self.low.size == 0:
            raise ParameterError("gene bounds must be matching non-empty 1-d arrays")
        if not (np.all(np.isfinite(self.low)) and np.all(np.isfinite(self.high)) and np.all(self.low < self.high)):
            raise ParameterError("gene bounds must be finite with low < high")
        if config.population_size < 2 or config.generations < 1:
            raise ParameterError("population must be ≥ 2 and generations ≥ 1")
        self.fitness = SafeFitness(fitness)
        self.config = config
        self.repair = repair
        self.evaluations = 0

    @property
    def n_genes(self) -> int:
        return int(self.low.size)

    def _clamp(self, vector: np.ndarray) -> np.ndarray:
        vector = np.clip(vector, self.low, self.high)
        if self.repair is not None:
            vector = np.clip(self.repair(vector), self.low, self.high)
        return vector

    def initialize_population(self) -> np.ndarray:
        rng = np.random.default_rng([self.config.seed, 0])
        population = self.low + (self.high - self.low) * rng.random((self.config.population_size, self.n_genes))
        return np.array([self._clamp(row) for row in population])

    def _evaluate(self, rows: np.ndarray, executor: Optional[ProcessPoolExecutor]) -> np.ndarray:
        self.evaluations += len(rows)
        if executor is None:
            return np.array([self.fitness(row) for row in rows], dtype=float)
        chunk = max(1, len(rows) // (4 * self.config.max_workers))
        # map keeps input order, so the reduce is fixed regardless of scheduling
        return np.fromiter(executor.map(self.fitness, list(rows), chunksize=chunk), dtype=float, count=len(rows))

    def tournament_selection(self, rng: np.random.Generator, costs: np.ndarray) -> int:
        candidates = rng.integers(0, len(costs), size=self.config.tournament_size)
        return int(candidates[np.argmin(costs[candidates])])

    def make_child(self, generation: int, index: int, population: np.ndarray, costs: np.ndarray) -> np.ndarray:
        rng = np.random.default_rng([self.config.seed, generation, index])
        first = self.tournament_selection(rng, costs)
        second = self.tournament_selection(rng, costs)
        child = population[first].copy()
        if rng.random() < self.config.crossover_rate:
            take = rng.random(self.n_genes) < 0.5
            child[take] = population[second][take]
        mutate = rng.random(self.n_genes) < self.config.mutation_rate
        noise = rng.normal(0.0, 1.0, self.n_genes) * self.config.mutation_strength * self.config.mutation_scale(generation) * (self.high - self.low)
        child = np.where(mutate, child + noise, child)
        return self._clamp(child)

    def evolve_generation(
        self,
        generation: int,
        population: np.ndarray,
        costs: np.ndarray,
        executor: Optional[ProcessPoolExecutor],
    ) -> tuple[np.ndarray, np.ndarray]:
        order = np.argsort(costs, kind="stable")
        n_elite = self.config.elite_count
        offspring = np.empty_like(population)
        new_costs = np.empty_like(costs)
        offspring[:n_elite] = population[order[:n_elite]]
        new_costs[:n_elite] = costs[order[:n_elite]]
        for index in range(n_elite, len(population)):
            offspring[index] = self.make_child(generation, index, population, costs)
        new_costs[n_elite:] = self._evaluate(offspring[n_elite:], executor)
        return offspring, new_costs

    def run(self, progress: Optional[Callable[[int, float], None]] = None) -> GAOutcome:
        cfg = self.config
        start = time.perf_counter()
        logger.info(
            "GA start: population=%d generations=%d genes=%d seed=%d workers=%d",
            cfg.population_size,
            cfg.generations,
            self.n_genes,
            cfg.seed,
            cfg.max_workers,
        )
        executor = ProcessPoolExecutor(max_workers=cfg.max_workers) if cfg.max_workers > 1 else None
        try:
            population = self.initialize_population()
            costs = self._evaluate(population, executor)
            penalized = int(np.count_nonzero(costs >= PENALTY))
            if penalized == len(costs):
                raise PopulationPenalizedError(len(costs))
            if penalized:
                logger.warning("%d of %d initial genomes are unfit", penalized, len(costs))
            history = [float(np.min(costs))]
            for generation in range(1, cfg.generations + 1):
                population, costs = self.evolve_generation(generation, population, costs, executor)
                history.append(float(np.min(costs)))
                if progress is not None:
                    progress(generation, history[-1])
                if generation % cfg.log_every == 0 or generation == cfg.generations:
                    logger.info(
                        "generation %d/%d best=%.6g mean=%.6g",
                        generation,
                        cfg.generations,
                        history[-1],
                        float(np.mean(costs)),
                    )
        finally:
            if executor is not None:
                executor.shutdown()

        best = int(np.argmin(costs))
        elapsed = time.perf_counter() - start
        logger.info("GA finished in %.2fs after %d evaluations; best cost %.6g", elapsed, self.evaluations, history[-1])
        return GAOutcome(
            best_vector=population[best].copy(),
            best_cost=float(costs[best]),
            fitness_history=history,
            evaluations=self.evaluations,
            population=population,
            costs=costs,
            elapsed=elapsed,
        )


__all__ = ["PENALTY", "UNFIT_ERRORS", "GAConfig", "GAOutcome", "SafeFitness", "GeneticOptimizer"]
