import logging

import numpy as np
import pytest

from app.core.errors import DomainError, ParameterError, PopulationPenalizedError
from app.services.genetic import PENALTY, GAConfig, GeneticOptimizer, SafeFitness

LOW = np.full(3, -5.0)
HIGH = np.full(3, 5.0)


def sphere(vector):
    return float(np.sum(vector**2))


def _run(seed=7, **overrides):
    config = GAConfig(population_size=100, generations=60, seed=seed, log_every=20, **overrides)
    return GeneticOptimizer(sphere, LOW, HIGH, config).run()


def test_sphere_converges_near_the_origin():
    outcome = _run()

    assert outcome.best_cost < 0.1
    assert np.all(np.abs(outcome.best_vector) < 0.5)


def test_same_seed_same_run():
    first = _run(seed=3)
    second = _run(seed=3)

    np.testing.assert_array_equal(first.best_vector, second.best_vector)
    assert first.fitness_history == second.fitness_history


def test_different_seed_different_start():
    assert _run(seed=1).fitness_history[0] != _run(seed=2).fitness_history[0]


def test_elitism_keeps_history_monotone():
    outcome = _run()

    assert len(outcome.fitness_history) == 61
    assert all(b <= a for a, b in zip(outcome.fitness_history, outcome.fitness_history[1:]))
    assert outcome.best_cost == outcome.fitness_history[-1]


def test_evaluation_count_skips_elites():
    config = GAConfig(population_size=50, generations=4, seed=0, elitism_rate=0.1)
    outcome = GeneticOptimizer(sphere, LOW, HIGH, config).run()

    assert config.elite_count == 5
    assert outcome.evaluations == 50 + 4 * 45


def test_children_stay_inside_the_box():
    outcome = _run(mutation_rate=0.9, mutation_strength=1.0)

    assert np.all(outcome.population >= LOW)
    assert np.all(outcome.population <= HIGH)


def test_progress_callback_sees_every_generation():
    seen = []
    config = GAConfig(population_size=10, generations=5, seed=0)
    GeneticOptimizer(sphere, LOW, HIGH, config).run(progress=lambda g, best: seen.append(g))

    assert seen == [1, 2, 3, 4, 5]


@pytest.mark.parametrize(
    "low, high",
    [
        (np.array([0.0, 1.0]), np.array([1.0, 1.0])),
        (np.array([0.0]), np.array([1.0, 2.0])),
        (np.array([]), np.array([])),
        (np.array([0.0]), np.array([np.inf])),
    ],
)
def test_invalid_bounds(low, high):
    with pytest.raises(ParameterError):
        GeneticOptimizer(sphere, low, high, GAConfig(population_size=10, generations=1))


def test_invalid_population():
    with pytest.raises(ParameterError):
        GeneticOptimizer(sphere, LOW, HIGH, GAConfig(population_size=1, generations=1))


def test_unfit_genomes_become_the_penalty():
    def outside(vector):
        raise DomainError("genome outside the model domain")

    assert SafeFitness(outside)(np.zeros(3)) == PENALTY
    assert SafeFitness(lambda v: float("nan"))(np.zeros(3)) == PENALTY
    assert SafeFitness(sphere)(np.ones(3)) == 3.0


def test_programming_errors_propagate():
    def broken(vector):
        raise RuntimeError("operands could not be broadcast together")

    with pytest.raises(RuntimeError, match="broadcast"):
        SafeFitness(broken)(np.zeros(3))
    with pytest.raises(RuntimeError, match="broadcast"):
        GeneticOptimizer(broken, LOW, HIGH, GAConfig(population_size=4, generations=1)).run()


def test_all_penalized_start_aborts_the_run():
    def unfit(vector):
        raise ParameterError("no feasible expansion")

    with pytest.raises(PopulationPenalizedError) as excinfo:
        GeneticOptimizer(unfit, LOW, HIGH, GAConfig(population_size=6, generations=2)).run()
    assert excinfo.value.population_size == 6


def test_partly_penalized_start_is_logged_and_evolves(caplog):
    def half_space(vector):
        if vector[0] < 0:
            raise ParameterError("negative first gene")
        return sphere(vector)

    with caplog.at_level(logging.WARNING):
        outcome = GeneticOptimizer(half_space, LOW, HIGH, GAConfig(population_size=40, generations=5, seed=2)).run()

    assert "initial genomes are unfit" in caplog.text
    assert outcome.best_cost < PENALTY


def test_repair_runs_on_every_child():
    config = GAConfig(population_size=30, generations=4, seed=1, mutation_rate=0.9, mutation_strength=0.5)
    outcome = GeneticOptimizer(sphere, LOW, HIGH, config, repair=lambda v: np.maximum(v, 1.0)).run()

    assert np.all(outcome.population >= 1.0)


def test_mutation_step_decays_over_the_run():
    constant = GAConfig(generations=10)
    decaying = GAConfig(generations=10, mutation_decay=2.0)

    assert constant.mutation_scale(10) == 1.0
    assert decaying.mutation_scale(1) == 1.0
    assert decaying.mutation_scale(10) == pytest.approx(0.01)
    assert decaying.mutation_scale(6) < decaying.mutation_scale(5)
