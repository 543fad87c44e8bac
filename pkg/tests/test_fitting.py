import json

import numpy as np
import pytest

from app.core.errors import ConstraintError, EigenSolverError, ParameterError, PopulationPenalizedError
from app.models.enums import BandFeature, GapCharacter
from app.schemas.fit import CostSpec, FitConfig, FreeParams, GeneBounds, PropertyTarget, SlTarget
from app.schemas.structure import LayerStack
from app.services.band_properties import extract_features
from app.services.bulk_hamiltonian import band_energies
from app.services.constraints import expand
from app.services.cost import CostModel, cost, weighted_bulk_error
from app.services.fitting import (
    GenomeLayout,
    GenomeRepair,
    build_optimizer,
    estimate_runtime,
    evaluate_fit,
    ga_fit,
    gene_bounds,
    layout_for,
    load_fit_file,
    resolve_cost_spec,
    validate_fit_setup,
)
from app.services.genetic import PENALTY
from app.services.references import default_cost_spec, holdout_superlattices, load_anchors
from app.services.superlattice import gamma_sample, sl_gap

TINY = dict(population_size=8, generations=2, seed=5, log_every=1)


def _reference_genome(material):
    return {material.name: FreeParams.from_oips(material.oips)}


def _self_targets(material, shift=None):
    oips = expand(FreeParams.from_oips(material.oips), load_anchors(material.name))
    features = extract_features(oips, material.lattice_constant)
    targets = []
    for feature in (BandFeature.GAMMA_6C, BandFeature.X6C, BandFeature.M_GAMMA):
        value = features[feature]
        if shift is not None and feature is shift[0]:
            value += shift[1]
        targets.append(PropertyTarget(feature=feature, target=value, weight=shift[2] if shift else 1.0))
    return targets


def _bulk_spec(material, targets):
    return CostSpec(bulk_targets={material.name: targets}, anchors={material.name: load_anchors(material.name)})


def test_cost_vanishes_when_targets_are_the_computed_features(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))

    assert cost(_reference_genome(gaas), spec, database) == 0.0


@pytest.mark.parametrize("weight", [1.0, 1.0e3, 1.0e5])
def test_cost_is_weight_times_error(database, gaas, weight):
    epsilon = 0.01
    spec = _bulk_spec(gaas, _self_targets(gaas, shift=(BandFeature.X6C, epsilon, weight)))

    assert cost(_reference_genome(gaas), spec, database) == pytest.approx(weight * epsilon, rel=1e-6)


def test_missing_target_contributes_nothing():
    features = {BandFeature.GAMMA_6C: 1.5, BandFeature.L7V: -1.2}
    targets = {BandFeature.GAMMA_6C: (1.4, 10.0), BandFeature.L7V: (None, 1e6)}

    assert weighted_bulk_error(features, targets) == pytest.approx(1.0)


def test_infeasible_genome_is_penalized(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))
    genome = {"GaAs": FreeParams.from_oips(gaas.oips).model_copy(update={"e_sa": 2.0})}
    breakdown = CostModel(spec, database).evaluate(genome)

    assert not breakdown.feasible
    assert breakdown.total > PENALTY
    assert "E_g" in breakdown.reason


def test_superlattice_term_uses_the_fitted_parameters(database, gaas, alas):
    stack = LayerStack.binary("GaAs", 1, "GaAs", 1)
    spec = CostSpec(
        bulk_targets={},
        sl_targets=[SlTarget(stack=stack, gap=1.5, weight=2.0)],
        anchors={"GaAs": load_anchors("GaAs")},
    )
    breakdown = CostModel(spec, database).evaluate(_reference_genome(gaas))

    assert breakdown.feasible
    assert breakdown.superlattice[0] == pytest.approx(2.0 * (1.5 - 1.4239), abs=2e-3)


def test_cost_spec_requires_anchors_for_fitted_materials(gaas):
    with pytest.raises(ValueError):
        CostSpec(bulk_targets={"GaAs": _self_targets(gaas)}, anchors={})


def test_layout_round_trip_and_missing_gene(gaas, alas):
    layout = GenomeLayout(materials=("GaAs", "AlAs"), genes=FreeParams.gene_names(True))
    genome = {m.name: FreeParams.from_oips(m.oips) for m in (gaas, alas)}
    vector = layout.encode(genome)

    assert layout.size == 20 and vector.shape == (20,)
    assert layout.decode(vector) == genome
    with pytest.raises(ParameterError, match="e_pa"):
        layout.encode({"GaAs": FreeParams.from_oips(gaas.oips, False), "AlAs": genome["AlAs"]})


def test_layout_drops_e_pa_when_it_is_derived(gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))

    assert "e_pa" in layout_for(spec, FitConfig()).genes
    assert "e_pa" not in layout_for(spec, FitConfig(use_eq5=True)).genes


def test_bounds_preserve_the_sign_of_every_gene(database):
    layout = GenomeLayout(materials=("GaAs", "AlAs"), genes=FreeParams.gene_names(True))
    low, high = gene_bounds(layout, database, FitConfig())
    reference = np.concatenate(
        [[getattr(database.get(name).oips, gene) for gene in layout.genes] for name in layout.materials]
    )

    assert np.all(low < reference) and np.all(reference < high)
    assert np.all(np.sign(low) == np.sign(reference))
    assert np.all(np.sign(high) == np.sign(reference))


def test_bound_overrides(database):
    layout = GenomeLayout(materials=("GaAs",), genes=FreeParams.gene_names(True))
    cfg = FitConfig(bounds={"GaAs": {"e_sa": GeneBounds(low=-5.0, high=-4.5)}})
    low, high = gene_bounds(layout, database, cfg)

    assert (low[0], high[0]) == (-5.0, -4.5)
    with pytest.raises(ValueError):
        FitConfig(bounds={"GaAs": {"e_bogus": GeneBounds(low=0.0, high=1.0)}})


def test_setup_with_infeasible_anchors_is_rejected(database, gaas):
    anchors = load_anchors("GaAs").model_copy(update={"e_g": -7.0})
    spec = CostSpec(bulk_targets={}, anchors={"GaAs": anchors})

    with pytest.raises(ConstraintError):
        validate_fit_setup(spec, FitConfig(), database)


def test_ga_fit_on_a_tiny_problem(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))
    seen = []
    result = ga_fit(spec, FitConfig(**TINY), database, progress=lambda g, best: seen.append(best))

    assert len(result.history) == 3
    assert result.best_cost == result.history[-1]
    assert seen == result.history[1:]
    assert set(result.oips) == {"GaAs"}
    assert result.evaluations == 8 + 2 * 7


def test_ga_fit_is_reproducible(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))

    first = ga_fit(spec, FitConfig(**TINY), database)
    second = ga_fit(spec, FitConfig(**TINY), database)
    assert first.model_dump() == second.model_dump()


def test_ga_fit_does_not_depend_on_worker_count(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))

    serial = ga_fit(spec, FitConfig(**TINY), database)
    parallel = ga_fit(spec, FitConfig(**TINY, workers=2), database)
    assert parallel.history == serial.history
    assert parallel.best_free == serial.best_free


def test_evaluate_fit_scores_holdout(database, gaas):
    holdout = [SlTarget(stack=LayerStack.binary("GaAs", 1, "GaAs", 1), gap=1.5)]
    report = evaluate_fit({"GaAs": gaas.oips}, holdout, database, sampling="gamma")

    row = report.rows[0]
    assert row.label == "(GaAs)1/(GaAs)1"
    assert row.character is GapCharacter.DIRECT
    assert report.mape == pytest.approx(row.abs_pct_error)
    assert row.abs_pct_error == pytest.approx(100 * (1.5 - 1.4239) / 1.5, abs=0.2)
    assert report.sampling == "gamma"


def test_evaluate_fit_with_empty_holdout(gaas):
    report = evaluate_fit({"GaAs": gaas.oips}, [], sampling="axial")

    assert report.rows == [] and report.mape is None
    assert report.sampling == "axial"


def test_runtime_estimate_counts_every_generation(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))
    estimate = estimate_runtime(spec, FitConfig(population_size=100, generations=9), database, samples=2)

    assert estimate.evaluations == 1000
    assert estimate.estimated_seconds == pytest.approx(estimate.seconds_per_evaluation * 1000)


def test_shipped_fit_files():
    default = load_fit_file()
    smoke = load_fit_file(smoke=True)

    assert (default.ga.population_size, default.ga.generations) == (10_000, 453)
    assert (smoke.ga.population_size, smoke.ga.generations, smoke.ga.seed) == (200, 50, 42)
    assert smoke.ga.bound_fraction == default.ga.bound_fraction
    assert (default.ga.mutation_decay, smoke.ga.mutation_decay) == (1.0, 2.0)
    assert resolve_cost_spec(default).materials == ["GaAs", "AlAs"]


def test_invalid_fit_file(tmp_path):
    broken = tmp_path / "fit.json"
    broken.write_text(json.dumps({"ga": {"population_size": 1}}), encoding="utf-8")

    with pytest.raises(ParameterError, match="invalid fit config"):
        load_fit_file(broken)
    with pytest.raises(ParameterError, match="cannot read"):
        load_fit_file(tmp_path / "missing.json")


def test_default_cost_is_the_hand_summed_weighted_error(database):
    spec = default_cost_spec()
    genome = {name: FreeParams.from_oips(database.get(name).oips) for name in spec.materials}
    oips = {name: expand(genome[name], spec.anchors[name]) for name in spec.materials}

    expected = 0.0
    for name, targets in spec.bulk_targets.items():
        features = extract_features(oips[name], database.get(name).lattice_constant)
        for target in targets:
            if target.target is not None:
                expected += target.weight * abs(features[target.feature] - target.target)
    fitted = database.with_oips(oips)
    for target in spec.sl_targets:
        expected += target.weight * abs(sl_gap(target.stack, gamma_sample(), fitted).gap - target.gap)

    breakdown = CostModel(spec, database).evaluate(genome)
    assert breakdown.feasible
    assert breakdown.total == pytest.approx(expected, rel=1e-9)
    assert len(breakdown.superlattice) == len(spec.sl_targets) == 2


def test_repair_makes_an_infeasible_genome_expandable(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))
    layout = layout_for(spec, FitConfig())
    infeasible = {"GaAs": FreeParams.from_oips(gaas.oips).model_copy(update={"e_sc": 2.5, "e_pa": -1.0})}
    vector = layout.encode(infeasible)

    with pytest.raises(ConstraintError):
        expand(infeasible["GaAs"], spec.anchors["GaAs"])
    repaired = layout.decode(GenomeRepair(layout, spec.anchors)(vector))
    expand(repaired["GaAs"], spec.anchors["GaAs"])
    assert repaired["GaAs"].e_xayc == infeasible["GaAs"].e_xayc


def test_evolved_population_keeps_the_gamma_pins(database, gaas):
    spec = _bulk_spec(gaas, _self_targets(gaas))
    # part of this e_sc box lies above E_g; only repaired genomes expand there
    bounds = {"GaAs": {"e_sc": GeneBounds(low=-3.0, high=3.0)}}
    cfg = FitConfig(population_size=40, generations=3, seed=9, mutation_rate=0.5, bounds=bounds)
    optimizer, layout, model = build_optimizer(spec, cfg, database)
    outcome = optimizer.run()
    anchors = spec.anchors["GaAs"]

    assert isinstance(optimizer.repair, GenomeRepair)
    assert np.all(outcome.population[:, layout.genes.index("e_sc")] < anchors.e_g)
    for row in outcome.population[:100]:
        oips = model.expand_genome(layout.decode(row))["GaAs"]
        levels = band_energies(oips, (0.0, 0.0, 0.0), gaas.lattice_constant)
        for pinned in (anchors.e_g, 0.0, -anchors.delta):
            assert np.min(np.abs(levels - pinned)) < 1e-9
        assert np.sum(np.abs(levels) < 1e-9) >= 2


def _sl_only_spec():
    stack = LayerStack.binary("GaAs", 1, "GaAs", 1)
    return CostSpec(sl_targets=[SlTarget(stack=stack, gap=1.5)], anchors={"GaAs": load_anchors("GaAs")})


def test_unexpected_cost_failure_stops_the_fit(database, monkeypatch):
    def broken(*args, **kwargs):
        raise ValueError("operands could not be broadcast together with shapes (3,3) (5,5)")

    monkeypatch.setattr("app.services.cost.sl_gap", broken)

    with pytest.raises(ValueError, match="broadcast"):
        ga_fit(_sl_only_spec(), FitConfig(**TINY), database)


def test_fit_with_no_fit_genome_raises(database, monkeypatch):
    def failing(stack, *args, **kwargs):
        raise EigenSolverError("no convergence", dim=20)

    monkeypatch.setattr("app.services.cost.sl_gap", failing)

    with pytest.raises(PopulationPenalizedError):
        ga_fit(_sl_only_spec(), FitConfig(**TINY), database)


def test_shipped_parameters_on_the_published_holdout(database):
    oips = {material.name: material.oips for material in database}
    report = evaluate_fit(oips, holdout_superlattices(), database)

    assert report.sampling == "gamma"
    assert len(report.rows) == 6
    assert report.mape == pytest.approx(2.61, abs=0.3)
