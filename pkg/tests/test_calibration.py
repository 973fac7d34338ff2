import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tradenet.calibration import (
    GENE_ORDER,
    GAConfig,
    evaluate,
    ga_run,
    genome_to_params,
    normalized_params,
    params_to_genome,
)
from tradenet.domain import GlobalParams
from tradenet.errors import TradenetError

from conftest import neutral_params


def test_gene_order_round_trip():
    genome = np.arange(10, dtype=float)
    params = genome_to_params(genome)
    assert params_to_genome(params).tolist() == genome.tolist()
    assert GENE_ORDER[0] == "n_social" and GENE_ORDER[3] == "w_debts"


def test_planted_params_evaluate_to_one(recovery_data):
    dataset, truth = recovery_data
    assert evaluate(truth.params, dataset, truth.seed) == 1.0


def test_evaluate_is_pure(recovery_data):
    dataset, truth = recovery_data
    p = neutral_params()
    values = {evaluate(p, dataset, 5) for _ in range(3)}
    assert len(values) == 1


def test_all_zero_weights_give_zero_fitness(recovery_data):
    dataset, _ = recovery_data
    zero = GlobalParams(*([0.0] * 10))
    assert evaluate(zero, dataset, 0) == 0.0


def test_replications_average_over_seeds(recovery_data):
    dataset, _ = recovery_data
    p = neutral_params()
    singles = [evaluate(p, dataset, 10 + r) for r in range(3)]
    combined = evaluate(p, dataset, 10, replications=3)
    assert combined == pytest.approx(sum(singles) / 3)


def test_config_validation():
    GAConfig().validate()
    with pytest.raises(TradenetError):
        GAConfig(population_size=1).validate()
    with pytest.raises(TradenetError):
        GAConfig(elitism_fraction=0.0).validate()  # 0 * pop < 1
    with pytest.raises(TradenetError):
        GAConfig(population_size=4, elitism_fraction=0.1).validate()
    with pytest.raises(TradenetError):
        GAConfig(mutation_rate=0.0).validate()
    with pytest.raises(TradenetError):
        GAConfig(crossover="two_point").validate()


def test_single_generation_returns_best_of_initial_population(recovery_data):
    dataset, _ = recovery_data
    config = GAConfig(population_size=10, generations=1, elitism_fraction=0.2, seed=3, eval_seed=1)
    best, trace = ga_run(dataset, config)
    assert len(trace) == 1
    rng = np.random.default_rng(3)
    initial = rng.uniform(0.0, 100.0, size=(10, 10))
    fits = [evaluate(genome_to_params(g), dataset, 1) for g in initial]
    assert max(fits) == trace.best[0]
    assert params_to_genome(best).tolist() == initial[int(np.argmax(fits))].tolist()


def test_elitism_makes_best_fitness_non_decreasing(recovery_data):
    dataset, _ = recovery_data
    for seed in (0, 1, 2):
        config = GAConfig(
            population_size=12, generations=15, elitism_fraction=0.25, seed=seed, eval_seed=7
        )
        _, trace = ga_run(dataset, config)
        assert all(a <= b for a, b in zip(trace.best, trace.best[1:]))


def test_ga_run_is_deterministic(recovery_data):
    dataset, _ = recovery_data
    config = GAConfig(population_size=8, generations=5, elitism_fraction=0.25, seed=11, eval_seed=2)
    best1, trace1 = ga_run(dataset, config)
    best2, trace2 = ga_run(dataset, config)
    assert vars(best1) == vars(best2)
    assert trace1.best == trace2.best


def test_workers_do_not_change_the_result(recovery_data):
    dataset, _ = recovery_data
    config = GAConfig(population_size=8, generations=4, elitism_fraction=0.25, seed=4, eval_seed=2)
    best1, trace1 = ga_run(dataset, config, workers=1)
    best8, trace8 = ga_run(dataset, config, workers=8)
    assert vars(best1) == vars(best8)
    assert trace1.best == trace8.best and trace1.mean == trace8.mean


@given(st.integers(0, 2**32 - 1))
@settings(max_examples=25, deadline=None)
def test_operators_respect_bounds(seed):
    # one full breeding cycle with extreme parents stays inside the box
    rng = np.random.default_rng(seed)
    lo, hi = 0.0, 100.0
    parents = rng.choice([lo, hi], size=(2, 10))
    take = rng.random(10) < 0.5
    child = np.where(take, parents[0], parents[1])
    mutate = rng.random(10) < 0.5
    child = np.clip(child + mutate * rng.normal(0, 50.0, 10), lo, hi)
    assert ((child >= lo) & (child <= hi)).all()


def test_ga_population_stays_in_bounds(recovery_data):
    dataset, _ = recovery_data
    config = GAConfig(
        population_size=10,
        generations=8,
        elitism_fraction=0.2,
        mutation_sigma=80.0,
        seed=9,
        eval_seed=3,
    )
    _, trace = ga_run(dataset, config)
    for genome in trace.best_genome:
        assert ((genome >= 0.0) & (genome <= 100.0)).all()


def test_scale_invariant_fitness(recovery_data):
    dataset, truth = recovery_data
    half = GlobalParams(
        truth.params.n_social,
        *(getattr(truth.params, f) * 0.5 for f in GENE_ORDER[1:5]),
        *(getattr(truth.params, f) * 0.5 for f in GENE_ORDER[5:]),
    )
    assert evaluate(half, dataset, truth.seed) == evaluate(truth.params, dataset, truth.seed)


def test_normalized_params_sum_to_100():
    p = neutral_params(w_price=10.0, w_dist=30.0, w_debts=50.0, w_social=10.0)
    norm = normalized_params(p)
    assert norm.w_price + norm.w_dist + norm.w_debts + norm.w_social == pytest.approx(100.0)
    total_social = (
        norm.w_s_education
        + norm.w_s_ethnicity
        + norm.w_s_activegroup
        + norm.w_s_prestigious_job
        + norm.w_s_proximity
    )
    assert total_social == pytest.approx(100.0)
    assert norm.n_social == p.n_social
    # ratios preserved
    assert norm.w_debts / norm.w_price == pytest.approx(5.0)


def test_weight_recovery_smoke(recovery_data):
    # the full 10-run recovery experiment lives in the acceptance suite; this
    # is a single faster run
    dataset, truth = recovery_data
    config = GAConfig(population_size=30, generations=60, eval_seed=truth.seed, seed=123)
    best, trace = ga_run(dataset, config)
    assert max(trace.best) >= 0.8
    mains = {f: getattr(best, f) for f in ("w_price", "w_dist", "w_debts", "w_social")}
    assert max(mains, key=mains.get) == "w_debts"
