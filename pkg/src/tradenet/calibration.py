"""Real-coded genetic algorithm over the ten weight parameters, maximizing the
proportion of correctly predicted trading links.

Operators: rank-based parent selection, uniform crossover, per-gene Gaussian
mutation clipped to the bounds, with an elite fraction carried unchanged (so
the best fitness never decreases).
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import simulation
from .domain import (
    MAIN_WEIGHT_FIELDS,
    SOCIAL_WEIGHT_FIELDS,
    GlobalParams,
    round_half_up,
)
from .errors import TradenetError
from .simulation import DEFAULT_MAX_ITER, SimOptions

logger = logging.getLogger(__name__)

GENE_ORDER = (
    "n_social",
    "w_price",
    "w_dist",
    "w_debts",
    "w_social",
    "w_s_education",
    "w_s_ethnicity",
    "w_s_activegroup",
    "w_s_prestigious_job",
    "w_s_proximity",
)
N_GENES = len(GENE_ORDER)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    generations: int = 1000
    elitism_fraction: float = 0.2
    mutation_rate: float = 0.1
    mutation_sigma: float = 10.0
    crossover: str = "uniform"
    bounds: tuple[float, float] = (0.0, 100.0)
    eval_seed: int = 0
    replications_per_candidate: int = 1
    seed: int = 0  # operator randomness (init, selection, crossover, mutation)
    max_iter: int = DEFAULT_MAX_ITER
    options: SimOptions = field(default_factory=SimOptions)

    def validate(self) -> None:
        if self.population_size < 2:
            raise TradenetError("population_size must be >= 2")
        if self.generations < 1:
            raise TradenetError("generations must be >= 1")
        if not 0.0 <= self.elitism_fraction < 1.0:
            raise TradenetError("elitism_fraction must be in [0, 1)")
        if self.elitism_fraction * self.population_size < 1.0:
            raise TradenetError("elitism_fraction * population_size must be >= 1")
        if not 0.0 < self.mutation_rate < 1.0:
            raise TradenetError("mutation_rate must be in (0, 1)")
        if not self.mutation_sigma > 0.0:
            raise TradenetError("mutation_sigma must be > 0")
        if self.crossover != "uniform":
            raise TradenetError(f"unsupported crossover {self.crossover!r}")
        if self.bounds[0] >= self.bounds[1]:
            raise TradenetError("invalid bounds")
        if self.replications_per_candidate < 1:
            raise TradenetError("replications_per_candidate must be >= 1")

    @property
    def n_elite(self) -> int:
        return round_half_up(self.elitism_fraction * self.population_size)


@dataclass
class FitnessTrace:
    """Per-generation fitness statistics and best genome."""

    best: list[float] = field(default_factory=list)
    mean: list[float] = field(default_factory=list)
    worst: list[float] = field(default_factory=list)
    best_genome: list[np.ndarray] = field(default_factory=list)

    def record(self, fitness: np.ndarray, genomes: np.ndarray) -> None:
        i = int(np.argmax(fitness))
        self.best.append(float(fitness[i]))
        self.mean.append(float(fitness.mean()))
        self.worst.append(float(fitness.min()))
        self.best_genome.append(genomes[i].copy())

    def __len__(self) -> int:
        return len(self.best)


def genome_to_params(genome: np.ndarray) -> GlobalParams:
    return GlobalParams(**dict(zip(GENE_ORDER, (float(g) for g in genome))))


def params_to_genome(params: GlobalParams) -> np.ndarray:
    return np.array([getattr(params, g) for g in GENE_ORDER], dtype=np.float64)


def normalized_params(params: GlobalParams) -> GlobalParams:
    """Scale each weight block to sum 100 (final scores are scale-invariant
    within a block, so this is the canonical representative)."""
    out = params
    for group in (MAIN_WEIGHT_FIELDS, SOCIAL_WEIGHT_FIELDS):
        total = sum(getattr(params, f) for f in group)
        if total > 0:
            out = replace(out, **{f: getattr(params, f) / total * 100.0 for f in group})
    return out


def evaluate(
    params: GlobalParams,
    dataset,
    eval_seed: int,
    replications: int = 1,
    options: Optional[SimOptions] = None,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """Fitness of a parameter vector: proportion of correctly predicted links
    (mean over replication seeds). Simulation errors yield fitness 0 so the
    GA never aborts on a degenerate genome."""
    try:
        total = 0.0
        for r in range(replications):
            report = simulation.run(dataset, params, eval_seed + r, max_iter, options)
            total += report.observation.correct_tradings_p
        return total / replications
    except TradenetError as exc:
        logger.warning("fitness set to 0 for invalid candidate: %s", exc)
        return 0.0


def ga_run(
    dataset,
    config: GAConfig,
    workers: int = 1,
) -> tuple[GlobalParams, FitnessTrace]:
    """Run the GA; returns the best-ever parameter vector and the full trace."""
    config.validate()
    lo, hi = config.bounds
    rng = np.random.default_rng(config.seed)
    pop_n = config.population_size

    def eval_genome(genome: np.ndarray) -> float:
        return evaluate(
            genome_to_params(genome),
            dataset,
            config.eval_seed,
            config.replications_per_candidate,
            config.options,
            config.max_iter,
        )

    def eval_many(genomes: np.ndarray) -> np.ndarray:
        if workers > 1 and len(genomes) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return np.fromiter(pool.map(eval_genome, genomes), dtype=float, count=len(genomes))
        return np.fromiter((eval_genome(g) for g in genomes), dtype=float, count=len(genomes))

    population = rng.uniform(lo, hi, size=(pop_n, N_GENES))
    fitness = eval_many(population)
    trace = FitnessTrace()

    # linear rank-based parent probabilities over the sorted population
    rank_probs = np.arange(pop_n, 0, -1, dtype=float)
    rank_probs /= rank_probs.sum()
    n_elite = config.n_elite
    n_children = pop_n - n_elite

    for gen in range(config.generations):
        trace.record(fitness, population)
        if gen == config.generations - 1:
            break
        order = np.argsort(-fitness, kind="stable")
        elites = population[order[:n_elite]]
        elite_fitness = fitness[order[:n_elite]]

        parent_pos = rng.choice(pop_n, size=(n_children, 2), p=rank_probs)
        children = np.empty((n_children, N_GENES))
        for c in range(n_children):
            pa = population[order[parent_pos[c, 0]]]
            pb = population[order[parent_pos[c, 1]]]
            take_a = rng.random(N_GENES) < 0.5
            child = np.where(take_a, pa, pb)
            mutate = rng.random(N_GENES) < config.mutation_rate
            noise = rng.normal(0.0, config.mutation_sigma, N_GENES)
            children[c] = np.clip(child + mutate * noise, lo, hi)

        population = np.vstack([elites, children])
        fitness = np.concatenate([elite_fitness, eval_many(children)])

    best_gen = int(np.argmax(trace.best))
    return genome_to_params(trace.best_genome[best_gen]), trace
