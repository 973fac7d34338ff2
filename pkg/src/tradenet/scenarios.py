"""Policy scenario transformations and replicated scenario runs.

Scenarios modify seller attributes only; agent counts, ids and distances are
never touched.
"""
from __future__ import annotations

import logging
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import metrics, simulation
from .domain import Dataset
from .errors import TradenetError
from .metrics import ScenarioIndicators
from .simulation import DEFAULT_MAX_ITER, SimOptions

logger = logging.getLogger(__name__)

SCENARIO_IDS = ("baseline", "A1", "A2", "B1", "B2", "C")
INDICATOR_NAMES = ScenarioIndicators._fields


def apply_scenario(dataset: Dataset, scenario_id: str) -> Dataset:
    """Return the transformed dataset for one scenario id.

    A1 halves all debts, A2 clears them; B1 lifts education levels 1 and 2 to
    3, B2 lifts every seller to the highest level observed in their village;
    C sets the strictly-below-median half of transport capacities to the mean
    of the original distribution. baseline is the identity.
    """
    if scenario_id == "baseline":
        return dataset
    if scenario_id == "A1":
        sellers = [
            replace(s, debt_by_buyer={b: d * 0.5 for b, d in s.debt_by_buyer.items()})
            for s in dataset.sellers
        ]
    elif scenario_id == "A2":
        sellers = [replace(s, debt_by_buyer={}) for s in dataset.sellers]
    elif scenario_id == "B1":
        sellers = [
            replace(s, education=3) if s.education < 3 else s for s in dataset.sellers
        ]
    elif scenario_id == "B2":
        village_max: dict[int, int] = {}
        for s in dataset.sellers:
            village_max[s.village_id] = max(village_max.get(s.village_id, 1), s.education)
        sellers = [replace(s, education=village_max[s.village_id]) for s in dataset.sellers]
    elif scenario_id == "C":
        transports = np.array([s.transport for s in dataset.sellers], dtype=float)
        mean = float(transports.mean())
        median = float(np.median(transports))
        sellers = [
            replace(s, transport=mean) if s.transport < median else s
            for s in dataset.sellers
        ]
    else:
        raise TradenetError(f"unknown scenario id {scenario_id!r}")
    return dataset.with_sellers(sellers)


@dataclass(frozen=True)
class ScenarioSpec:
    id: str
    replications: int = 20
    base_seed: int = 0

    def validate(self) -> None:
        if self.id not in SCENARIO_IDS:
            raise TradenetError(f"unknown scenario id {self.id!r}")
        if self.replications < 1:
            raise TradenetError("replications must be >= 1")


@dataclass
class ScenarioResult:
    """Per-replication indicators plus their mean/sd summary."""

    scenario: str
    seeds: list[int] = field(default_factory=list)
    indicators: list[ScenarioIndicators] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def summary(self) -> list[tuple[str, str, float, float]]:
        """(scenario, indicator, mean, sd) rows; sd over replications (0 when
        fewer than two succeeded)."""
        rows = []
        for name in INDICATOR_NAMES:
            values = [float(getattr(ind, name)) for ind in self.indicators]
            mean = statistics.fmean(values) if values else float("nan")
            sd = statistics.stdev(values) if len(values) > 1 else 0.0
            rows.append((self.scenario, name, mean, sd))
        return rows


def _one_replication(transformed, params, seed, options, max_iter):
    state = simulation.init_model(transformed, params, seed, options)
    while state.iteration < max_iter and not state.converged:
        simulation.step(state)
    return metrics.scenario_indicators(state)


def run_scenario(
    dataset: Dataset,
    params,
    spec: ScenarioSpec,
    options: Optional[SimOptions] = None,
    max_iter: int = DEFAULT_MAX_ITER,
    workers: int = 1,
) -> ScenarioResult:
    """Run `replications` seeded simulations of one scenario and collect the
    indicators. Replications are independent (parallel when workers > 1);
    per-replication failures are recorded, not fatal."""
    spec.validate()
    transformed = apply_scenario(dataset, spec.id)
    result = ScenarioResult(scenario=spec.id)
    seeds = [spec.base_seed + r for r in range(spec.replications)]

    def work(seed):
        return _one_replication(transformed, params, seed, options, max_iter)

    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(work, seed) for seed in seeds]
            outcomes = []
            for seed, fut in zip(seeds, futures):
                try:
                    outcomes.append((seed, fut.result(), None))
                except TradenetError as exc:
                    outcomes.append((seed, None, exc))
    else:
        outcomes = []
        for seed in seeds:
            try:
                outcomes.append((seed, work(seed), None))
            except TradenetError as exc:
                outcomes.append((seed, None, exc))

    for r, (seed, indicators, error) in enumerate(outcomes):
        if error is not None:
            logger.warning("scenario %s replication %d failed: %s", spec.id, r, error)
            result.errors.append(f"replication {r} (seed {seed}): {error}")
        else:
            result.seeds.append(seed)
            result.indicators.append(indicators)
    return result
