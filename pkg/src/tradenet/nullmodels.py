"""Baseline selection rules for benchmarking the full model: random choice,
price-only, debts-only, and their variants restricted to the globally
shortest quarter of all trading links."""
from __future__ import annotations

import enum
import math
from typing import Optional

import numpy as np

from . import _kernels, metrics
from .domain import Dataset
from .errors import TradenetError
from .simulation import RunReport, SimOptions, get_context

_MASK64 = (1 << 64) - 1

DISTANCE_QUANTILE = 0.25


class NullModelKind(enum.Enum):
    RANDOM = "random"
    PRICE_ONLY = "price_only"
    DEBTS_ONLY = "debts_only"
    DEBTS_DISTANCE = "debts_distance"
    PRICE_DISTANCE = "price_distance"
    RANDOM_DISTANCE = "random_distance"

    @property
    def distance_restricted(self) -> bool:
        return self in (
            NullModelKind.DEBTS_DISTANCE,
            NullModelKind.PRICE_DISTANCE,
            NullModelKind.RANDOM_DISTANCE,
        )


def shortest_quarter_mask(lengths: np.ndarray) -> np.ndarray:
    """Allowed-link mask: the globally shortest 25% of all links (ties spill
    over the quantile), plus each seller's own shortest link as a fallback so
    no seller is left without an allowed link."""
    total = lengths.size
    kth = math.ceil(DISTANCE_QUANTILE * total)
    threshold = np.partition(lengths.ravel(), kth - 1)[kth - 1]
    allowed = lengths <= threshold
    starved = ~allowed.any(axis=1)
    if starved.any():
        row_min = lengths[starved].min(axis=1, keepdims=True)
        allowed[starved] = lengths[starved] == row_min
    return allowed


def run_null(
    dataset: Dataset,
    kind: NullModelKind | str,
    seed: int,
    options: Optional[SimOptions] = None,
) -> RunReport:
    """One-shot baseline selection: no social pass, no iteration.

    Ties (e.g. equal debts of zero) are resolved uniformly at random from the
    same seeded draw mechanism the simulation uses.
    """
    if isinstance(kind, str):
        try:
            kind = NullModelKind(kind)
        except ValueError as exc:
            raise TradenetError(f"unknown null model kind {kind!r}") from exc
    options = options or SimOptions()
    options.validate()
    ctx = get_context(dataset)
    n, m = ctx.n, ctx.m

    if options.n_buyer_mode == "empirical":
        n_buyer = np.minimum(ctx.n_buyer_emp, m)
    else:
        n_buyer = np.minimum(ctx.n_buyer_regression(), m)

    if kind in (NullModelKind.RANDOM, NullModelKind.RANDOM_DISTANCE):
        scores = np.random.default_rng(seed & _MASK64).random((n, m))
    elif kind in (NullModelKind.PRICE_ONLY, NullModelKind.PRICE_DISTANCE):
        scores = np.broadcast_to(ctx.prices, (n, m)).copy()
    else:
        scores = ctx.debts.copy()

    if kind.distance_restricted:
        allowed = shortest_quarter_mask(ctx.lengths)
        scores = np.where(allowed, scores, -np.inf)
        n_buyer = np.minimum(n_buyer, allowed.sum(axis=1))

    scores = np.ascontiguousarray(scores, dtype=np.float64)
    n_buyer = np.ascontiguousarray(n_buyer, dtype=np.int64)
    active = np.zeros((n, m), dtype=np.uint8)
    _kernels.select_topk(scores, n_buyer, seed & _MASK64, active)

    rows, cols = np.nonzero(active)
    pairs = frozenset(
        zip(ctx.seller_ids[rows].tolist(), ctx.buyer_ids[cols].tolist())
    )
    mask = active.astype(bool)
    observation = metrics.observation_from_parts(
        pairs,
        dataset.empirical_links,
        ctx.seller_ids.tolist() + ctx.buyer_ids.tolist(),
        ctx.lengths[mask],
        np.broadcast_to(ctx.prices, (n, m))[mask],
    )
    return RunReport(
        iterations_used=0,
        converged=True,
        cycle_detected=False,
        observation=observation,
        active_links=pairs,
    )


def all_kinds() -> list[NullModelKind]:
    return list(NullModelKind)
