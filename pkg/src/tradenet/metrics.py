"""Observation metrics of the emerging trading network: link-match counts,
graph components and scenario indicators."""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Hashable, Iterable, NamedTuple

from .errors import TradenetError

if TYPE_CHECKING:  # pragma: no cover
    from .simulation import ModelState


@dataclass(frozen=True)
class ObservationRecord:
    """The per-run network metrics, serialized as one CSV row per run."""

    active_tradings_n: int
    correct_tradings_n: int
    correct_tradings_p: float
    components_n: int
    components_size_mu: float
    components_n_active_only: int
    mean_link_length: float
    mean_price: float

    CSV_FIELDS = (
        "active_tradings_n",
        "correct_tradings_n",
        "correct_tradings_p",
        "components_n",
        "components_size_mu",
        "components_n_active_only",
        "mean_link_length",
        "mean_price",
    )

    def csv_values(self) -> list:
        return [getattr(self, f) for f in self.CSV_FIELDS]


def correct_links(
    active: Iterable[tuple[int, int]], empirical: Iterable[tuple[int, int]]
) -> tuple[int, float]:
    """Number and proportion of active links that match the empirical network."""
    active = set(active)
    n = len(active & set(empirical))
    p = n / len(active) if active else 0.0
    return n, p


class _UnionFind:
    """Union-find with path compression, enough for component counting."""

    def __init__(self, items: Iterable[Hashable]):
        self.parent = {x: x for x in items}

    def find(self, x: Hashable) -> Hashable:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: Hashable, b: Hashable) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def components(
    agents: Iterable[Hashable],
    links: Iterable[tuple[Hashable, Hashable]],
    include_isolated: bool,
) -> tuple[int, float]:
    """Connected components of the undirected graph induced by the links.

    include_isolated=True counts degree-0 agents as singleton components;
    otherwise they are ignored entirely. Returns (count, mean component size);
    an empty graph yields (0, 0.0).
    """
    agents = list(agents)
    links = list(links)
    touched = set()
    for a, b in links:
        touched.add(a)
        touched.add(b)
    nodes = agents if include_isolated else [a for a in agents if a in touched]
    if not nodes:
        return 0, 0.0
    uf = _UnionFind(nodes)
    for a, b in links:
        uf.union(a, b)
    count = len({uf.find(x) for x in nodes})
    return count, len(nodes) / count


class ScenarioIndicators(NamedTuple):
    mean_price: float
    mean_link_length: float
    components_n: int
    components_size_mu: float


def observation_from_parts(
    active: Iterable[tuple[int, int]],
    empirical: Iterable[tuple[int, int]],
    agents: Iterable[int],
    active_lengths,
    active_prices,
) -> ObservationRecord:
    """Assemble the full observation record from raw pieces."""
    active = set(active)
    correct_n, correct_p = correct_links(active, empirical)
    agents = list(agents)
    comp_n, comp_mu = components(agents, active, include_isolated=True)
    comp_n_active, _ = components(agents, active, include_isolated=False)
    n_links = len(active)
    return ObservationRecord(
        active_tradings_n=n_links,
        correct_tradings_n=correct_n,
        correct_tradings_p=correct_p,
        components_n=comp_n,
        components_size_mu=comp_mu,
        components_n_active_only=comp_n_active,
        mean_link_length=float(sum(active_lengths) / n_links) if n_links else 0.0,
        mean_price=float(sum(active_prices) / n_links) if n_links else 0.0,
    )


def observation_from_state(state: "ModelState") -> ObservationRecord:
    """Full observation record of the state's current active network."""
    return observation_from_parts(
        state.active_link_set(),
        state.dataset.empirical_links,
        state.all_agent_ids(),
        state.active_lengths(),
        state.active_prices(),
    )


def scenario_indicators(state: "ModelState") -> ScenarioIndicators:
    """Mean price and link length over active links plus component stats
    (isolated agents excluded). Raises if the active network is empty."""
    active = state.active_link_set()
    if not active:
        raise TradenetError("scenario indicators undefined for an empty active network")
    comp_n, comp_mu = components(state.all_agent_ids(), active, include_isolated=False)
    return ScenarioIndicators(
        mean_price=float(state.active_prices().mean()),
        mean_link_length=float(state.active_lengths().mean()),
        components_n=comp_n,
        components_size_mu=comp_mu,
    )
