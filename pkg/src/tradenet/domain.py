"""Shared domain types: agents, links, parameters, datasets and their invariants.

Everything here is immutable after construction so that datasets can be shared
read-only across parallel fitness evaluations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .errors import TradenetError

MAIN_WEIGHT_FIELDS = ("w_price", "w_dist", "w_debts", "w_social")
SOCIAL_WEIGHT_FIELDS = (
    "w_s_education",
    "w_s_ethnicity",
    "w_s_activegroup",
    "w_s_prestigious_job",
    "w_s_proximity",
)
WEIGHT_BOUNDS = (0.0, 100.0)


def round_half_up(x: float) -> int:
    """Round with .5 always going up (used for n_social and buyer counts)."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class SellerAgent:
    """A selling trader (h0) with location, social and economic attributes."""

    id: int
    village_id: int
    subdistrict_id: int
    district_id: int
    gps_s: float
    gps_e: float
    education: int
    ethnicity: int
    transport: float
    employees: int
    prestigious_job: bool
    active_group: bool
    group_count: int
    age: float
    house_value: float
    hh_size: int
    hhs_vlg: int
    income: float
    total_sales: float
    debt_by_buyer: Mapping[int, float] = field(default_factory=dict)
    n_buyer_empirical: int = 1
    # individual weight preferences, filled by scoring.compute_preferences
    pref_price: float = 1.0
    pref_dist: float = 1.0
    pref_debts: float = 1.0
    pref_social: float = 1.0

    def debt_with(self, buyer_id: int) -> float:
        return float(self.debt_by_buyer.get(buyer_id, 0.0))


@dataclass(frozen=True, eq=False)
class BuyerAgent:
    """A buying trader (h1). Coordinates are optional; they only matter when
    no distance matrix is supplied."""

    id: int
    price: float
    gps_s: Optional[float] = None
    gps_e: Optional[float] = None


@dataclass
class TradingLink:
    """Directed potential seller -> buyer connection and its scores."""

    seller_id: int
    buyer_id: int
    length: float
    price: float
    debts: float
    score_price: float = 0.0
    score_dist: float = 0.0
    score_debts: float = 0.0
    score_social: float = 0.0
    score: float = 0.0
    score_next: float = 0.0
    status_model: bool = False
    status_data: bool = False
    tons: float = 0.0


@dataclass
class SocialLink:
    """Directed influence of one seller (from_seller_id) on another."""

    from_seller_id: int
    to_seller_id: int
    score: float = 0.0
    active: bool = False


@dataclass(frozen=True, eq=False)
class GlobalParams:
    """The ten calibratable parameters: social-degree cap plus nine weights."""

    n_social: float
    w_price: float
    w_dist: float
    w_debts: float
    w_social: float
    w_s_education: float
    w_s_ethnicity: float
    w_s_activegroup: float
    w_s_prestigious_job: float
    w_s_proximity: float

    def as_vector(self) -> np.ndarray:
        return np.array(
            [
                self.n_social,
                self.w_price,
                self.w_dist,
                self.w_debts,
                self.w_social,
                self.w_s_education,
                self.w_s_ethnicity,
                self.w_s_activegroup,
                self.w_s_prestigious_job,
                self.w_s_proximity,
            ],
            dtype=float,
        )

    @classmethod
    def from_vector(cls, vec: Sequence[float]) -> "GlobalParams":
        vals = [float(v) for v in vec]
        if len(vals) != 10:
            raise TradenetError(f"parameter vector must have 10 entries, got {len(vals)}")
        return cls(*vals)

    def validate(self) -> None:
        lo, hi = WEIGHT_BOUNDS
        for name in ("n_social",) + MAIN_WEIGHT_FIELDS + SOCIAL_WEIGHT_FIELDS:
            v = getattr(self, name)
            if not math.isfinite(v) or v < lo or v > hi:
                raise TradenetError(f"parameter {name}={v!r} outside [{lo}, {hi}]")
        if all(getattr(self, f) == 0.0 for f in MAIN_WEIGHT_FIELDS):
            raise TradenetError("all main weights are zero")
        if self.w_social > 0.0 and all(getattr(self, f) == 0.0 for f in SOCIAL_WEIGHT_FIELDS):
            raise TradenetError("w_social > 0 but all social sub-weights are zero")


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """Symmetric distance lookup over all agent ids."""

    ids: tuple[int, ...]
    values: np.ndarray  # (N, N) float64

    def __post_init__(self):
        object.__setattr__(self, "_index", {i: k for k, i in enumerate(self.ids)})

    def between(self, a: int, b: int) -> float:
        idx = self._index
        return float(self.values[idx[a], idx[b]])

    def has(self, agent_id: int) -> bool:
        return agent_id in self._index


def euclidean(gps_a: tuple[float, float], gps_b: tuple[float, float]) -> float:
    """Planar Euclidean distance between two (gps_s, gps_e) points."""
    return math.hypot(gps_a[0] - gps_b[0], gps_a[1] - gps_b[1])


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable bundle of agents, pairwise distances and observed links.

    Sellers and buyers are kept sorted by id so that positional index order
    equals id order everywhere downstream (tie-breaking relies on this).
    """

    sellers: tuple[SellerAgent, ...]
    buyers: tuple[BuyerAgent, ...]
    empirical_links: frozenset[tuple[int, int]]
    distance_matrix: Optional[DistanceMatrix] = None
    # traded amounts per empirical link; carried through I/O, unused by equations
    tons_by_link: Mapping[tuple[int, int], float] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        sellers: Iterable[SellerAgent],
        buyers: Iterable[BuyerAgent],
        empirical_links: Iterable[tuple[int, int]],
        distance_matrix: Optional[DistanceMatrix] = None,
        tons_by_link: Optional[Mapping[tuple[int, int], float]] = None,
    ) -> "Dataset":
        return cls(
            sellers=tuple(sorted(sellers, key=lambda s: s.id)),
            buyers=tuple(sorted(buyers, key=lambda b: b.id)),
            empirical_links=frozenset((int(s), int(b)) for s, b in empirical_links),
            distance_matrix=distance_matrix,
            tons_by_link=dict(tons_by_link) if tons_by_link else {},
        )

    def link_length(self, seller: SellerAgent, buyer: BuyerAgent) -> float:
        """Distance matrix entry when available, else planar Euclidean distance."""
        dm = self.distance_matrix
        if dm is not None and dm.has(seller.id) and dm.has(buyer.id):
            return dm.between(seller.id, buyer.id)
        if buyer.gps_s is None or buyer.gps_e is None:
            raise TradenetError(
                f"no distance for pair ({seller.id}, {buyer.id}): "
                "no matrix entry and the buyer has no coordinates"
            )
        return euclidean((seller.gps_s, seller.gps_e), (buyer.gps_s, buyer.gps_e))

    def with_sellers(self, sellers: Iterable[SellerAgent]) -> "Dataset":
        return replace(self, sellers=tuple(sorted(sellers, key=lambda s: s.id)))


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"[{self.code}] {self.subject}: {self.message}"


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, code: str, subject: str, message: str) -> None:
        self.violations.append(Violation(code, subject, message))

    def __str__(self) -> str:
        if self.ok:
            return "dataset is well-formed"
        return "\n".join(str(v) for v in self.violations)


DISTANCE_SYMMETRY_TOL = 1e-9


def validate(dataset: Dataset) -> ValidationReport:
    """Report every invariant violation in the dataset (report-only, never raises)."""
    rep = ValidationReport()

    seller_ids = [s.id for s in dataset.sellers]
    buyer_ids = [b.id for b in dataset.buyers]
    if len(set(seller_ids)) != len(seller_ids):
        rep.add("duplicate_id", "sellers", "seller ids are not unique")
    if len(set(buyer_ids)) != len(buyer_ids):
        rep.add("duplicate_id", "buyers", "buyer ids are not unique")
    overlap = set(seller_ids) & set(buyer_ids)
    if overlap:
        rep.add("id_overlap", "agents", f"ids used by both sellers and buyers: {sorted(overlap)}")

    seller_set = set(seller_ids)
    buyer_set = set(buyer_ids)

    for s in dataset.sellers:
        sub = f"seller {s.id}"
        if s.education not in range(1, 7):
            rep.add("range", sub, f"education={s.education} not in 1..6")
        if s.group_count not in range(0, 5):
            rep.add("range", sub, f"group_count={s.group_count} not in 0..4")
        if s.transport < 0:
            rep.add("sign", sub, f"transport={s.transport} < 0")
        if s.employees < 0:
            rep.add("sign", sub, f"employees={s.employees} < 0")
        if not s.age > 0:
            rep.add("sign", sub, f"age={s.age} must be > 0")
        if not s.house_value > 0:
            rep.add("sign", sub, f"house_value={s.house_value} must be > 0")
        if not s.total_sales > 0:
            rep.add("sign", sub, f"total_sales={s.total_sales} must be > 0")
        if s.n_buyer_empirical < 1:
            rep.add("range", sub, f"n_buyer_empirical={s.n_buyer_empirical} must be >= 1")
        for field_name in ("pref_price", "pref_dist", "pref_debts", "pref_social"):
            v = getattr(s, field_name)
            if not (1.0 <= v <= 2.0):
                rep.add("range", sub, f"{field_name}={v} not in [1, 2]")
        for buyer_id, debt in s.debt_by_buyer.items():
            if not math.isfinite(debt) or debt < 0:
                rep.add("sign", sub, f"debt with buyer {buyer_id} is {debt}")
            if buyer_id not in buyer_set:
                rep.add("dangling_debt", sub, f"debt references unknown buyer {buyer_id}")

    for b in dataset.buyers:
        if not b.price > 0:
            rep.add("sign", f"buyer {b.id}", f"price={b.price} must be > 0")

    for sid, bid in sorted(dataset.empirical_links):
        if sid not in seller_set or bid not in buyer_set:
            rep.add("dangling_link", f"link ({sid}, {bid})", "references an unknown agent")

    dm = dataset.distance_matrix
    if dm is not None:
        vals = dm.values
        if vals.shape[0] != vals.shape[1] or vals.shape[0] != len(dm.ids):
            rep.add("matrix_shape", "distances", f"matrix shape {vals.shape} does not match ids")
        else:
            if np.any(vals < 0):
                rep.add("sign", "distances", "negative distance entries")
            if np.any(np.abs(np.diag(vals)) > DISTANCE_SYMMETRY_TOL):
                rep.add("diagonal", "distances", "diagonal is not zero")
            asym = np.max(np.abs(vals - vals.T)) if vals.size else 0.0
            if asym > DISTANCE_SYMMETRY_TOL:
                rep.add("asymmetry", "distances", f"max |d(i,j) - d(j,i)| = {asym:g}")
            for agent_id in seller_ids + buyer_ids:
                if not dm.has(agent_id):
                    rep.add("missing_id", "distances", f"agent {agent_id} not in matrix")
    else:
        for b in dataset.buyers:
            if b.gps_s is None or b.gps_e is None:
                rep.add(
                    "no_distance",
                    f"buyer {b.id}",
                    "no distance matrix and no buyer coordinates",
                )

    return rep
