"""Dataset file I/O, the reduced-sample construction and the synthetic data
generator with a planted ground-truth network.

File formats (UTF-8, comma-separated, LF line endings, decimal point):
  sellers.csv    id,village_id,subdistrict_id,district_id,gps_s,gps_e,education,
                 ethnicity,transport,employees,prestigious_job,active_group,
                 group_count,age,house_value,hh_size,hhs_vlg,income,total_sales
  buyers.csv     id,price (optionally plus gps_s,gps_e; required when no
                 distances.csv is supplied)
  links.csv      seller_id,buyer_id,debts,tons  (one row per empirical link)
  distances.csv  square matrix with an id header row and id first column
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from . import simulation
from .domain import (
    BuyerAgent,
    Dataset,
    DistanceMatrix,
    GlobalParams,
    SellerAgent,
    validate,
)
from .errors import DataLoadError, TradenetError

SELLER_COLUMNS = (
    "id",
    "village_id",
    "subdistrict_id",
    "district_id",
    "gps_s",
    "gps_e",
    "education",
    "ethnicity",
    "transport",
    "employees",
    "prestigious_job",
    "active_group",
    "group_count",
    "age",
    "house_value",
    "hh_size",
    "hhs_vlg",
    "income",
    "total_sales",
)
BUYER_COLUMNS = ("id", "price")
BUYER_GPS_COLUMNS = ("id", "price", "gps_s", "gps_e")
LINK_COLUMNS = ("seller_id", "buyer_id", "debts", "tons")

_INT_FIELDS = {
    "id",
    "village_id",
    "subdistrict_id",
    "district_id",
    "education",
    "ethnicity",
    "employees",
    "group_count",
    "hh_size",
    "hhs_vlg",
    "seller_id",
    "buyer_id",
}
_BOOL_FIELDS = {"prestigious_job", "active_group"}


def fmt_number(v) -> str:
    """Canonical CSV cell: integral values without a decimal point, floats via
    shortest round-trip repr. Stable under save -> load -> save."""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    f = float(v)
    if math.isfinite(f) and f == int(f) and abs(f) < 1e16:
        return str(int(f))
    return repr(f)


def write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _parse_cell(name: str, raw: str, path: Path, line: int):
    try:
        if name in _BOOL_FIELDS:
            if raw not in ("0", "1"):
                raise ValueError(f"expected 0 or 1, got {raw!r}")
            return raw == "1"
        if name in _INT_FIELDS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise DataLoadError(f"{path.name} line {line}: column {name!r}: {exc}") from exc


def _read_table(path: Path, required: Sequence[str], optional_headers: Sequence[Sequence[str]] = ()):
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataLoadError(f"{path.name}: empty file")
    header = lines[0].split(",")
    accepted = [tuple(required)] + [tuple(h) for h in optional_headers]
    if tuple(header) not in accepted:
        missing = [c for c in required if c not in header]
        if missing:
            raise DataLoadError(f"{path.name} line 1: missing column(s) {missing}")
        raise DataLoadError(
            f"{path.name} line 1: unexpected header {header}; expected one of {accepted}"
        )
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise DataLoadError(
                f"{path.name} line {lineno}: expected {len(header)} cells, got {len(cells)}"
            )
        rows.append(
            (lineno, {name: _parse_cell(name, cell, path, lineno) for name, cell in zip(header, cells)})
        )
    return header, rows


def _load_distances(path: Path) -> DistanceMatrix:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataLoadError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln]
    if not lines:
        raise DataLoadError(f"{path.name}: empty file")
    header = lines[0].split(",")
    if header[0] != "id":
        raise DataLoadError(f"{path.name} line 1: first header cell must be 'id'")
    try:
        ids = [int(c) for c in header[1:]]
    except ValueError as exc:
        raise DataLoadError(f"{path.name} line 1: non-numeric id in header: {exc}") from exc
    size = len(ids)
    if len(lines) - 1 != size:
        raise DataLoadError(f"{path.name}: {size} ids in header but {len(lines) - 1} data rows")
    values = np.zeros((size, size), dtype=np.float64)
    for i, line in enumerate(lines[1:]):
        lineno = i + 2
        cells = line.split(",")
        if len(cells) != size + 1:
            raise DataLoadError(f"{path.name} line {lineno}: expected {size + 1} cells")
        if int(cells[0]) != ids[i]:
            raise DataLoadError(
                f"{path.name} line {lineno}: row id {cells[0]} does not match header order"
            )
        try:
            values[i, :] = [float(c) for c in cells[1:]]
        except ValueError as exc:
            raise DataLoadError(f"{path.name} line {lineno}: non-numeric cell: {exc}") from exc
    asym = np.abs(values - values.T)
    if values.size and asym.max() > 1e-9:
        i, j = np.unravel_index(np.argmax(asym), asym.shape)
        raise DataLoadError(
            f"{path.name} line {int(i) + 2}: asymmetric entry for ids "
            f"({ids[int(i)]}, {ids[int(j)]}): {values[i, j]!r} vs {values[j, i]!r}"
        )
    return DistanceMatrix(ids=tuple(ids), values=values)


def load_dataset(
    sellers_path: str | Path,
    buyers_path: str | Path,
    links_path: str | Path,
    distances_path: Optional[str | Path] = None,
) -> Dataset:
    """Load and fully validate a dataset from CSV files.

    Distances come from the matrix file when given, otherwise from planar
    Euclidean distances between coordinates (buyers then need gps columns).
    """
    sellers_path, buyers_path, links_path = Path(sellers_path), Path(buyers_path), Path(links_path)
    _, seller_rows = _read_table(sellers_path, SELLER_COLUMNS)
    buyer_header, buyer_rows = _read_table(
        Path(buyers_path), BUYER_COLUMNS, optional_headers=[BUYER_GPS_COLUMNS]
    )
    _, link_rows = _read_table(links_path, LINK_COLUMNS)

    buyers = []
    for lineno, row in buyer_rows:
        buyers.append(
            BuyerAgent(
                id=row["id"],
                price=row["price"],
                gps_s=row.get("gps_s"),
                gps_e=row.get("gps_e"),
            )
        )
    buyer_ids = {b.id for b in buyers}

    seller_ids = set()
    base_sellers = {}
    for lineno, row in seller_rows:
        sid = row["id"]
        if sid in seller_ids:
            raise DataLoadError(f"{sellers_path.name} line {lineno}: duplicate seller id {sid}")
        seller_ids.add(sid)
        base_sellers[sid] = (lineno, row)

    links = set()
    debts: dict[int, dict[int, float]] = {}
    tons: dict[tuple[int, int], float] = {}
    counts: dict[int, int] = {}
    for lineno, row in link_rows:
        sid, bid = row["seller_id"], row["buyer_id"]
        if sid not in seller_ids:
            raise DataLoadError(f"{links_path.name} line {lineno}: unknown seller id {sid}")
        if bid not in buyer_ids:
            raise DataLoadError(f"{links_path.name} line {lineno}: unknown buyer id {bid}")
        if (sid, bid) in links:
            raise DataLoadError(f"{links_path.name} line {lineno}: duplicate link ({sid}, {bid})")
        links.add((sid, bid))
        counts[sid] = counts.get(sid, 0) + 1
        if row["debts"] > 0:
            debts.setdefault(sid, {})[bid] = row["debts"]
        if row["tons"] > 0:
            tons[(sid, bid)] = row["tons"]

    sellers = []
    for sid, (lineno, row) in base_sellers.items():
        sellers.append(
            SellerAgent(
                **{c: row[c] for c in SELLER_COLUMNS},
                debt_by_buyer=debts.get(sid, {}),
                n_buyer_empirical=counts.get(sid, 0),
            )
        )

    matrix = _load_distances(Path(distances_path)) if distances_path else None
    dataset = Dataset.build(sellers, buyers, links, distance_matrix=matrix, tons_by_link=tons)
    report = validate(dataset)
    if not report.ok:
        raise DataLoadError(f"dataset failed validation:\n{report}")
    return dataset


def save_dataset(dataset: Dataset, out_dir: str | Path) -> dict[str, Path]:
    """Write the dataset as CSV files; returns the written paths.

    distances.csv is only written when the dataset carries an explicit matrix;
    buyer gps columns are only written when any buyer has coordinates.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}

    rows = [",".join(SELLER_COLUMNS)]
    for s in dataset.sellers:
        rows.append(",".join(fmt_number(getattr(s, c)) for c in SELLER_COLUMNS))
    paths["sellers"] = out / "sellers.csv"
    write_text_atomic(paths["sellers"], "\n".join(rows) + "\n")

    with_gps = any(b.gps_s is not None for b in dataset.buyers)
    cols = BUYER_GPS_COLUMNS if with_gps else BUYER_COLUMNS
    rows = [",".join(cols)]
    for b in dataset.buyers:
        rows.append(",".join(fmt_number(getattr(b, c)) for c in cols))
    paths["buyers"] = out / "buyers.csv"
    write_text_atomic(paths["buyers"], "\n".join(rows) + "\n")

    sellers_by_id = {s.id: s for s in dataset.sellers}
    rows = [",".join(LINK_COLUMNS)]
    for sid, bid in sorted(dataset.empirical_links):
        rows.append(
            ",".join(
                (
                    fmt_number(sid),
                    fmt_number(bid),
                    fmt_number(sellers_by_id[sid].debt_with(bid)),
                    fmt_number(dataset.tons_by_link.get((sid, bid), 0.0)),
                )
            )
        )
    paths["links"] = out / "links.csv"
    write_text_atomic(paths["links"], "\n".join(rows) + "\n")

    if dataset.distance_matrix is not None:
        dm = dataset.distance_matrix
        rows = ["id," + ",".join(fmt_number(i) for i in dm.ids)]
        for i, row_id in enumerate(dm.ids):
            rows.append(
                fmt_number(row_id) + "," + ",".join(fmt_number(v) for v in dm.values[i])
            )
        paths["distances"] = out / "distances.csv"
        write_text_atomic(paths["distances"], "\n".join(rows) + "\n")

    return paths


def reduced_sample(dataset: Dataset) -> Dataset:
    """Drop buyers with empirical in-degree 1 (single exclusion pass), then
    sellers left without any empirical link; recompute observed buyer counts."""
    indegree: dict[int, int] = {}
    for sid, bid in dataset.empirical_links:
        indegree[bid] = indegree.get(bid, 0) + 1
    removed_buyers = {bid for bid, deg in indegree.items() if deg == 1}
    buyers = [b for b in dataset.buyers if b.id not in removed_buyers]
    if not buyers:
        raise TradenetError("reduced sample has no buyers left")

    links = {(s, b) for s, b in dataset.empirical_links if b not in removed_buyers}
    counts: dict[int, int] = {}
    for sid, _ in links:
        counts[sid] = counts.get(sid, 0) + 1

    sellers = []
    for s in dataset.sellers:
        if counts.get(s.id, 0) == 0:
            continue
        debts = {b: d for b, d in s.debt_by_buyer.items() if b not in removed_buyers}
        sellers.append(replace(s, debt_by_buyer=debts, n_buyer_empirical=counts[s.id]))
    if not sellers:
        raise TradenetError("reduced sample has no sellers left")

    tons = {pair: t for pair, t in dataset.tons_by_link.items() if pair in links}
    return Dataset.build(
        sellers, buyers, links, distance_matrix=dataset.distance_matrix, tons_by_link=tons
    )


DEFAULT_PLANTED_PARAMS = GlobalParams(
    n_social=2.0,
    w_price=2.0,
    w_dist=8.0,
    w_debts=80.0,
    w_social=6.0,
    w_s_education=6.0,
    w_s_ethnicity=9.0,
    w_s_activegroup=10.0,
    w_s_prestigious_job=1.0,
    w_s_proximity=74.0,
)

# survey-shaped defaults: ethnicity and education frequencies, job/group rates
# and employee/transport moments of the 179-trader population
@dataclass(frozen=True)
class SyntheticConfig:
    n_sellers: int = 179
    n_buyers: int = 60
    n_villages: int = 40
    seed: int = 0
    ethnicity_freqs: tuple[float, ...] = (0.3966, 0.5251, 0.0279, 0.0168, 0.0335)
    education_freqs: tuple[float, ...] = (0.0223, 0.1061, 0.3017, 0.1844, 0.0223, 0.3631)
    prestigious_job_rate: float = 0.06
    group_activity_rate: float = 0.3911
    employees_mean: float = 5.7
    employees_sd: float = 6.8
    transport_mean: float = 2060.0
    transport_sd: float = 2731.0
    debt_zero_rate: float = 0.5
    debt_log_mean: float = 16.0
    debt_log_sd: float = 1.0
    debt_attachment: str = "nearest"  # or "random": attach debts to a random buyer
    price_mean: float = 9000.0
    price_sd: float = 400.0
    # currency bump per standard deviation of buyer remoteness (distant
    # buyers paying more makes "sell to the best price" a bad local strategy)
    price_remoteness_premium: float = 0.0
    # fraction of buyers placed in a band beyond the village area (downstream
    # processors), the rest dispersed over the box
    buyer_remote_fraction: float = 0.0
    ln_sales_mean: float = 23.0
    ln_sales_sd: float = 4.0
    villages_per_subdistrict: int = 3
    subdistricts_per_district: int = 3
    planted_params: GlobalParams = field(default_factory=lambda: DEFAULT_PLANTED_PARAMS)

    def validate(self) -> None:
        if self.n_sellers < 1 or self.n_buyers < 1:
            raise TradenetError("need at least one seller and one buyer")
        if self.n_villages < 1 or self.n_villages > self.n_sellers:
            raise TradenetError(
                f"n_villages={self.n_villages} must be in [1, n_sellers={self.n_sellers}]"
            )
        for name, freqs in (("ethnicity", self.ethnicity_freqs), ("education", self.education_freqs)):
            if any(f < 0 for f in freqs):
                raise TradenetError(f"{name} frequencies must be non-negative")
            # published percentage tables round to 99.99; tolerate and renormalize
            if abs(sum(freqs) - 1.0) > 1e-3:
                raise TradenetError(f"{name} frequencies must sum to 1, got {sum(freqs)}")
        for name in ("prestigious_job_rate", "group_activity_rate", "debt_zero_rate"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise TradenetError(f"{name}={v} outside [0, 1]")
        if self.debt_attachment not in ("nearest", "random"):
            raise TradenetError(f"unknown debt_attachment {self.debt_attachment!r}")
        if not 0.0 <= self.buyer_remote_fraction <= 1.0:
            raise TradenetError("buyer_remote_fraction outside [0, 1]")
        self.planted_params.validate()

    def to_json_dict(self) -> dict:
        d = {
            f: getattr(self, f)
            for f in self.__dataclass_fields__
            if f not in ("planted_params", "ethnicity_freqs", "education_freqs")
        }
        d["ethnicity_freqs"] = list(self.ethnicity_freqs)
        d["education_freqs"] = list(self.education_freqs)
        d["planted_params"] = vars(self.planted_params).copy()
        return d

    @classmethod
    def from_json_dict(cls, d: Mapping) -> "SyntheticConfig":
        kwargs = dict(d)
        kwargs.pop("schema_version", None)
        if "ethnicity_freqs" in kwargs:
            kwargs["ethnicity_freqs"] = tuple(kwargs["ethnicity_freqs"])
        if "education_freqs" in kwargs:
            kwargs["education_freqs"] = tuple(kwargs["education_freqs"])
        if "planted_params" in kwargs:
            kwargs["planted_params"] = GlobalParams(**kwargs["planted_params"])
        unknown = set(kwargs) - set(cls.__dataclass_fields__)
        if unknown:
            raise TradenetError(f"unknown synthetic config fields: {sorted(unknown)}")
        return cls(**kwargs)


@dataclass(frozen=True)
class PlantedTruth:
    """Ground truth of a synthetic dataset: the parameters and seed that
    generated its empirical network (and therefore recover it exactly)."""

    params: GlobalParams
    seed: int
    links: frozenset[tuple[int, int]]

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "params": vars(self.params).copy(),
            "seed": self.seed,
            "links": sorted(list(pair) for pair in self.links),
        }


_GPS_S_RANGE = (-2.5, -1.0)
_GPS_E_RANGE = (102.0, 104.0)
_GROUP_COUNT_PROBS = (0.5, 0.25, 0.15, 0.1)


def _positive_normal(rng: np.random.Generator, mean: float, sd: float, size: int) -> np.ndarray:
    return np.maximum(0.0, rng.normal(mean, sd, size))


def draw_seller_attributes(config: SyntheticConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Sample the per-seller attribute columns from the config marginals."""
    n, nv = config.n_sellers, config.n_villages
    village_s = rng.uniform(*_GPS_S_RANGE, nv)
    village_e = rng.uniform(*_GPS_E_RANGE, nv)
    # every village gets one seller, the rest spread at random
    village_of = np.concatenate([np.arange(nv), rng.integers(0, nv, n - nv)])
    edu_p = np.asarray(config.education_freqs) / sum(config.education_freqs)
    eth_p = np.asarray(config.ethnicity_freqs) / sum(config.ethnicity_freqs)
    group_active = rng.random(n) < config.group_activity_rate
    return {
        "village_of": village_of,
        "gps_s": village_s[village_of] + rng.normal(0.0, 0.02, n),
        "gps_e": village_e[village_of] + rng.normal(0.0, 0.02, n),
        "education": rng.choice(np.arange(1, 7), size=n, p=edu_p),
        "ethnicity": rng.choice(np.arange(1, 6), size=n, p=eth_p),
        "prestigious": rng.random(n) < config.prestigious_job_rate,
        "group_count": np.where(
            group_active, rng.choice(np.arange(1, 5), size=n, p=_GROUP_COUNT_PROBS), 0
        ),
        "employees": np.round(
            _positive_normal(rng, config.employees_mean, config.employees_sd, n)
        ),
        "transport": _positive_normal(rng, config.transport_mean, config.transport_sd, n),
        "age": np.clip(np.round(rng.normal(45.0, 12.0, n)), 20, 85),
        "house_value": np.exp(rng.normal(17.0, 0.8, n)),
        "hh_size": rng.integers(1, 11, n),
        "hhs_vlg": rng.integers(20, 501, n),
        "income": np.exp(rng.normal(16.0, 1.0, n)),
        "total_sales": np.exp(rng.normal(config.ln_sales_mean, config.ln_sales_sd, n)),
    }


def gen_synthetic(config: SyntheticConfig) -> tuple[Dataset, PlantedTruth]:
    """Generate a distribution-matched dataset whose empirical network was
    produced by the model itself under config.planted_params, so the planted
    parameters recover it perfectly.

    Debts are attached to each seller's nearest buyer (with probability
    1 - debt_zero_rate); debts whose pair the planted run does not select are
    dropped and the run repeated, so every persisted debt lies on an
    empirical link and CSV round-trips are lossless.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    n, m = config.n_sellers, config.n_buyers

    attrs = draw_seller_attributes(config, rng)
    village_of = attrs["village_of"]
    gps_s, gps_e = attrs["gps_s"], attrs["gps_e"]
    education, ethnicity = attrs["education"], attrs["ethnicity"]
    prestigious, group_count = attrs["prestigious"], attrs["group_count"]
    employees, transport, age = attrs["employees"], attrs["transport"], attrs["age"]
    house_value, hh_size = attrs["house_value"], attrs["hh_size"]
    hhs_vlg, income, total_sales = attrs["hhs_vlg"], attrs["income"], attrs["total_sales"]

    seller_ids = list(range(1, n + 1))
    buyer_ids = list(range(n + 1, n + m + 1))

    buyer_gps_s = rng.uniform(*_GPS_S_RANGE, m)
    buyer_gps_e = rng.uniform(*_GPS_E_RANGE, m)
    n_remote = round(config.buyer_remote_fraction * m)
    if n_remote:
        # the last n_remote buyers sit in a band east of the village area
        buyer_gps_e[m - n_remote :] = _GPS_E_RANGE[1] + rng.uniform(0.5, 1.5, n_remote)
    prices = rng.normal(config.price_mean, config.price_sd, m)
    if config.price_remoteness_premium != 0.0 and m > 1:
        # remoteness = distance to the closest seller, so the best-paying
        # buyers are the ones no seller is near
        d_nearest = np.sqrt(
            (buyer_gps_s[:, None] - gps_s[None, :]) ** 2
            + (buyer_gps_e[:, None] - gps_e[None, :]) ** 2
        ).min(axis=1)
        spread = d_nearest.std()
        if spread > 0:
            prices += config.price_remoteness_premium * (d_nearest - d_nearest.mean()) / spread
    prices = np.maximum(1.0, prices)

    all_s = np.concatenate([gps_s, buyer_gps_s])
    all_e = np.concatenate([gps_e, buyer_gps_e])
    coords = np.stack([all_s, all_e], axis=1)
    diffs = coords[:, None, :] - coords[None, :, :]
    matrix = DistanceMatrix(
        ids=tuple(seller_ids + buyer_ids),
        values=np.sqrt((diffs**2).sum(axis=2)),
    )

    # zero-inflated debts, attached to the nearest buyer (or a random one,
    # which makes the debt weight cleanly identifiable in recovery tests)
    seller_block = matrix.values[:n, n:]
    if config.debt_attachment == "nearest":
        creditor = np.argmin(seller_block, axis=1)
    else:
        creditor = rng.integers(0, m, n)
    has_debt = rng.random(n) >= config.debt_zero_rate
    debt_amount = np.exp(rng.normal(config.debt_log_mean, config.debt_log_sd, n))
    debts: dict[int, dict[int, float]] = {}
    for i in range(n):
        if has_debt[i]:
            debts[seller_ids[i]] = {buyer_ids[int(creditor[i])]: float(debt_amount[i])}

    def make_sellers(debt_map: dict[int, dict[int, float]], counts=None) -> list[SellerAgent]:
        sellers = []
        for i, sid in enumerate(seller_ids):
            v = int(village_of[i])
            sellers.append(
                SellerAgent(
                    id=sid,
                    village_id=v + 1,
                    subdistrict_id=v // config.villages_per_subdistrict + 1,
                    district_id=v // config.villages_per_subdistrict
                    // config.subdistricts_per_district
                    + 1,
                    gps_s=float(gps_s[i]),
                    gps_e=float(gps_e[i]),
                    education=int(education[i]),
                    ethnicity=int(ethnicity[i]),
                    transport=float(transport[i]),
                    employees=int(employees[i]),
                    prestigious_job=bool(prestigious[i]),
                    active_group=bool(group_count[i] > 0),
                    group_count=int(group_count[i]),
                    age=float(age[i]),
                    house_value=float(house_value[i]),
                    hh_size=int(hh_size[i]),
                    hhs_vlg=int(hhs_vlg[i]),
                    income=float(income[i]),
                    total_sales=float(total_sales[i]),
                    debt_by_buyer=debt_map.get(sid, {}),
                    n_buyer_empirical=1 if counts is None else counts.get(sid, 1),
                )
            )
        return sellers

    buyers = [
        BuyerAgent(id=bid, price=float(prices[j]), gps_s=float(buyer_gps_s[j]), gps_e=float(buyer_gps_e[j]))
        for j, bid in enumerate(buyer_ids)
    ]

    # plant the ground-truth network: run the model itself, dropping any debt
    # whose pair it did not select (so saved links carry every debt)
    options = simulation.SimOptions(n_buyer_mode="regression")
    while True:
        candidate = Dataset.build(make_sellers(debts), buyers, [], distance_matrix=matrix)
        report = simulation.run(candidate, config.planted_params, config.seed, options=options)
        active = report.active_links
        stray = [
            (sid, bid)
            for sid, per_buyer in debts.items()
            for bid in per_buyer
            if (sid, bid) not in active
        ]
        if not stray:
            break
        for sid, bid in stray:
            del debts[sid][bid]
            if not debts[sid]:
                del debts[sid]

    counts: dict[int, int] = {}
    for sid, _ in active:
        counts[sid] = counts.get(sid, 0) + 1

    tons_rng = np.random.default_rng([config.seed, 7077])
    tons = {
        pair: float(np.round(np.exp(tons_rng.normal(3.0, 1.0)), 3))
        for pair in sorted(active)
    }

    dataset = Dataset.build(
        make_sellers(debts, counts), buyers, active, distance_matrix=matrix, tons_by_link=tons
    )
    return dataset, PlantedTruth(params=config.planted_params, seed=config.seed, links=active)
