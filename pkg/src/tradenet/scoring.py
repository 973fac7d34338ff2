"""Score arithmetic: sub-score normalization, individual weight preferences,
the preliminary trading score, the social link score and the final trading score.

All functions are pure. The vectorized engine in `simulation` mirrors the exact
evaluation order used here so both routes agree bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

from .domain import GlobalParams, SellerAgent
from .errors import TradenetError

# neutral sub-score when a criterion cannot discriminate (all raw values equal)
NEUTRAL_SUBSCORE = 0.5


class Preferences(NamedTuple):
    """Per-seller weight preferences, each in [1, 2]."""

    price: float = 1.0
    dist: float = 1.0
    debts: float = 1.0
    social: float = 1.0


def seller_preferences(seller: SellerAgent) -> Preferences:
    return Preferences(seller.pref_price, seller.pref_dist, seller.pref_debts, seller.pref_social)


def _normalize_to_unit_band(raw: Sequence[float]) -> list[float]:
    """Min-max map onto [1, 2]; degenerate inputs collapse to 1."""
    lo, hi = min(raw), max(raw)
    if hi == lo:
        return [1.0] * len(raw)
    span = hi - lo
    return [1.0 + (r - lo) / span for r in raw]


def compute_preferences(sellers: Sequence[SellerAgent]) -> list[SellerAgent]:
    """Fill the four pref_* fields from individual attributes.

    Raw preferences are reciprocals (high transport -> low distance preference,
    wealthy -> low price preference, old -> low debt and social preference),
    then min-max normalized over the population into [1, 2].
    """
    if not sellers:
        raise TradenetError("empty population")
    positive_transports = [s.transport for s in sellers if s.transport > 0]
    eps = min(positive_transports) if positive_transports else 1.0

    raw_dist = [1.0 / max(s.transport, eps) for s in sellers]
    raw_price = [1.0 / s.house_value for s in sellers]
    raw_age = [1.0 / s.age for s in sellers]

    p_dist = _normalize_to_unit_band(raw_dist)
    p_price = _normalize_to_unit_band(raw_price)
    p_age = _normalize_to_unit_band(raw_age)

    return [
        replace(
            s,
            pref_price=p_price[i],
            pref_dist=p_dist[i],
            pref_debts=p_age[i],
            pref_social=p_age[i],
        )
        for i, s in enumerate(sellers)
    ]


def normalize_subscores(values: Sequence[float], inverted: bool = False) -> list[float]:
    """Min-max rescale into [0, 1].

    inverted=True maps the maximum input to 0 and the minimum to 1 (used for
    distances, where the shortest link must score highest). Degenerate input
    (all values equal) maps to the neutral 0.5 so the criterion drops out of
    the ranking without zeroing score magnitudes.
    """
    if len(values) == 0:
        raise TradenetError("cannot normalize an empty list")
    lo, hi = min(values), max(values)
    if hi == lo:
        return [NEUTRAL_SUBSCORE] * len(values)
    span = hi - lo
    if inverted:
        return [(hi - v) / span for v in values]
    return [(v - lo) / span for v in values]


def preliminary_score(
    s_p: float, s_di: float, s_de: float, w: GlobalParams, pref: Preferences
) -> float:
    """Weighted mean of the three static sub-scores.

    Weights are the global weights modulated by the seller's preferences.
    """
    c_p = w.w_price * pref.price
    c_di = w.w_dist * pref.dist
    c_de = w.w_debts * pref.debts
    den = c_p + c_di + c_de
    if den <= 0.0:
        raise TradenetError("all effective weights zero")
    return (s_p * c_p + s_di * c_di + s_de * c_de) / den


@dataclass(frozen=True)
class SocialCriteria:
    """Similarity/status criteria of a directed seller pair (influencer A -> B)."""

    proximity: float
    education: float
    ethnicity: float
    activegroup: float
    prestigious_job: float


def social_criteria(a: SellerAgent, b: SellerAgent) -> SocialCriteria:
    """Criterion values for the influence of seller a on seller b.

    Proximity climbs the district/subdistrict/village ladder; education, group
    activity and job status depend on the influencer only; ethnicity is shared
    or not.
    """
    if a.district_id != b.district_id:
        proximity = 0.0
    elif a.subdistrict_id != b.subdistrict_id:
        proximity = 0.33
    elif a.village_id != b.village_id:
        proximity = 0.66
    else:
        proximity = 1.0
    return SocialCriteria(
        proximity=proximity,
        education=(a.education - 1) / 5,
        ethnicity=1.0 if a.ethnicity == b.ethnicity else 0.0,
        activegroup=a.group_count / 4,
        prestigious_job=1.0 if a.prestigious_job else 0.0,
    )


def social_link_score(c: SocialCriteria, w: GlobalParams) -> float:
    """Weighted mean of the five social criteria."""
    den = (
        w.w_s_proximity
        + w.w_s_education
        + w.w_s_ethnicity
        + w.w_s_activegroup
        + w.w_s_prestigious_job
    )
    if den <= 0.0:
        raise TradenetError("all social sub-weights zero")
    num = (
        c.proximity * w.w_s_proximity
        + c.education * w.w_s_education
        + c.ethnicity * w.w_s_ethnicity
        + c.activegroup * w.w_s_activegroup
        + c.prestigious_job * w.w_s_prestigious_job
    )
    return num / den


def final_score(
    s_p: float,
    s_di: float,
    s_de: float,
    s_soc: float,
    w: GlobalParams,
    pref: Preferences,
) -> float:
    """Weighted mean of all four sub-scores.

    With w_social == 0 this degenerates to preliminary_score bit-for-bit (the
    evaluation order of the first three terms is identical).
    """
    c_p = w.w_price * pref.price
    c_di = w.w_dist * pref.dist
    c_de = w.w_debts * pref.debts
    c_soc = w.w_social * pref.social
    den = c_p + c_di + c_de + c_soc
    if den <= 0.0:
        raise TradenetError("all effective weights zero")
    return (s_p * c_p + s_di * c_di + s_de * c_de + s_soc * c_soc) / den
