"""Social network construction among sellers: build all directed links, keep
the stronger direction of each pair, then activate each seller's strongest
incoming influences.

This is the reference (object-level) pipeline; the simulation engine uses a
vectorized equivalent and the test suite asserts both routes agree exactly.
"""
from __future__ import annotations

from typing import Sequence

from . import scoring
from .domain import GlobalParams, SellerAgent, SocialLink, round_half_up
from .errors import TradenetError


def build_social_links(sellers: Sequence[SellerAgent]) -> list[SocialLink]:
    """Create the full directed graph: one link from each seller to each other."""
    if len(sellers) < 2:
        raise TradenetError("need at least 2 sellers to build social links")
    links = []
    for a in sellers:
        for b in sellers:
            if a.id != b.id:
                links.append(SocialLink(from_seller_id=a.id, to_seller_id=b.id))
    return links


def score_and_prune(
    links: Sequence[SocialLink],
    sellers: Sequence[SellerAgent],
    w: GlobalParams,
) -> list[SocialLink]:
    """Score every link, then keep only the stronger direction of each pair.

    Exact ties keep the link coming from the lower seller id, so the pruned
    topology is deterministic.
    """
    by_id = {s.id: s for s in sellers}
    scored = {}
    for link in links:
        crit = scoring.social_criteria(by_id[link.from_seller_id], by_id[link.to_seller_id])
        scored[(link.from_seller_id, link.to_seller_id)] = SocialLink(
            from_seller_id=link.from_seller_id,
            to_seller_id=link.to_seller_id,
            score=scoring.social_link_score(crit, w),
        )

    survivors = []
    for (a, b), link in scored.items():
        if a > b:
            continue
        reverse = scored[(b, a)]
        if link.score > reverse.score:
            survivors.append(link)
        elif reverse.score > link.score:
            survivors.append(reverse)
        else:
            survivors.append(link)  # tie: lower from-id wins, and a < b here
    return survivors


def select_active(links: Sequence[SocialLink], n_social: float) -> list[SocialLink]:
    """Activate each seller's k highest-scored incoming links (k = rounded n_social).

    Ties at the cutoff are broken by the lower influencer id. Links are
    returned re-flagged; scores are untouched, so the operation is idempotent.
    """
    if n_social < 0:
        raise TradenetError(f"n_social must be >= 0, got {n_social}")
    k = round_half_up(n_social)
    incoming: dict[int, list[SocialLink]] = {}
    for link in links:
        incoming.setdefault(link.to_seller_id, []).append(link)

    out = []
    for receiver in sorted(incoming):
        ranked = sorted(incoming[receiver], key=lambda l: (-l.score, l.from_seller_id))
        for i, link in enumerate(ranked):
            out.append(
                SocialLink(
                    from_seller_id=link.from_seller_id,
                    to_seller_id=link.to_seller_id,
                    score=link.score,
                    active=i < k,
                )
            )
    return out
