"""Model orchestration: initialization, iterative social-score propagation,
final scoring, active-trading selection and convergence detection.

The heavy per-iteration work happens in a kernel (compiled extension or numpy
fallback, see tradenet._kernels); this module owns the loop, the staging of
previous-iteration scores (synchronous update) and all bookkeeping.
"""
from __future__ import annotations

import math
import os
import weakref
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _kernels, metrics, scoring
from ._kernels import fallback as _ref
from .domain import (
    Dataset,
    GlobalParams,
    SocialLink,
    TradingLink,
    round_half_up,
    validate,
)
from .errors import TradenetError

_MASK64 = (1 << 64) - 1

# number-of-buyers regression on log total sales
N_BUYER_INTERCEPT = 0.045
N_BUYER_SLOPE = 0.065

CYCLE_HISTORY = 8
DEFAULT_MAX_ITER = 500


def predict_n_buyer(total_sales: float) -> int:
    """Number of buyers a seller connects to, predicted from total sales."""
    if not total_sales > 0:
        raise TradenetError(f"total_sales must be > 0, got {total_sales}")
    raw = N_BUYER_INTERCEPT + N_BUYER_SLOPE * math.log(total_sales)
    return max(1, round_half_up(raw))


@dataclass(frozen=True)
class SimOptions:
    """Model variant switches.

    n_buyer_mode: 'empirical' takes each seller's observed buyer count,
        'regression' predicts it from total sales.
    social_signal: 'scores' propagates influencers' previous continuous link
        scores, 'active' propagates their 0/1 selection instead.
    subscore_scope: normalize price/distance/debt sub-scores per seller or
        globally over all links.
    """

    n_buyer_mode: str = "empirical"
    social_signal: str = "scores"
    subscore_scope: str = "per_seller"

    def validate(self) -> None:
        if self.n_buyer_mode not in ("empirical", "regression"):
            raise TradenetError(f"unknown n_buyer_mode {self.n_buyer_mode!r}")
        if self.social_signal not in ("scores", "active"):
            raise TradenetError(f"unknown social_signal {self.social_signal!r}")
        if self.subscore_scope not in ("per_seller", "global"):
            raise TradenetError(f"unknown subscore_scope {self.subscore_scope!r}")


def _rowwise_minmax(mat: np.ndarray, inverted: bool) -> np.ndarray:
    """Per-row min-max rescale matching scoring.normalize_subscores."""
    mn = mat.min(axis=1, keepdims=True)
    mx = mat.max(axis=1, keepdims=True)
    span = mx - mn
    degenerate = (span == 0.0).ravel()
    safe = np.where(span == 0.0, 1.0, span)
    out = (mx - mat) / safe if inverted else (mat - mn) / safe
    out[degenerate, :] = scoring.NEUTRAL_SUBSCORE
    return out


def _global_minmax(mat: np.ndarray, inverted: bool) -> np.ndarray:
    mn = mat.min()
    mx = mat.max()
    if mx == mn:
        return np.full_like(mat, scoring.NEUTRAL_SUBSCORE)
    span = mx - mn
    return (mx - mat) / span if inverted else (mat - mn) / span


class SimContext:
    """Parameter-independent precomputation for one dataset.

    Built once and shared across parameter evaluations (the GA evaluates
    thousands of candidates against the same dataset).
    """

    def __init__(self, dataset: Dataset):
        report = validate(dataset)
        if not report.ok:
            raise TradenetError(f"invalid dataset:\n{report}")
        sellers = dataset.sellers
        buyers = dataset.buyers
        if not buyers:
            raise TradenetError("dataset has no buyers")

        self.dataset = dataset
        self.n = len(sellers)
        self.m = len(buyers)
        self.seller_ids = np.array([s.id for s in sellers], dtype=np.int64)
        self.buyer_ids = np.array([b.id for b in buyers], dtype=np.int64)

        self.prices = np.array([b.price for b in buyers], dtype=np.float64)
        self.lengths = np.array(
            [[dataset.link_length(s, b) for b in buyers] for s in sellers], dtype=np.float64
        )
        self.debts = np.array(
            [[s.debt_with(b.id) for b in buyers] for s in sellers], dtype=np.float64
        )

        with_prefs = scoring.compute_preferences(sellers)
        self.p_price = np.array([s.pref_price for s in with_prefs])
        self.p_dist = np.array([s.pref_dist for s in with_prefs])
        self.p_debts = np.array([s.pref_debts for s in with_prefs])
        self.p_social = np.array([s.pref_social for s in with_prefs])

        village = np.array([s.village_id for s in sellers])
        subdistrict = np.array([s.subdistrict_id for s in sellers])
        district = np.array([s.district_id for s in sellers])
        same_d = district[:, None] == district[None, :]
        same_sd = same_d & (subdistrict[:, None] == subdistrict[None, :])
        same_v = same_sd & (village[:, None] == village[None, :])
        self.prox = np.where(same_v, 1.0, np.where(same_sd, 0.66, np.where(same_d, 0.33, 0.0)))
        ethnicity = np.array([s.ethnicity for s in sellers])
        self.eth = (ethnicity[:, None] == ethnicity[None, :]).astype(np.float64)
        self.educ_v = (np.array([s.education for s in sellers]) - 1) / 5
        self.group_v = np.array([s.group_count for s in sellers]) / 4
        self.job_v = np.array([float(s.prestigious_job) for s in sellers])
        # positional order equals id order (Dataset keeps agents sorted)
        idx = np.arange(self.n)
        self.id_lt = idx[:, None] < idx[None, :]

        self.emp_mask = np.zeros((self.n, self.m), dtype=bool)
        s_index = {sid: i for i, sid in enumerate(self.seller_ids.tolist())}
        b_index = {bid: j for j, bid in enumerate(self.buyer_ids.tolist())}
        for sid, bid in dataset.empirical_links:
            self.emp_mask[s_index[sid], b_index[bid]] = True

        self.n_buyer_emp = np.array([s.n_buyer_empirical for s in sellers], dtype=np.int64)
        self.total_sales = np.array([s.total_sales for s in sellers], dtype=np.float64)
        self._subscore_cache: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        self._n_buyer_reg: Optional[np.ndarray] = None

    def subscores(self, scope: str) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(price, distance, debts) sub-score matrices under the given scope.

        Distance is inverted (shortest link scores 1); price and debts are not
        (highest price / largest debt scores 1).
        """
        if scope not in self._subscore_cache:
            norm = _rowwise_minmax if scope == "per_seller" else _global_minmax
            price_mat = np.broadcast_to(self.prices, (self.n, self.m)).copy()
            self._subscore_cache[scope] = (
                np.ascontiguousarray(norm(price_mat, inverted=False)),
                np.ascontiguousarray(norm(self.lengths, inverted=True)),
                np.ascontiguousarray(norm(self.debts, inverted=False)),
            )
        return self._subscore_cache[scope]

    def n_buyer_regression(self) -> np.ndarray:
        if self._n_buyer_reg is None:
            self._n_buyer_reg = np.array(
                [predict_n_buyer(ts) for ts in self.total_sales], dtype=np.int64
            )
        return self._n_buyer_reg


_context_cache: "weakref.WeakKeyDictionary[Dataset, SimContext]" = weakref.WeakKeyDictionary()


def get_context(dataset: Dataset) -> SimContext:
    ctx = _context_cache.get(dataset)
    if ctx is None:
        ctx = SimContext(dataset)
        _context_cache[dataset] = ctx
    return ctx


class _Assembled:
    """Parameter-dependent arrays for one (params, options) pair."""

    def __init__(self, ctx: SimContext, params: GlobalParams, options: SimOptions):
        params.validate()
        options.validate()
        n, m = ctx.n, ctx.m

        s_p, s_di, s_de = ctx.subscores(options.subscore_scope)
        self.s_p, self.s_di, self.s_de = s_p, s_di, s_de
        c_p = params.w_price * ctx.p_price
        c_di = params.w_dist * ctx.p_dist
        c_de = params.w_debts * ctx.p_debts
        c_soc = params.w_social * ctx.p_social
        prelim_den = c_p + c_di + c_de
        if np.any(prelim_den <= 0.0):
            raise TradenetError("all effective weights zero")
        self.full_den = np.ascontiguousarray(prelim_den + c_soc)
        self.soc_coeff = np.ascontiguousarray(c_soc)
        self.static_num = np.ascontiguousarray(
            s_p * c_p[:, None] + s_di * c_di[:, None] + s_de * c_de[:, None]
        )
        self.prelim = np.ascontiguousarray(self.static_num / prelim_den[:, None])

        # social network: score all directed pairs, keep the stronger direction
        # of each pair, activate each receiver's top-k incoming links
        self.k_social = round_half_up(params.n_social)
        social_sum = (
            params.w_s_proximity
            + params.w_s_education
            + params.w_s_ethnicity
            + params.w_s_activegroup
            + params.w_s_prestigious_job
        )
        if social_sum <= 0.0:
            if params.w_social > 0.0:
                raise TradenetError("all social sub-weights zero")
            self.soc_scores = None
            self.keep = np.zeros((n, n), dtype=bool)
        elif n < 2:
            self.soc_scores = None
            self.keep = np.zeros((n, n), dtype=bool)
        else:
            num = (
                ctx.prox * params.w_s_proximity
                + ctx.educ_v[:, None] * params.w_s_education
                + ctx.eth * params.w_s_ethnicity
                + ctx.group_v[:, None] * params.w_s_activegroup
                + ctx.job_v[:, None] * params.w_s_prestigious_job
            )
            w_mat = num / social_sum
            self.soc_scores = w_mat
            keep = (w_mat > w_mat.T) | ((w_mat == w_mat.T) & ctx.id_lt)
            np.fill_diagonal(keep, False)
            self.keep = keep

        if self.soc_scores is None or self.k_social == 0:
            self.active_soc = np.zeros((n, n), dtype=bool)
        else:
            key = np.where(self.keep, -self.soc_scores, np.inf)
            order = np.argsort(key, axis=0, kind="stable")
            ranks = np.empty((n, n), dtype=np.int64)
            np.put_along_axis(ranks, order, np.arange(n)[:, None], axis=0)
            self.active_soc = self.keep & (ranks < self.k_social)

        receivers, influencers = np.nonzero(self.active_soc.T)
        counts = np.bincount(receivers, minlength=n)
        self.infl_ptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(counts, out=self.infl_ptr[1:])
        self.infl_idx = influencers.astype(np.int64)
        if self.soc_scores is None:
            self.infl_w = np.zeros(0, dtype=np.float64)
        else:
            self.infl_w = np.ascontiguousarray(self.soc_scores[influencers, receivers])

        if options.n_buyer_mode == "empirical":
            self.n_buyer = np.minimum(ctx.n_buyer_emp, m)
        else:
            self.n_buyer = np.minimum(ctx.n_buyer_regression(), m)
        self.n_buyer = np.ascontiguousarray(self.n_buyer, dtype=np.int64)


class ModelState:
    """Mutable state of one simulation run."""

    def __init__(
        self,
        dataset: Dataset,
        params: GlobalParams,
        seed: int,
        options: SimOptions,
        ctx: SimContext,
        asm: _Assembled,
    ):
        self.dataset = dataset
        self.params = params
        self.options = options
        self.ctx = ctx
        self.asm = asm
        self.rng_seed = seed
        self.rng_state = seed & _MASK64
        self.iteration = 0
        self.converged = False
        self.cycle_detected = False

        n, m = ctx.n, ctx.m
        self.scores = asm.prelim.copy()
        self.ssoc = np.zeros((n, m), dtype=np.float64)
        self.active = np.zeros((n, m), dtype=np.uint8)
        self.last_active: Optional[np.ndarray] = None
        self.history: deque[np.ndarray] = deque(maxlen=CYCLE_HISTORY)

        if options.social_signal == "active":
            # seed the feedback with a provisional selection from the
            # preliminary scores (there is no previous selection yet)
            initial = np.zeros((n, m), dtype=np.uint8)
            self.rng_state = _kernels.select_topk(
                self.scores, asm.n_buyer, self.rng_state, initial
            )
            self.prev_signal = initial.astype(np.float64)
        else:
            self.prev_signal = self.scores.copy()

    # -- public views ------------------------------------------------------

    def active_link_set(self) -> frozenset[tuple[int, int]]:
        rows, cols = np.nonzero(self.active)
        sids = self.ctx.seller_ids[rows]
        bids = self.ctx.buyer_ids[cols]
        return frozenset(zip(sids.tolist(), bids.tolist()))

    def all_agent_ids(self) -> list[int]:
        return self.ctx.seller_ids.tolist() + self.ctx.buyer_ids.tolist()

    def active_lengths(self) -> np.ndarray:
        return self.ctx.lengths[self.active.astype(bool)]

    def active_prices(self) -> np.ndarray:
        mask = self.active.astype(bool)
        return np.broadcast_to(self.ctx.prices, mask.shape)[mask]

    def n_buyer_targets(self) -> np.ndarray:
        return self.asm.n_buyer

    def observation(self) -> metrics.ObservationRecord:
        return metrics.observation_from_state(self)

    def trading_links(self) -> list[TradingLink]:
        ctx, asm = self.ctx, self.asm
        emp = ctx.emp_mask
        links = []
        for i, sid in enumerate(ctx.seller_ids.tolist()):
            for j, bid in enumerate(ctx.buyer_ids.tolist()):
                links.append(
                    TradingLink(
                        seller_id=sid,
                        buyer_id=bid,
                        length=float(ctx.lengths[i, j]),
                        price=float(ctx.prices[j]),
                        debts=float(ctx.debts[i, j]),
                        score_price=float(asm.s_p[i, j]),
                        score_dist=float(asm.s_di[i, j]),
                        score_debts=float(asm.s_de[i, j]),
                        score_social=float(self.ssoc[i, j]),
                        score=float(self.scores[i, j]),
                        score_next=float(self.prev_signal[i, j]),
                        status_model=bool(self.active[i, j]),
                        status_data=bool(emp[i, j]),
                        tons=float(self.dataset.tons_by_link.get((sid, bid), 0.0)),
                    )
                )
        return links

    def social_links(self) -> list[SocialLink]:
        """The pruned social network with activation flags."""
        asm, ctx = self.asm, self.ctx
        if asm.soc_scores is None:
            return []
        links = []
        rows, cols = np.nonzero(asm.keep)
        for a, b in zip(rows.tolist(), cols.tolist()):
            links.append(
                SocialLink(
                    from_seller_id=int(ctx.seller_ids[a]),
                    to_seller_id=int(ctx.seller_ids[b]),
                    score=float(asm.soc_scores[a, b]),
                    active=bool(asm.active_soc[a, b]),
                )
            )
        return links


@dataclass(frozen=True)
class RunReport:
    """Outcome of one run: convergence status, metrics and the active network."""

    iterations_used: int
    converged: bool
    cycle_detected: bool
    observation: metrics.ObservationRecord
    active_links: frozenset[tuple[int, int]]


def init_model(
    dataset: Dataset,
    params: GlobalParams,
    seed: int,
    options: Optional[SimOptions] = None,
) -> ModelState:
    """Validate inputs, build all links and scores, return the ready state.

    Sub-scores, preferences, preliminary scores and the pruned+activated
    social network are all in place afterwards; iteration is 0. The social
    network is computed once per run: its inputs never change across
    iterations, so recomputing it each loop would be a no-op (asserted when
    TRADENET_DEBUG is set).
    """
    options = options or SimOptions()
    ctx = get_context(dataset)
    asm = _Assembled(ctx, params, options)
    if os.environ.get("TRADENET_DEBUG"):
        again = _Assembled(ctx, params, options)
        assert np.array_equal(asm.active_soc, again.active_soc)
        assert np.array_equal(asm.infl_idx, again.infl_idx)
        assert np.array_equal(asm.infl_w, again.infl_w)
    return ModelState(dataset, params, seed, options, ctx, asm)


def _record_selection(state: ModelState) -> None:
    current = state.active
    if state.last_active is not None and np.array_equal(current, state.last_active):
        state.converged = True
    elif len(state.history) > 1:
        for past in list(state.history)[:-1]:
            if np.array_equal(current, past):
                state.cycle_detected = True
                break
    snapshot = current.copy()
    state.history.append(snapshot)
    state.last_active = snapshot
    if state.options.social_signal == "active":
        state.prev_signal = current.astype(np.float64)
    else:
        state.prev_signal = state.scores.copy()


def step(state: ModelState) -> ModelState:
    """One model loop: social pass from previous-iteration scores, final
    scores, active-trading selection, convergence/cycle bookkeeping."""
    asm = state.asm
    state.rng_state = _kernels.iterate_once(
        state.prev_signal,
        asm.static_num,
        asm.full_den,
        asm.soc_coeff,
        asm.infl_ptr,
        asm.infl_idx,
        asm.infl_w,
        asm.n_buyer,
        state.rng_state,
        state.scores,
        state.ssoc,
        state.active,
    )
    state.iteration += 1
    _record_selection(state)
    return state


def social_subscore_pass(state: ModelState) -> ModelState:
    """Compute only the social sub-scores from the previous iteration's signal
    (reference implementation; step() fuses this with scoring and selection)."""
    _ref.social_pass(
        state.prev_signal, state.asm.infl_ptr, state.asm.infl_idx, state.asm.infl_w, state.ssoc
    )
    return state


def compute_final_scores(state: ModelState) -> ModelState:
    """Combine static numerators with the current social sub-scores."""
    _ref.final_scores(
        state.asm.static_num, state.asm.full_den, state.asm.soc_coeff, state.ssoc, state.scores
    )
    return state


def select_active_trading(state: ModelState) -> ModelState:
    """Per seller, activate the top n_buyer links by final score; exact score
    ties at the cutoff are resolved by the seeded generator."""
    state.rng_state = _kernels.select_topk(
        state.scores, state.asm.n_buyer, state.rng_state, state.active
    )
    return state


def run(
    dataset: Dataset,
    params: GlobalParams,
    seed: int,
    max_iter: int = DEFAULT_MAX_ITER,
    options: Optional[SimOptions] = None,
) -> RunReport:
    """Iterate until the active set repeats in two consecutive iterations or
    max_iter is reached. Non-convergence is reported, never raised."""
    if max_iter < 1:
        raise TradenetError(f"max_iter must be >= 1, got {max_iter}")
    state = init_model(dataset, params, seed, options)
    while state.iteration < max_iter and not state.converged:
        step(state)
    return RunReport(
        iterations_used=state.iteration,
        converged=state.converged,
        cycle_detected=state.cycle_detected,
        observation=state.observation(),
        active_links=state.active_link_set(),
    )
