"""Pure-Python/numpy implementation of the hot simulation kernels.

The compiled extension (_loop.pyx) mirrors this module operation-for-operation
so that both produce bit-identical scores, selections and random draws. Keep
the two in lockstep: any arithmetic reordering here is a behavioural change.
"""
from __future__ import annotations

import numpy as np

KERNEL_NAME = "fallback"

_MASK64 = (1 << 64) - 1
_INV_2_53 = 2.0**-53


def splitmix64(state: int) -> tuple[int, float]:
    """Advance a SplitMix64 state; return (new_state, uniform in [0, 1))."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    z = z ^ (z >> 31)
    return state, (z >> 11) * _INV_2_53


def select_topk(
    scores: np.ndarray,
    n_buyer: np.ndarray,
    rng_state: int,
    active_out: np.ndarray,
) -> int:
    """Per-seller top-k selection with uniform random tie-breaking at the cutoff.

    Sellers are processed in ascending row order and random draws are consumed
    only when links are tied exactly at the cutoff, so the draw sequence is a
    deterministic function of (scores, n_buyer, rng_state).
    """
    n, m = scores.shape
    active_out.fill(0)
    for b in range(n):
        k = int(n_buyer[b])
        if k <= 0:
            continue
        row = scores[b]
        if k >= m:
            active_out[b, :] = 1
            continue
        v = np.partition(row, m - k)[m - k]  # k-th largest value
        greater = row > v
        n_greater = int(greater.sum())
        active_out[b, greater] = 1
        tied = np.nonzero(row == v)[0]
        r = k - n_greater
        if r == len(tied):
            active_out[b, tied] = 1
            continue
        # uniform r-subset of the tied candidates via partial Fisher-Yates
        cand = tied.tolist()
        t = len(cand)
        for i in range(r):
            rng_state, u = splitmix64(rng_state)
            j = i + int(u * (t - i))
            cand[i], cand[j] = cand[j], cand[i]
        for i in range(r):
            active_out[b, cand[i]] = 1
    return rng_state


def social_pass(
    prev_signal: np.ndarray,
    infl_ptr: np.ndarray,
    infl_idx: np.ndarray,
    infl_w: np.ndarray,
    ssoc_out: np.ndarray,
) -> None:
    """Social sub-score pass: accumulate influencers' previous link signals
    weighted by social strength, then min-max rescale globally over all links.

    All-zero raw sums stay zero; all-equal nonzero sums collapse to the
    neutral 0.5. Accumulation order is fixed (receivers ascending, influencers
    ascending) to stay bit-compatible with the compiled kernel.
    """
    raw = ssoc_out
    raw.fill(0.0)
    for b in range(raw.shape[0]):
        lo, hi = int(infl_ptr[b]), int(infl_ptr[b + 1])
        if lo == hi:
            continue
        row = raw[b]
        for e in range(lo, hi):
            row += infl_w[e] * prev_signal[infl_idx[e]]

    mn = float(raw.min())
    mx = float(raw.max())
    if mx > mn:
        span = mx - mn
        np.subtract(raw, mn, out=ssoc_out)
        ssoc_out /= span
    elif mx == 0.0:
        ssoc_out.fill(0.0)
    else:
        ssoc_out.fill(0.5)


def final_scores(
    static_num: np.ndarray,
    denom: np.ndarray,
    soc_coeff: np.ndarray,
    ssoc: np.ndarray,
    scores_out: np.ndarray,
) -> None:
    """Final trading scores: (static numerator + social term) / full denominator."""
    np.multiply(ssoc, soc_coeff[:, None], out=scores_out)
    scores_out += static_num
    scores_out /= denom[:, None]


def iterate_once(
    prev_signal: np.ndarray,
    static_num: np.ndarray,
    denom: np.ndarray,
    soc_coeff: np.ndarray,
    infl_ptr: np.ndarray,
    infl_idx: np.ndarray,
    infl_w: np.ndarray,
    n_buyer: np.ndarray,
    rng_state: int,
    scores_out: np.ndarray,
    ssoc_out: np.ndarray,
    active_out: np.ndarray,
) -> int:
    """One model iteration: social sub-score pass, final scores, selection.

    prev_signal is the previous iteration's link signal (final scores, or the
    0/1 active indicators when the social signal is configured to statuses).
    """
    social_pass(prev_signal, infl_ptr, infl_idx, infl_w, ssoc_out)
    final_scores(static_num, denom, soc_coeff, ssoc_out, scores_out)
    return select_topk(scores_out, n_buyer, rng_state, active_out)
