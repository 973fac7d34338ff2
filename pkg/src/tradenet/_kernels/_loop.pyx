# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementation of the hot simulation kernels.

Mirrors _kernels/fallback.py operation-for-operation; both must produce
bit-identical scores, selections and random draws.
"""
from libc.math cimport INFINITY
from libc.stdlib cimport malloc, free

ctypedef unsigned long long u64

KERNEL_NAME = "compiled"

cdef double _INV_2_53 = 1.0 / 9007199254740992.0


cdef inline double _sm64(u64 *state) noexcept nogil:
    cdef u64 z
    state[0] = state[0] + <u64>0x9E3779B97F4A7C15ULL
    z = state[0]
    z = (z ^ (z >> 30)) * <u64>0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * <u64>0x94D049BB133111EBULL
    z = z ^ (z >> 31)
    return <double>(z >> 11) * _INV_2_53


def splitmix64(state):
    """Advance a SplitMix64 state; return (new_state, uniform in [0, 1))."""
    cdef u64 s = <u64>(state & 0xFFFFFFFFFFFFFFFF)
    cdef double u = _sm64(&s)
    return s, u


cdef inline double _kth_largest(double[:] row, Py_ssize_t m, Py_ssize_t k,
                                double *top) noexcept nogil:
    # maintain the k largest values seen so far, sorted descending
    cdef Py_ssize_t i, pos
    cdef double x
    for i in range(k):
        top[i] = -INFINITY
    for i in range(m):
        x = row[i]
        if x > top[k - 1]:
            pos = k - 1
            while pos > 0 and x > top[pos - 1]:
                top[pos] = top[pos - 1]
                pos -= 1
            top[pos] = x
    return top[k - 1]


cdef u64 _select_topk(double[:, ::1] scores, long long[:] n_buyer, u64 state,
                      unsigned char[:, ::1] active, double *top,
                      Py_ssize_t *cand) noexcept nogil:
    cdef Py_ssize_t n = scores.shape[0]
    cdef Py_ssize_t m = scores.shape[1]
    cdef Py_ssize_t b, x, k, n_greater, t, r, i, j
    cdef Py_ssize_t tmp
    cdef double v, u

    for b in range(n):
        for x in range(m):
            active[b, x] = 0

    for b in range(n):
        k = <Py_ssize_t>n_buyer[b]
        if k <= 0:
            continue
        if k >= m:
            for x in range(m):
                active[b, x] = 1
            continue
        v = _kth_largest(scores[b], m, k, top)
        n_greater = 0
        t = 0
        for x in range(m):
            if scores[b, x] > v:
                active[b, x] = 1
                n_greater += 1
            elif scores[b, x] == v:
                cand[t] = x
                t += 1
        r = k - n_greater
        if r == t:
            for i in range(t):
                active[b, cand[i]] = 1
            continue
        for i in range(r):
            u = _sm64(&state)
            j = i + <Py_ssize_t>(u * <double>(t - i))
            tmp = cand[i]
            cand[i] = cand[j]
            cand[j] = tmp
        for i in range(r):
            active[b, cand[i]] = 1
    return state


def select_topk(double[:, ::1] scores, long long[:] n_buyer, rng_state,
                unsigned char[:, ::1] active_out):
    """Per-seller top-k selection with uniform random tie-breaking at the cutoff."""
    cdef u64 state = <u64>(rng_state & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t m = scores.shape[1]
    cdef double *top = <double *>malloc(m * sizeof(double))
    cdef Py_ssize_t *cand = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    if top == NULL or cand == NULL:
        free(top)
        free(cand)
        raise MemoryError()
    try:
        with nogil:
            state = _select_topk(scores, n_buyer, state, active_out, top, cand)
    finally:
        free(top)
        free(cand)
    return state


def iterate_once(double[:, ::1] prev_signal, double[:, ::1] static_num,
                 double[:] denom, double[:] soc_coeff,
                 long long[:] infl_ptr, long long[:] infl_idx, double[:] infl_w,
                 long long[:] n_buyer, rng_state,
                 double[:, ::1] scores_out, double[:, ::1] ssoc_out,
                 unsigned char[:, ::1] active_out):
    """One model iteration: social sub-score pass, final scores, selection."""
    cdef u64 state = <u64>(rng_state & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t n = static_num.shape[0]
    cdef Py_ssize_t m = static_num.shape[1]
    cdef Py_ssize_t b, x, e, a
    cdef double wgt, mn, mx, span, c, d

    cdef double *top = <double *>malloc(m * sizeof(double))
    cdef Py_ssize_t *cand = <Py_ssize_t *>malloc(m * sizeof(Py_ssize_t))
    if top == NULL or cand == NULL:
        free(top)
        free(cand)
        raise MemoryError()

    try:
        with nogil:
            for b in range(n):
                for x in range(m):
                    ssoc_out[b, x] = 0.0
            for b in range(n):
                for e in range(infl_ptr[b], infl_ptr[b + 1]):
                    a = <Py_ssize_t>infl_idx[e]
                    wgt = infl_w[e]
                    for x in range(m):
                        ssoc_out[b, x] = ssoc_out[b, x] + wgt * prev_signal[a, x]

            mn = ssoc_out[0, 0]
            mx = ssoc_out[0, 0]
            for b in range(n):
                for x in range(m):
                    if ssoc_out[b, x] < mn:
                        mn = ssoc_out[b, x]
                    if ssoc_out[b, x] > mx:
                        mx = ssoc_out[b, x]
            if mx > mn:
                span = mx - mn
                for b in range(n):
                    for x in range(m):
                        ssoc_out[b, x] = (ssoc_out[b, x] - mn) / span
            elif mx == 0.0:
                for b in range(n):
                    for x in range(m):
                        ssoc_out[b, x] = 0.0
            else:
                for b in range(n):
                    for x in range(m):
                        ssoc_out[b, x] = 0.5

            for b in range(n):
                c = soc_coeff[b]
                d = denom[b]
                for x in range(m):
                    scores_out[b, x] = (ssoc_out[b, x] * c + static_num[b, x]) / d

            state = _select_topk(scores_out, n_buyer, state, active_out, top, cand)
    finally:
        free(top)
        free(cand)
    return state
