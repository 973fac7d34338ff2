#!/usr/bin/env python3
"""Benchmark the compiled kernel against the pure-Python fallback.

Times the three layers that matter: the raw per-iteration kernel, a full
simulation run, and a batch of GA-style evaluations. Also asserts both
kernels produce identical results before timing anything.

Usage: python benchmarks/bench_kernels.py [--quick]
"""
import argparse
import time

import numpy as np

import tradenet._kernels as kernels
from tradenet._kernels import fallback
from tradenet.calibration import GAConfig, ga_run
from tradenet.dataio import SyntheticConfig, gen_synthetic
from tradenet.simulation import run

try:
    from tradenet._kernels import _loop as compiled
except ImportError:
    compiled = None


def build_problem(n, m, k, seed=0):
    rng = np.random.default_rng(seed)
    prev = np.ascontiguousarray(rng.random((n, m)))
    static_num = np.ascontiguousarray(rng.random((n, m)) * 50)
    denom = np.ascontiguousarray((rng.random(n) + 0.5) * 60)
    soc = np.ascontiguousarray(rng.random(n) * 30)
    ptr = np.arange(0, (n + 1) * k, k, dtype=np.int64)
    idx = np.ascontiguousarray(rng.integers(0, n, n * k), dtype=np.int64)
    w = np.ascontiguousarray(rng.random(n * k))
    nb = np.ascontiguousarray(rng.integers(1, m + 1, n), dtype=np.int64)
    return prev, static_num, denom, soc, ptr, idx, w, nb


def time_kernel(impl, args, repeats):
    n, m = args[1].shape
    scores = np.zeros((n, m))
    ssoc = np.zeros((n, m))
    active = np.zeros((n, m), dtype=np.uint8)
    impl.iterate_once(*args, 1, scores, ssoc, active)  # warmup
    t0 = time.perf_counter()
    for _ in range(repeats):
        impl.iterate_once(*args, 1, scores, ssoc, active)
    return (time.perf_counter() - t0) / repeats


def swap_kernel(impl):
    kernels.iterate_once = impl.iterate_once
    kernels.select_topk = impl.select_topk


def verify_agreement():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n, m = int(rng.integers(2, 20)), int(rng.integers(1, 12))
        args = build_problem(n, m, k=min(3, n), seed=int(rng.integers(0, 2**31)))
        outs = []
        for impl in (fallback, compiled):
            scores = np.zeros((n, m))
            ssoc = np.zeros((n, m))
            active = np.zeros((n, m), dtype=np.uint8)
            state = impl.iterate_once(*args, 99, scores, ssoc, active)
            outs.append((state, scores.copy(), ssoc.copy(), active.copy()))
        assert outs[0][0] == outs[1][0]
        for a, b in zip(outs[0][1:], outs[1][1:]):
            assert np.array_equal(a, b)
    print("agreement check: compiled and fallback kernels are bit-identical\n")


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="fewer repeats")
    opts = parser.parse_args()

    if compiled is None:
        print("compiled kernel not available; nothing to compare")
        return

    verify_agreement()
    repeats = 200 if opts.quick else 2000

    print(f"{'kernel iterate_once':<34}{'fallback':>12}{'compiled':>12}{'speedup':>9}")
    for n, m, k in ((40, 10, 2), (179, 60, 5), (400, 100, 8)):
        args = build_problem(n, m, k)
        t_py = time_kernel(fallback, args, max(10, repeats // 10))
        t_c = time_kernel(compiled, args, repeats)
        print(f"  n={n:<4} m={m:<4} k={k:<14}{t_py * 1e6:>10.1f}us{t_c * 1e6:>10.1f}us{t_py / t_c:>8.1f}x")

    dataset, truth = gen_synthetic(SyntheticConfig(seed=5))
    print(f"\n{'full simulation run (179x60)':<34}{'fallback':>12}{'compiled':>12}{'speedup':>9}")
    times = {}
    for name, impl in (("fallback", fallback), ("compiled", compiled)):
        swap_kernel(impl)
        run(dataset, truth.params, 0)  # warmup (also builds the context)
        t0 = time.perf_counter()
        n_runs = 5 if opts.quick else 20
        for seed in range(n_runs):
            run(dataset, truth.params, seed)
        times[name] = (time.perf_counter() - t0) / n_runs
    print(
        f"  {'per run':<32}{times['fallback'] * 1e3:>10.1f}ms{times['compiled'] * 1e3:>10.1f}ms"
        f"{times['fallback'] / times['compiled']:>8.1f}x"
    )

    small, struth = gen_synthetic(SyntheticConfig(n_sellers=40, n_buyers=10, n_villages=8, seed=22))
    gens = 5 if opts.quick else 30
    print(f"\n{'GA calibration (40x10, pop 30)':<34}{'fallback':>12}{'compiled':>12}{'speedup':>9}")
    times = {}
    for name, impl in (("fallback", fallback), ("compiled", compiled)):
        swap_kernel(impl)
        config = GAConfig(population_size=30, generations=gens, eval_seed=struth.seed, seed=0)
        t0 = time.perf_counter()
        ga_run(small, config)
        times[name] = time.perf_counter() - t0
    print(
        f"  {f'{gens} generations':<32}{times['fallback']:>10.2f}s {times['compiled']:>9.2f}s "
        f"{times['fallback'] / times['compiled']:>7.1f}x"
    )
    swap_kernel(compiled)


if __name__ == "__main__":
    main()
