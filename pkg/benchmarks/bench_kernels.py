#!/usr/bin/env python3
"""Numba vs numpy timings for the hot kernels, plus an end-to-end sweep.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--no-sweep]

Kernel timings call the ``*_nb`` and ``*_np`` variants side by side in one
process.  The sweep runs twice in subprocesses, once with
SHORTBLOCK_DISABLE_NUMBA=1, so the switch is exercised exactly as a user
would flip it.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from shortblock import _kernels as K


def best_of(fn, repeat):
    fn()  # warm-up (and jit compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_cases(rng):
    u = rng.standard_normal((4096, 32))
    h = np.array([[(-1) ** bin(t & j).count("1") for j in range(32)] for t in range(32)], dtype=np.int8)
    out = np.empty_like(u)
    pil = rng.standard_normal((1000, 4, 3)) + 1j * rng.standard_normal((1000, 4, 3))
    dat = rng.standard_normal((1000, 4, 2048, 3)) + 1j * rng.standard_normal((1000, 4, 2048, 3))
    return [
        ("fht_rows 4096x32", lambda k: k(u.copy())),
        ("naive_rows 4096x32", lambda k: k(u, h, out)),
        ("gold 1e5 bits", lambda k: k(0x1234, 100_000)),
        ("candidate_metrics 1000x4x2048x3", lambda k: k(pil, dat, K.NONCOHERENT)),
    ], {"fht_rows": (K.fht_rows_nb, K.fht_rows_np), "naive_rows": (K.naive_rows_nb, K.naive_rows_np),
        "gold": (K.gold_nb, K.gold_np), "candidate_metrics": (K.candidate_metrics_nb, K.candidate_metrics_np)}


SWEEP = ["-m", "shortblock", "simulate", "--snr=-6:0:2", "--trials", "20000", "--antennas", "4",
         "--receivers", "noncoherent,quasi-coherent,fht-block", "--out", os.devnull]


def time_sweep(disable):
    env = dict(os.environ, SHORTBLOCK_DISABLE_NUMBA="1" if disable else "0")
    subprocess.run([sys.executable] + SWEEP, env=env, check=True)  # populate the jit cache
    t0 = time.perf_counter()
    subprocess.run([sys.executable] + SWEEP, env=env, check=True)
    return time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--no-sweep", action="store_true")
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    cases, pairs = kernel_cases(rng)
    print(f"{'kernel':36s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for label, call in cases:
        nb, np_ = pairs[label.split()[0]]
        t_nb = best_of(lambda: call(nb), args.repeat)
        t_np = best_of(lambda: call(np_), args.repeat)
        print(f"{label:36s} {t_nb * 1e3:10.2f} {t_np * 1e3:10.2f} {t_np / t_nb:8.2f}")
    if not args.no_sweep:
        t_nb, t_np = time_sweep(False), time_sweep(True)
        print(f"{'sweep 4 SNR x 20000 trials, N_R=4':36s} {t_nb * 1e3:10.0f} {t_np * 1e3:10.0f} {t_np / t_nb:8.2f}")


if __name__ == "__main__":
    main()
