#!/usr/bin/env python3
"""Benchmark the compiled sweep kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--sizes 16,32] [--beta 0.44]

Both backends draw from the same SplitMix64 stream, so after timing we also
assert the trajectories are bit-identical.
"""

import argparse
import time

import numpy as np

from ghzmc.gibbs import _accept_table, _p_add
from ghzmc.kernels import load_backend
from ghzmc.lattice import LatticeSpec, all_up, neighbor_table


def time_backend(backend, spec, n_sweeps, rule):
    nbrs = neighbor_table(spec)
    spins = all_up(spec)
    if rule == "metropolis":
        acc = _accept_table(spec)
        t0 = time.perf_counter()
        backend.metropolis_sweeps(spins, nbrs, acc, 42, n_sweeps, spec.n_sites)
    else:
        t0 = time.perf_counter()
        backend.wolff_updates(spins, nbrs, _p_add(spec), 42, n_sweeps)
    return time.perf_counter() - t0, spins


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="16,32")
    parser.add_argument("--beta", type=float, default=0.44)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    cython = load_backend("cython")
    python = load_backend("python")

    print(f"{'rule':<11}{'L':>4}{'sweeps':>9}{'cython [s]':>12}"
          f"{'python [s]':>12}{'speedup':>9}")
    for L in sizes:
        spec = LatticeSpec(2, (L, L), beta=args.beta)
        for rule, n_cy, n_py in (("metropolis", 20000, 200), ("wolff", 40000, 400)):
            t_cy, s_cy = time_backend(cython, spec, n_cy, rule)
            t_py, s_py = time_backend(python, spec, n_py, rule)
            per_cy = t_cy / n_cy
            per_py = t_py / n_py
            print(f"{rule:<11}{L:>4}{n_cy:>9}{t_cy:>12.3f}"
                  f"{per_py * n_cy:>12.1f}{per_py / per_cy:>9.0f}x")
            # equal-work cross-check: identical trajectories
            t_chk, s_a = time_backend(cython, spec, n_py, rule)
            assert np.array_equal(s_a, s_py), "backends diverged"


if __name__ == "__main__":
    main()
