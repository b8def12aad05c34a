#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallbacks.

Times the three per-shot hot kernels on a realistic workload (256 sites, 25
atoms per shot) plus the compensated reduction, then an end-to-end ensemble
experiment under each backend. The public kernel aliases are bound at import
time via LATTICETOF_BACKEND; here both implementations are timed directly, so
one process covers both columns.

Usage: python benchmarks/bench_backends.py [--runs 4000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from latticetof import backend, kernels
from latticetof.ensemble import _simulate_chunk
from latticetof.lattice import LatticeConfig, RandomModel


def make_workload(runs, n_sites=256, atoms=25, seed=123):
    rng = np.random.default_rng(seed)
    idx = np.stack([np.sort(rng.choice(n_sites, atoms, replace=False))
                    for _ in range(runs)]).astype(np.int64)
    return idx


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--runs", type=int, default=4000,
                        help="shots per kernel invocation")
    parser.add_argument("--repeat", type=int, default=5,
                        help="timing repetitions (best is reported)")
    args = parser.parse_args()

    if not backend.NUMBA_AVAILABLE:
        raise SystemExit("numba is not importable; nothing to compare")

    n_sites, atoms = 256, 25
    idx = make_workload(args.runs, n_sites, atoms)
    table = kernels.g2_cos_table(n_sites)
    n_pairs = atoms * (atoms - 1) / 2

    numpy_impl = kernels.IMPLEMENTATIONS["numpy"]
    numba_impl = kernels.IMPLEMENTATIONS["numba"]

    counts = numpy_impl["batch_pair_counts"](idx, n_sites)
    g1_rows = numpy_impl["batch_g1"](idx, n_sites)

    cases = [
        ("pair histograms", lambda impl: impl["batch_pair_counts"](idx, n_sites)),
        ("g1 profiles", lambda impl: impl["batch_g1"](idx, n_sites)),
        ("g2 modulations", lambda impl: impl["batch_g2_mod"](counts, table,
                                                             n_pairs)),
        ("kahan reduction", lambda impl: impl["kahan_sum_rows"](g1_rows)),
    ]

    # trigger jit compilation outside the timed region
    for _, fn in cases:
        fn(numba_impl)

    print(f"workload: {args.runs} shots, {n_sites} sites, {atoms} atoms "
          f"(best of {args.repeat})")
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}")
    for name, fn in cases:
        t_np = best_of(lambda: fn(numpy_impl), args.repeat)
        t_nb = best_of(lambda: fn(numba_impl), args.repeat)
        print(f"{name:<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}"
              f"{t_np / t_nb:>10.2f}x")

    # end-to-end chunk simulation (sampling + profiles, no reduction)
    lattice = LatticeConfig(n_sites=n_sites, lattice_const=0.5e-6,
                            fill_factor=atoms / n_sites)
    payload = (99, 0, args.runs, RandomModel(atoms / n_sites), lattice)

    def run_chunk(impl):
        saved = (kernels.batch_pair_counts, kernels.batch_g1,
                 kernels.batch_g2_mod)
        kernels.batch_pair_counts = impl["batch_pair_counts"]
        kernels.batch_g1 = impl["batch_g1"]
        kernels.batch_g2_mod = impl["batch_g2_mod"]
        try:
            _simulate_chunk(payload)
        finally:
            (kernels.batch_pair_counts, kernels.batch_g1,
             kernels.batch_g2_mod) = saved

    run_chunk(numba_impl)
    t_np = best_of(lambda: run_chunk(numpy_impl), args.repeat)
    t_nb = best_of(lambda: run_chunk(numba_impl), args.repeat)
    print(f"{'full shot chunk':<18}{t_np * 1e3:>12.2f}{t_nb * 1e3:>12.2f}"
          f"{t_np / t_nb:>10.2f}x")
    print(f"active backend for library calls: {backend.ACTIVE}")


if __name__ == "__main__":
    main()
