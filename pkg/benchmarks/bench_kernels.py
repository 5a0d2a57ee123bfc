#!/usr/bin/env python3
"""Benchmark the compiled eta/Shannon kernels against the numpy fallback.

The eta fixed point runs twice per SCA iteration and once per probe of
every antenna sweep, so per-call latency here bounds the optimizer's
throughput. Run after `pip install -e .`:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fdmimome.kernels import _pure

try:
    from fdmimome.kernels import _etacore
except ImportError:
    _etacore = None


def bench(impl, spectra, repeats=5):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        acc = 0.0
        for entries, beta in spectra:
            eta, _ = impl.solve_eta(entries, beta)
            acc += impl.omega_value(entries, beta, eta)
        best = min(best, time.perf_counter() - t0)
    return best, acc


def main():
    rng = np.random.default_rng(0)
    sizes = (4, 12, 48, 256)
    for n in sizes:
        spectra = [
            (rng.uniform(0.0, 1e3, size=n), float(rng.uniform(0.05, 20.0)))
            for _ in range(2000)
        ]
        t_pure, acc_pure = bench(_pure, spectra)
        line = f"L={n:4d}  pure: {1e6 * t_pure / len(spectra):8.2f} us/solve"
        if _etacore is not None:
            t_cy, acc_cy = bench(_etacore, spectra)
            assert abs(acc_cy - acc_pure) <= 1e-9 * abs(acc_pure)
            line += f"  cython: {1e6 * t_cy / len(spectra):7.2f} us/solve  speedup: {t_pure / t_cy:5.1f}x"
        else:
            line += "  (compiled kernel unavailable)"
        print(line)


if __name__ == "__main__":
    main()
