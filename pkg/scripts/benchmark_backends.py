#!/usr/bin/env python3
"""Time the numba and numpy ensemble backends on one representative workload.

The workload is a differential CPMG sweep point (N pi pulses at 100 us
spacing) under the default noise model.  Reports wall time per backend, the
speedup, and the largest signal difference, which should sit at the float
rounding floor (~1e-9 or below).

Usage: python scripts/benchmark_backends.py [--n-realizations 100] [--n-pulses 32]
"""

import argparse
import math
import time

from spindecay import (
    DriveParams,
    EnsembleConfig,
    NoiseParams,
    OUParams,
    SequenceSpec,
    active_backend,
    run_differential,
)

TWO_PI = 2 * math.pi


def run_backend(backend, spec, drive, noise, args):
    cfg = EnsembleConfig(n_realizations=args.n_realizations, master_seed=args.seed,
                         threads=args.threads, backend=backend)
    # one throwaway point to exclude jit compilation from the timing
    warm = SequenceSpec(kind="hahn", n_pulses=1, tau=10e-6)
    run_differential(warm, drive, noise, EnsembleConfig(1, 0, backend=backend))
    t0 = time.perf_counter()
    signal, stderr, _, _ = run_differential(spec, drive, noise, cfg)
    return signal, stderr, time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-realizations", type=int, default=100)
    parser.add_argument("--n-pulses", type=int, default=32)
    parser.add_argument("--tau", type=float, default=100e-6, help="pulse spacing (s)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args()

    drive = DriveParams(rabi_peak=TWO_PI * 6.486e6)
    noise = NoiseParams(delta=OUParams(TWO_PI * 146e3, 15.5),
                        epsilon=OUParams(0.005, 500e-6))
    spec = SequenceSpec(kind="cpmg", n_pulses=args.n_pulses, tau=args.tau)

    try:
        import numba  # noqa: F401
        backends = ["numba", "numpy"]
    except ImportError:
        print("numba not importable; timing the numpy backend only")
        backends = ["numpy"]

    print(f"workload: CPMG-{args.n_pulses} at tau={args.tau*1e6:g} us, "
          f"n={args.n_realizations}, threads={args.threads} "
          f"(auto backend would pick {active_backend()!r})")
    results = {}
    for backend in backends:
        signal, stderr, elapsed = run_backend(backend, spec, drive, noise, args)
        results[backend] = (signal, elapsed)
        print(f"  {backend:>5}: {elapsed:8.3f} s   signal={signal:.6f} "
              f"(se {stderr:.6f})")
    if len(results) == 2:
        diff = abs(results["numba"][0] - results["numpy"][0])
        ratio = results["numpy"][1] / results["numba"][1]
        print(f"  numpy/numba time ratio: {ratio:.1f}x, |signal diff| = {diff:.2e}")


if __name__ == "__main__":
    main()
