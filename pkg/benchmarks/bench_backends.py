#!/usr/bin/env python3
"""Timing comparison between the compiled envelope kernel and the numpy
fallback, at both the kernel level and the whole-decomposition level.

Usage: python benchmarks/bench_backends.py [--sizes 512,1024,4096]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def best_of(fn, repeats=5):
    timings = []
    for _ in range(repeats):
        started = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - started)
    return min(timings)


def kernel_benchmark(sizes):
    from pricecast import _envelope_np

    kernels = {"numpy": _envelope_np}
    try:
        from pricecast import _envelope_cy

        kernels["cython"] = _envelope_cy
    except ImportError:
        print("compiled kernel not built; kernel comparison limited to numpy")

    rng = np.random.Generator(np.random.PCG64(0))
    print(f"\nenvelope_mean, best of 5 (per call)")
    print(f"{'n':>8}" + "".join(f"{name:>12}" for name in kernels) + f"{'speedup':>10}")
    for n in sizes:
        x = np.cumsum(rng.standard_normal(n))
        row = {}
        for name, kernel in kernels.items():
            row[name] = best_of(lambda k=kernel: k.envelope_mean(x))
        line = f"{n:>8}" + "".join(f"{row[name] * 1e6:>10.1f}us" for name in kernels)
        if len(row) == 2:
            line += f"{row['numpy'] / row['cython']:>9.1f}x"
        print(line)


DECOMPOSE_SNIPPET = """
import time
import numpy as np
from pricecast.backend import BACKEND_NAME
from pricecast.emd import ceemdan_decompose, CeemdanConfig

rng = np.random.Generator(np.random.PCG64(3))
x = np.sin(2 * np.pi * 12 * np.arange({n}) / {n}) + 0.5 * rng.standard_normal({n})
config = CeemdanConfig(ensemble_size={ensemble}, rng_seed=7)
ceemdan_decompose(x[:256], CeemdanConfig(ensemble_size=5))  # warm up
started = time.perf_counter()
decomp = ceemdan_decompose(x, config)
elapsed = time.perf_counter() - started
print(f"{{BACKEND_NAME}} {{elapsed:.3f}} {{len(decomp)}}")
"""


def decomposition_benchmark(n=2048, ensemble=100):
    print(f"\nfull ensemble decomposition: n={n}, ensemble={ensemble} (one run)")
    results = {}
    for backend in ("cython", "numpy"):
        env = dict(os.environ, PRICECAST_BACKEND=backend)
        proc = subprocess.run(
            [sys.executable, "-c", DECOMPOSE_SNIPPET.format(n=n, ensemble=ensemble)],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            print(f"  {backend}: unavailable ({proc.stderr.strip().splitlines()[-1]})")
            continue
        name, elapsed, modes = proc.stdout.split()
        results[name] = float(elapsed)
        print(f"  {name}: {float(elapsed):.2f}s ({modes} modes)")
    if len(results) == 2:
        print(f"  speedup: {results['numpy'] / results['cython']:.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="512,2048,8192",
                        help="comma-separated signal lengths for the kernel benchmark")
    parser.add_argument("--ensemble", type=int, default=100)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    kernel_benchmark(sizes)
    decomposition_benchmark(ensemble=args.ensemble)


if __name__ == "__main__":
    main()
