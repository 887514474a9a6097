"""Compiled vs numpy interference kernel: throughput and agreement.

Usage: python3 benchmarks/bench_kernels.py [--trials N] [--repeat R]
"""

import argparse
import time

import numpy as np

from mccsim import kernels
from mccsim.channel import ScatteringModel
from mccsim.simcore import SimConfig

CASES = [
    ("cluster-center", "sparse", 4.0),
    ("typical", "sparse", 4.0),
    ("no-mcc", "sparse", 1.0),
    ("cluster-center", "rich", 4.0),
]


def best_time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()
    if kernels.BACKEND != "compiled":
        print("compiled kernel not built; only the numpy backend is available")

    print(f"{'scenario':15s} {'scattering':10s} {'ell':>4s} {'numpy/s':>12s} {'compiled/s':>12s} {'speedup':>8s} {'max rel diff':>13s}")
    for scenario, kind, ell in CASES:
        model = ScatteringModel.sparse() if kind == "sparse" else ScatteringModel.rich()
        cfg = SimConfig(cluster_size=ell, scenario=scenario, scattering=model, trials=args.trials)
        t_py, ref = best_time(lambda: kernels.interference_batch(cfg, 0, args.trials, backend="python"), args.repeat)
        if kernels.BACKEND == "compiled":
            t_c, out = best_time(lambda: kernels.interference_batch(cfg, 0, args.trials, args.threads, "compiled"),
                                 args.repeat)
            scale = np.maximum(np.abs(ref), np.finfo(float).tiny)
            diff = float(np.max(np.abs(out - ref) / scale))
            print(f"{scenario:15s} {kind:10s} {ell:4g} {args.trials / t_py:12.0f} {args.trials / t_c:12.0f} "
                  f"{t_py / t_c:8.2f} {diff:13.2e}")
        else:
            print(f"{scenario:15s} {kind:10s} {ell:4g} {args.trials / t_py:12.0f} {'-':>12s} {'-':>8s} {'-':>13s}")


if __name__ == "__main__":
    main()
