#!/usr/bin/env python3
"""Benchmark the compiled shortest-path kernel against the pure-Python
fallback on LFPP-style weighted grids.

Both backends implement the identical algorithm and produce bit-identical
results; this script measures the speed gap that justifies shipping the
compiled core.

Usage: python benchmarks/bench_dijkstra.py [--sizes 64,128,256,512]
"""

import argparse
import math
import time

import numpy as np

import lqg
from lqg import _pykernel

try:
    from lqg import _ckernel
except ImportError:
    _ckernel = None


def run_kernel(impl, weights, n, spacing, sources):
    n2 = n * n
    dist = np.full(n2, math.inf)
    pred = np.full(n2, -1, dtype=np.int32)
    touched = np.empty(n2, dtype=np.int32)
    mask = np.ones(n2, dtype=np.uint8)
    t0 = time.perf_counter()
    impl.grid_dijkstra(weights, n, spacing, True, sources, mask, math.inf,
                       -1, 0, dist, pred, touched)
    return time.perf_counter() - t0, dist, pred


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="64,128,256,512")
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    print(f"{'n':>6} {'edges':>10} {'pure (s)':>10} {'compiled (s)':>13} "
          f"{'speedup':>8}  identical")
    for n in sizes:
        spacing = 1.0 / max(1, n - 1)
        field = lqg.sample_discrete_gff(n, spacing, seed=args.seed)
        metric = lqg.build_metric(lqg.mollify(field, 4 * spacing), 0.4)
        weights = np.ascontiguousarray(metric.vertex_weight,
                                       dtype=np.float64).reshape(n * n)
        sources = np.array([0], dtype=np.longlong)
        t_pure, d1, p1 = run_kernel(_pykernel, weights, n, spacing, sources)
        if _ckernel is None:
            print(f"{n:>6} {8 * n * n:>10} {t_pure:>10.3f} "
                  f"{'unavailable':>13}")
            continue
        t_comp, d2, p2 = run_kernel(_ckernel, weights, n, spacing, sources)
        same = d1.tobytes() == d2.tobytes() and p1.tobytes() == p2.tobytes()
        print(f"{n:>6} {8 * n * n:>10} {t_pure:>10.3f} {t_comp:>13.4f} "
              f"{t_pure / t_comp:>8.1f}  {same}")


if __name__ == "__main__":
    main()
