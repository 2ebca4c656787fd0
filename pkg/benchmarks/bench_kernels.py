"""Benchmark the compiled jet kernels against the pure-numpy fallback.

Usage:  python3 benchmarks/bench_kernels.py [--points N]

Times the two hot kernels (truncated jet product and jet matrix product) on
shapes the pipelines actually use, then an end-to-end curvature + equivalence
run on a random-polynomial metric with each backend.
"""

import argparse
import time

import numpy as np

from tractorlab import jets, metrics, tractor
from tractorlab.geometry import Geometry


def _time(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(backend):
    jets.set_backend(backend)
    alg = jets.algebra(4, 3)
    rng = np.random.default_rng(0)
    out = {}
    for batch in (1, 64, 1024):
        a = rng.normal(size=(batch, alg.ncoef))
        b = rng.normal(size=(batch, alg.ncoef))
        out[f"mul   B={batch:5d}"] = _time(lambda: [alg.mul(a, b) for _ in range(50)]) / 50
    for batch in (1, 16, 128):
        a = rng.normal(size=(batch, 6, 6, alg.ncoef))
        b = rng.normal(size=(batch, 6, 6, alg.ncoef))
        out[f"matmul B={batch:4d}"] = _time(lambda: [alg.matmul(a, b) for _ in range(20)]) / 20
    return out


def bench_pipeline(backend, npoints):
    jets.set_backend(backend)
    metric = metrics.load_metric("poly_perturbation", seed=1)
    metric.__dict__.pop("_g_cache", None)
    metric.__dict__.pop("_geometry_cache", None)
    rng = np.random.default_rng(3)
    pts = metrics.sample_points(metric, npoints, rng)

    def curvature_run():
        for p in pts:
            geom = Geometry(metric, tuple(p))
            geom.__dict__.pop("weyl", None)
            _ = geom.weyl

    t_curv = _time(curvature_run, repeat=1)
    metric.__dict__.pop("_geometry_cache", None)
    metric.__dict__.pop("_g_cache", None)
    t0 = time.perf_counter()
    tractor.equivalence_check(metric, pts, np.random.default_rng(3))
    t_eq = time.perf_counter() - t0
    return t_curv, t_eq


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--points", type=int, default=50)
    args = parser.parse_args()

    backends = ["python"]
    try:
        jets.set_backend("compiled")
        backends.append("compiled")
    except ImportError:
        print("compiled kernels not built; benchmarking the fallback only")

    kernel_rows = {b: bench_kernels(b) for b in backends}
    print(f"{'kernel':<16}" + "".join(f"{b:>14}" for b in backends) +
          ("      speedup" if len(backends) == 2 else ""))
    for key in next(iter(kernel_rows.values())):
        vals = [kernel_rows[b][key] for b in backends]
        row = f"{key:<16}" + "".join(f"{v * 1e6:>11.1f} us" for v in vals)
        if len(vals) == 2:
            row += f"{vals[0] / vals[1]:>12.2f}x"
        print(row)

    print(f"\nend-to-end on poly_perturbation, {args.points} points:")
    times = {b: bench_pipeline(b, args.points) for b in backends}
    for label, idx in (("curvature stack", 0), ("equivalence oracle", 1)):
        vals = [times[b][idx] for b in backends]
        row = f"{label:<20}" + "".join(f"{v:>11.3f} s" for v in vals)
        if len(vals) == 2:
            row += f"{vals[0] / vals[1]:>10.2f}x"
        print(row)


if __name__ == "__main__":
    main()
