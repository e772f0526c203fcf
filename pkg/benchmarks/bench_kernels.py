"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run on identical inputs by both backends; outputs are checked
for equality before timings are reported.
"""
import argparse
import time

import numpy as np

from querylab import _pykernels as python
from querylab import kernels
from querylab.fixpoint import GridMap, build_path_function, game_parameters, certify_displacement
from querylab.paths import cut_cycles, random_walk


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    return a == b


def cases():
    rng = np.random.default_rng(0)
    flips = rng.integers(0, 20, size=2 ** 18)
    verts = python.walk_vertices(flips, 0)
    yield "walk_vertices (2^18 flips)", lambda m: m.walk_vertices(flips, 0)
    yield "cut_cycles (2^18 vertices)", lambda m: m.cut_cycles(verts)
    yield "max_cycle_length (2^18)", lambda m: m.max_cycle_length(verts)

    path = cut_cycles(random_walk(3, 32, 1))
    f = build_path_function(path)
    g = GridMap.from_function(f)
    pts = rng.random((20000, 3))
    yield "field_eval (n=3, 2*10^4 pts)", lambda m: m.field_eval(g.signs, 3, g.res, g.step, pts)

    path2 = cut_cycles(random_walk(2, 16, 3))
    g2 = GridMap.from_function(build_path_function(path2))
    k, _ = game_parameters(certify_displacement(g2))
    yield f"scan_pure_fixed_grid (n=2, k={k})", lambda m: m.scan_pure_fixed_grid(g2.signs, 2, g2.res, g2.step, k)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.compiled is None:
        print("compiled extension not built; only the Python backend is available")
        return
    print(f"{'kernel':38s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}")
    for name, run in cases():
        tp, op = best_of(lambda: run(python), args.repeat)
        tc, oc = best_of(lambda: run(kernels.compiled), args.repeat)
        assert same(op, oc), f"backends disagree on {name}"
        print(f"{name:38s} {tp:10.4f} {tc:11.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
