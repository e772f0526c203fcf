import numpy as np
import pytest

from querylab import _pykernels as python
from querylab import kernels
from querylab.fixpoint import GridMap, build_path_function, certify_displacement, game_parameters
from querylab.paths import cut_cycles, random_walk

compiled = pytest.mark.skipif(kernels.compiled is None, reason="compiled extension not built")


@compiled
def test_walk_kernels_agree():
    rng = np.random.default_rng(0)
    for n in (1, 3, 20):
        flips = rng.integers(0, n, size=5000).astype(np.int64)
        a = python.walk_vertices(flips, 0)
        b = kernels.compiled.walk_vertices(flips, 0)
        assert np.array_equal(a, b)
        assert list(python.cut_cycles(a)) == list(kernels.compiled.cut_cycles(b))
        assert python.max_cycle_length(a) == kernels.compiled.max_cycle_length(b)


@compiled
def test_field_eval_agrees():
    rng = np.random.default_rng(1)
    for n in (1, 2, 3, 4):
        g = GridMap.from_function(build_path_function(cut_cycles(random_walk(n, 20, seed=n))))
        X = rng.random((500, n))
        X[:5] = np.round(X[:5] * 42) / 42  # exact grid nodes
        a = python.field_eval(g.signs, n, g.res, g.step, X)
        b = kernels.compiled.field_eval(g.signs, n, g.res, g.step, X)
        assert np.max(np.abs(a - b)) < 1e-14


@compiled
def test_pruned_scan_equals_exhaustive_scan():
    for n, seed in [(1, 0), (2, 1), (2, 5)]:
        g = GridMap.from_function(build_path_function(cut_cycles(random_walk(n, 12, seed=seed))))
        k, _ = game_parameters(certify_displacement(g))
        a = python.scan_pure_fixed_grid(g.signs, n, g.res, g.step, k)
        b = kernels.compiled.scan_pure_fixed_grid(g.signs, n, g.res, g.step, k)
        assert len(a) > 0
        assert np.array_equal(a, b)


def test_backend_is_reported():
    assert kernels.BACKEND in ("compiled", "python")
