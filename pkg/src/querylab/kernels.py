"""Pick the compiled kernels when available, else the pure-Python ones.

Set ``QUERYLAB_PURE_PYTHON=1`` to force the fallback (used by the benchmark
and by the equivalence tests).
"""
import os

from . import _pykernels as python

compiled = None
if os.environ.get("QUERYLAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled
    except ImportError:  # extension not built
        compiled = None

active = compiled if compiled is not None else python
BACKEND = "compiled" if compiled is not None else "python"


def walk_vertices(flips, start=0):
    return active.walk_vertices(flips, start)


def cut_cycles(verts):
    return active.cut_cycles(verts)


def max_cycle_length(verts):
    return active.max_cycle_length(verts)


def field_eval(sig, n, res, step, pts):
    return active.field_eval(sig, n, res, step, pts)


def scan_pure_fixed_grid(sig, n, res, step, k):
    return active.scan_pure_fixed_grid(sig, n, res, step, k)
