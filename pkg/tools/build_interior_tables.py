"""Regenerate src/querylab/fixpoint/data/interior_tables.npz.

For every local type of a non-end path cell (its vertex, entry axis, exit
axis) we fix the facet and skeleton signs from the door/background rule and
ask a SAT solver for interior signs such that every fine cell has a
coordinate whose sign agrees at all 2^n corners.

Needs python-sat (``pip install python-sat``); the package itself does not.

    python3 tools/build_interior_tables.py [max_n]
"""
import itertools
import sys
import time
from pathlib import Path

import numpy as np
from pysat.solvers import Cadical153

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from querylab.fixpoint import field, tables  # noqa: E402


def local_types(n):
    for c in range(1 << n):
        prevs = [-1] if c == 0 else list(range(n))
        for p in prevs:
            for b in range(n):
                if b == p or c ^ (1 << b) == 0:
                    continue
                yield c, p, b


def solve_type(n, c, p, b):
    R = field.RES
    cell = field.cell_of_vertex(c, n)
    T, interior = field.cell_targets(n, cell, None if p < 0 else p, b)
    fixed = field.signs_from_targets(n, cell, T)
    V = field.local_vertices(n)
    pos = {tuple(v): i for i, v in enumerate(V)}
    var = {}
    nv = 0
    for i in np.flatnonzero(interior):
        var[i] = list(range(nv + 1, nv + n + 1))
        nv += n
    clauses = []
    offsets = list(itertools.product((0, 1), repeat=n))
    for q in itertools.product(range(R), repeat=n):
        corners = [pos[tuple(a + d for a, d in zip(q, off))] for off in offsets]
        options = []
        for j in range(n):
            for s in (1, -1):
                if any(i not in var and fixed[i, j] != s for i in corners):
                    continue
                nv += 1
                options.append(nv)
                for i in corners:
                    if i in var:
                        lit = var[i][j]
                        clauses.append([-nv, lit if s == 1 else -lit])
        clauses.append(options)
    with Cadical153(bootstrap_with=clauses) as solver:
        if not solver.solve():
            raise RuntimeError(f"no interior exists for type {(n, c, p, b)}")
        model = set(x for x in solver.get_model() if x > 0)
    rows = sorted(var)
    return np.array([[1 if x in model else -1 for x in var[i]] for i in rows], dtype=np.int8)


def main(max_n=field.MAX_N):
    out = {}
    for n in range(1, max_n + 1):
        t0 = time.time()
        keys, signs = [], []
        for key in local_types(n):
            keys.append(key)
            signs.append(solve_type(n, *key))
        out[f"keys_{n}"], out[f"bits_{n}"] = tables.pack(keys, signs)
        print(f"n={n}: {len(keys)} types in {time.time() - t0:.1f}s", flush=True)
    tables.DATA.parent.mkdir(exist_ok=True)
    np.savez_compressed(tables.DATA, **out)
    print("wrote", tables.DATA)


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else field.MAX_N)
