"""Sign field on the fine grid for the path-following map.

Geometry
--------
[0,1]^n is cut into 6 coarse cells per axis (width 1/6).  Hypercube vertex v
(coordinates in {1,2}) owns coarse cell v+1, so the path lives in the central
block of cells {2,3}^n.  Each coarse cell is subdivided into ``RES`` fine
cells per axis, so the fine grid has ``GRID = 6*RES`` cells per axis.

Every fine-grid vertex carries a sign vector s in {-1,+1}^n and the map is

    f(x) = clip(x + STEP * multilinear(s)(x), 0, 1).

A fine cell is *certified* when some coordinate j has the same sign at all
of its corners; then |f_j(x) - x_j| = STEP there (up to clipping, which never
bites because every default target is interior).

Targets
-------
Signs are written as ``sign(target - vertex)`` for a target point that is
never on the grid.  A "hub" is the centre of the fine cell at local offset
``HUB`` inside a coarse cell; the start cell's hub is the global sink of the
background flow.

* background (unvisited cells, outside the central block, the skeleton of
  every coarse cell, facets that are not a door): target = start hub.
* door facet between consecutive path cells P -> Q (crossing axis a), by the
  perpendicular local coordinates of the vertex:
    all in the core window  -> hub(Q)
    all in the wider window -> hub(P)
    otherwise               -> start hub with coordinate a taken from hub(P).
* interior of the end cell: hub of the end cell (the only sink).
* interior of any other path cell: a precomputed table keyed by the cell's
  local type (its vertex, the axis it was entered from, the axis it leaves
  by).  The tables were found by a SAT search that demands every fine cell be
  certified; see ``tools/build_interior_tables.py``.

Everything a cell needs is determined by the end-of-path answer for that one
cell, so one oracle call materializes a cell.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

COARSE = 6
RES = 7
GRID = COARSE * RES
HUB = 3
CORE = (HUB, HUB + 1)
WIDE = tuple(range(HUB - 1, HUB + 3))
STEP = 1.0 / 6.0
CENTRAL = (2, 3)
MAX_N = 4


class UnsupportedDimension(ValueError):
    pass


def start_hub(n):
    return np.full(n, CENTRAL[0] * RES + HUB + 0.5)


def hub(cell):
    return np.asarray(cell, dtype=float) * RES + HUB + 0.5


def cell_of_vertex(v: int, n: int) -> tuple:
    return tuple(CENTRAL[0] + ((v >> l) & 1) for l in range(n))


def vertex_of_cell(cell) -> int | None:
    if any(c not in CENTRAL for c in cell):
        return None
    return sum((c - CENTRAL[0]) << l for l, c in enumerate(cell))


@lru_cache(maxsize=None)
def local_vertices(n):
    """All local vertex offsets {0..RES}^n in C order, shape (m, n)."""
    return np.array(list(itertools.product(range(RES + 1), repeat=n)), dtype=np.int64)


def _neighbor(cell, axis):
    c = list(cell)
    c[axis] = CENTRAL[0] + CENTRAL[1] - c[axis]
    return tuple(c)


def cell_targets(n, cell, prev_axis, next_axis, visited=True):
    """Target points for every local vertex of ``cell`` (global fine coordinates).

    ``prev_axis``/``next_axis`` are the axes crossed to enter/leave the cell
    (None at the start/end).  Returns (targets, interior_mask); interior rows
    of a non-end path cell are left at the background and flagged so the
    caller can overwrite them from the table.
    """
    cell = tuple(cell)
    V = local_vertices(n)
    G = V + np.asarray(cell) * RES
    T = np.tile(start_hub(n), (len(V), 1))
    on_wall = (V == 0) | (V == RES)
    interior = ~on_wall.any(axis=1)
    if not visited:
        return T, np.zeros(len(V), dtype=bool)
    doors = []
    if prev_axis is not None:
        doors.append((prev_axis, _neighbor(cell, prev_axis), cell))
    if next_axis is not None:
        doors.append((next_axis, cell, _neighbor(cell, next_axis)))
    facet = on_wall.sum(axis=1) == 1
    for a, P, Q in doors:
        other = P if Q == cell else Q
        side = RES if other[a] > cell[a] else 0
        rows = facet & (V[:, a] == side)
        perp = np.delete(V, a, axis=1)
        core = np.isin(perp, CORE).all(axis=1)
        wide = np.isin(perp, WIDE).all(axis=1)
        T[rows & core] = hub(Q)
        T[rows & ~core & wide] = hub(P)
        outer = rows & ~wide
        T[outer, a] = hub(P)[a]
    if next_axis is None:
        T[interior] = hub(cell)
        return T, np.zeros(len(V), dtype=bool)
    return T, interior


def signs_from_targets(n, cell, T):
    G = local_vertices(n) + np.asarray(cell) * RES
    s = np.sign(T - G).astype(np.int8)
    assert (s != 0).all()
    return s


def background_grid(n):
    """Sign grid of shape (GRID+1,)*n + (n,) pointing at the start hub everywhere."""
    c = CENTRAL[0] * RES + HUB + 0.5
    axis = np.sign(c - np.arange(GRID + 1)).astype(np.int8)
    out = np.empty((GRID + 1,) * n + (n,), dtype=np.int8)
    for j in range(n):
        shape = [1] * n
        shape[j] = GRID + 1
        out[..., j] = axis.reshape(shape)
    return out


def check_dimension(n):
    if not 1 <= n <= MAX_N:
        raise UnsupportedDimension(
            f"the interior tables cover 1 <= n <= {MAX_N}; got n={n}")
