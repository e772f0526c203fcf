"""The map built from a simple path, evaluated lazily through end-of-path queries."""
from __future__ import annotations

import hashlib
import threading

import numpy as np

from ..paths import ESPOracle, InvalidPath, LocalPathInfo, SimplePath
from ..query import QueryTranscript, record
from . import field, tables
from .field import GRID, RES, STEP


class OutOfDomain(ValueError):
    pass


def _axis(u, v):
    return (int(u) ^ int(v)).bit_length() - 1


class PathFunction:
    """f: [0,1]^n -> [0,1]^n whose approximate fixed points sit in the end cell.

    ``oracle(v)`` answers the end-of-path question for hypercube vertex v
    (an int); the only cell for which no query is ever needed is one outside
    the central block.  Materialized cells are memoized, so each cell costs
    one oracle call at most.
    """

    def __init__(self, n, oracle, path: SimplePath | None = None):
        field.check_dimension(n)
        self.n = n
        self.oracle = oracle
        self.path = path
        self._cells = {}
        self._lock = threading.Lock()
        self._dense = None

    # -- cells -------------------------------------------------------------
    @property
    def end_cell(self):
        if self.path is None:
            raise AttributeError("end cell is unknown without the path")
        return field.cell_of_vertex(self.path.end, self.n)

    def cell_signs(self, cell):
        """int8 signs for the (RES+1)^n local vertices of a coarse cell, C order."""
        cell = tuple(int(c) for c in cell)
        got = self._cells.get(cell)
        if got is not None:
            return got
        v = field.vertex_of_cell(cell)
        if v is None:
            T, _ = field.cell_targets(self.n, cell, None, None, visited=False)
            signs = field.signs_from_targets(self.n, cell, T)
        else:
            signs = self._materialize(cell, v, self.oracle(v))
        with self._lock:
            self._cells.setdefault(cell, signs)
        return self._cells[cell]

    def _materialize(self, cell, v, info: LocalPathInfo):
        n = self.n
        if not info.visited:
            T, _ = field.cell_targets(n, cell, None, None, visited=False)
            return field.signs_from_targets(n, cell, T)
        pa = None if info.prev is None else _axis(v, info.prev)
        na = None if info.next is None else _axis(v, info.next)
        T, interior = field.cell_targets(n, cell, pa, na)
        signs = field.signs_from_targets(n, cell, T)
        if interior.any():
            signs[interior] = tables.interior_signs(n, v, pa, na)
        return signs

    # -- evaluation ----------------------------------------------------------
    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.n:
            raise OutOfDomain(f"expected {self.n} coordinates")
        if not np.all((x >= 0.0) & (x <= 1.0)):
            raise OutOfDomain("point outside [0,1]^n")
        return x

    def locate(self, x):
        """Coarse cell containing x (the lower one on shared faces)."""
        q = np.clip(np.floor(np.asarray(x) * GRID).astype(np.int64), 0, GRID - 1)
        return tuple(int(c) for c in q // RES)

    def __call__(self, x):
        x = self._check(x)
        if x.ndim == 1:
            return self.eval_many(x[None, :])[0]
        return self.eval_many(x)

    def eval_many(self, X):
        X = self._check(np.atleast_2d(X))
        n = self.n
        q = np.clip(np.floor(X * GRID).astype(np.int64), 0, GRID - 1)
        cells = q // RES
        out = np.empty_like(X)
        keys, inverse = np.unique(cells, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        for g, cell in enumerate(keys):
            rows = np.flatnonzero(inverse == g)
            sig = self.cell_signs(cell).reshape((RES + 1,) * n + (n,))
            base = q[rows] - cell * RES
            frac = X[rows] * GRID - q[rows]
            disp = np.zeros((len(rows), n))
            for corner in range(1 << n):
                w = np.ones(len(rows))
                idx = []
                for l in range(n):
                    bit = (corner >> l) & 1
                    w = w * (frac[:, l] if bit else 1.0 - frac[:, l])
                    idx.append(base[:, l] + bit)
                disp += w[:, None] * sig[tuple(idx)]
            out[rows] = X[rows] + STEP * disp
        return np.clip(out, 0.0, 1.0)

    # -- whole-domain views --------------------------------------------------
    def dense_signs(self):
        """Full (GRID+1)^n x n sign grid (materializes every central cell)."""
        if self._dense is not None:
            return self._dense
        n = self.n
        grid = field.background_grid(n)
        for bits in range(1 << n):
            cell = field.cell_of_vertex(bits, n)
            sig = self.cell_signs(cell).reshape((RES + 1,) * n + (n,))
            sl = tuple(slice(c * RES, c * RES + RES + 1) for c in cell)
            grid[sl] = sig
        self._dense = grid
        return grid

    def path_hash(self):
        if self.path is None:
            return "unknown"
        data = f"{self.n}:" + ",".join(map(str, self.path.vertices))
        return hashlib.sha256(data.encode()).hexdigest()[:16]


def build_path_function(path: SimplePath, transcript: QueryTranscript | None = None) -> PathFunction:
    """Build f from a simple path starting at (1,...,1).

    With a transcript, each cell materialization is recorded as one ESP query.
    """
    if len(path) == 0 or path.start != 0:
        raise InvalidPath("path must start at (1,...,1)")
    path.validate()
    oracle = ESPOracle(path, transcript) if transcript is not None else ESPOracle(path)
    return PathFunction(path.n, oracle, path)


class AFPOracle:
    """Counted point queries to a function: each call is one AFP query."""

    def __init__(self, f, transcript: QueryTranscript | None = None):
        self.f = f
        self.transcript = transcript if transcript is not None else QueryTranscript()

    def __call__(self, x):
        y = np.asarray(self.f(np.asarray(x, dtype=float)), dtype=float)
        record(self.transcript, None, "afp", tuple(np.asarray(x, dtype=float)), tuple(y))
        return y


class GridMap:
    """x + STEP * multilinear(signs) on a dense fine grid, clipped to the cube.

    The frozen, query-free view of a PathFunction (``from_function``), also
    handy for hand-made fields: all-zero signs give the identity map.
    """

    def __init__(self, signs, end_cell=None, res=GRID, step=STEP, label="grid"):
        self.signs = np.ascontiguousarray(signs, dtype=np.int8)
        self.n = self.signs.shape[-1]
        self.res = res
        self.step = step
        self.end_cell = None if end_cell is None else tuple(end_cell)
        self.label = label

    @classmethod
    def from_function(cls, f: PathFunction):
        return cls(f.dense_signs(), f.end_cell, label=f.path_hash())

    def __call__(self, x):
        from .. import kernels
        x = np.asarray(x, dtype=float)
        if np.any((x < 0) | (x > 1)):
            raise OutOfDomain("point outside [0,1]^n")
        out = kernels.field_eval(self.signs, self.n, self.res, self.step, np.atleast_2d(x))
        return out[0] if x.ndim == 1 else out
