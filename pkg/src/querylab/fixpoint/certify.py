"""Numeric certificates (lambda*, eps*) for cell-wise multilinear maps."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .. import kernels
from .construction import GridMap, PathFunction
from .field import COARSE


class ResolutionTooCoarse(ValueError):
    pass


@dataclass
class Certificate:
    lambda_star: float
    eps_star: float
    h: float
    n: int
    path_hash: str = "unknown"
    method: str = "exact"

    @property
    def certified(self):
        return self.eps_star > 0

    def export(self) -> str:
        return (f"lambda_star={self.lambda_star!r}, eps_star={self.eps_star!r}, "
                f"h={self.h!r}, n={self.n}, path_hash={self.path_hash}")


def parse_certificate(text: str) -> Certificate:
    kv = dict(part.strip().split("=", 1) for part in text.strip().split(","))
    return Certificate(float(kv["lambda_star"]), float(kv["eps_star"]), float(kv["h"]),
                       int(kv["n"]), kv["path_hash"])


def _as_grid(f):
    return GridMap.from_function(f) if isinstance(f, PathFunction) else f


def lipschitz_bound(g: GridMap) -> float:
    """Max over fine cells and rows j of sum_l sup |d f_j / d x_l| (sup-norm constant).

    Clipping is 1-Lipschitz coordinatewise, so the bound for the unclipped
    multilinear map carries over.
    """
    return slope_bound(g.signs, g.step * g.res)


def slope_bound(signs, scale) -> float:
    """Slope bound for x + step*multilinear(signs) with ``scale = step / spacing``."""
    n = signs.shape[-1]
    res = signs.shape[0] - 1
    exact = abs(scale - round(scale)) < 1e-12
    # integer arithmetic when the slope scale is whole (the usual case): much faster
    s = signs.astype(np.int16) if exact else signs.astype(np.float64)
    if exact:
        scale = int(round(scale))
    total = None
    for l in range(n):
        hi = [slice(None)] * n
        lo = [slice(None)] * n
        hi[l] = slice(1, None)
        lo[l] = slice(0, -1)
        d = s[tuple(hi)] - s[tuple(lo)]  # edges along l
        eye = np.zeros(n, dtype=s.dtype)
        eye[l] = 1
        val = np.abs(eye + scale * d)  # (..., j)
        # per cell: max over the 2^(n-1) parallel edges
        best = None
        others = [m for m in range(n) if m != l]
        for bits in itertools.product((0, 1), repeat=len(others)):
            off = [0] * n
            for m, b in zip(others, bits):
                off[m] = b
            sl = tuple(slice(off[m], off[m] + res) for m in range(n))
            cur = val[sl]
            best = cur if best is None else np.maximum(best, cur)
        total = best if total is None else total + best
    return float(total.max())


def corner_extremes(signs):
    """Per fine cell, the min and max corner sign of every coordinate."""
    n = signs.shape[-1]
    res = signs.shape[0] - 1
    mn = mx = None
    for off in itertools.product((0, 1), repeat=n):
        c = signs[tuple(slice(o, o + res) for o in off)]
        mn = c if mn is None else np.minimum(mn, c)
        mx = c if mx is None else np.maximum(mx, c)
    return mn, mx


def _outside_cell_mask(shape_cells, cell_res, end_cell):
    """Boolean mask over fine cells: True when the fine cell is not inside end_cell."""
    n = len(shape_cells)
    if end_cell is None:
        return np.ones(shape_cells, dtype=bool)
    inside = np.ones(shape_cells, dtype=bool)
    for l in range(n):
        idx = np.arange(shape_cells[l]) // cell_res
        sh = [1] * n
        sh[l] = shape_cells[l]
        inside &= (idx == end_cell[l]).reshape(sh)
    return ~inside


def exact_eps(g: GridMap) -> float:
    """Displacement floor off the end cell from per-cell sign agreement.

    A fine cell whose corners all share sign s in coordinate j moves every
    point by exactly s*step in j before clipping, i.e. by at least
    min(step, distance to the wall ahead).
    """
    n, res = g.n, g.res
    mn, mx = corner_extremes(g.signs)
    h = 1.0 / res
    bound = np.zeros((res,) * n)
    for j in range(n):
        sh = [1] * n
        sh[j] = res
        q = np.arange(res).reshape(sh)
        up = np.where(mn[..., j] == 1, np.minimum(g.step, 1.0 - (q + 1) * h), 0.0)
        down = np.where(mx[..., j] == -1, np.minimum(g.step, q * h), 0.0)
        bound = np.maximum(bound, np.maximum(up, down))
    mask = _outside_cell_mask((res,) * n, res // COARSE, g.end_cell)
    return float(bound[mask].min()) if mask.any() else math.inf


def scan_min_displacement(g: GridMap, h: float, chunk=1 << 16) -> float:
    """Min sup-norm displacement over the h-grid, skipping points strictly inside the end cell."""
    n = g.n
    m = round(1.0 / h)
    axis = np.arange(m + 1)
    best = math.inf
    total = (m + 1) ** n
    per = m // COARSE
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk))
        idx = np.stack(np.unravel_index(flat, (m + 1,) * n), axis=1)
        if g.end_cell is not None:
            e = np.asarray(g.end_cell)
            inside = ((idx > e * per) & (idx < (e + 1) * per)).all(axis=1)
            idx = idx[~inside]
        if len(idx) == 0:
            continue
        x = idx / m
        y = kernels.field_eval(g.signs, n, g.res, g.step, x)
        best = min(best, float(np.abs(y - x).max(axis=1).min()))
    return best


def default_resolution(lambda_star, eps_target):
    return 1.0 / (COARSE * math.ceil(2 * (lambda_star + 1) / eps_target))


def certify_displacement(f, h: float | None = None, method: str = "exact") -> Certificate:
    """Certify lambda* and eps* for a PathFunction or GridMap.

    ``method="exact"`` derives eps* from sign agreement on every fine cell and
    reports the fine grid spacing as h.  ``method="scan"`` evaluates on the
    h-grid and subtracts the Lipschitz slack (lambda*+1)*h/2.
    """
    g = _as_grid(f)
    lam = lipschitz_bound(g)
    label = getattr(g, "label", "unknown")
    if method == "exact":
        return Certificate(lam, exact_eps(g), 1.0 / g.res, g.n, label, "exact")
    if method != "scan":
        raise ValueError(f"unknown method {method!r}")
    if h is None:
        h = 1.0 / g.res
    m = round(1.0 / h)
    if abs(m * h - 1.0) > 1e-9 or m % COARSE:
        raise ValueError("h must divide 1/6 evenly")
    lo = scan_min_displacement(g, 1.0 / m)
    slack = (lam + 1.0) * h / 2.0
    if lo > 0 and slack >= lo:
        raise ResolutionTooCoarse(
            f"slack {slack:.4g} exceeds scanned minimum {lo:.4g}; "
            f"try h={default_resolution(lam, lo):.4g}")
    return Certificate(lam, lo - slack, h, g.n, label, "scan")


def game_parameters(cert: Certificate, multiple: int = 84):
    """Grid size k and the matching eps' <= eps* used for the derived game.

    k is rounded up to a multiple of ``multiple`` so the end cell's sink lies
    on the action grid (hub coordinates are odd multiples of 1/84).  Then
    eps' = (lambda*+3)/k, so that ceil((lambda*+3)/eps') == k.
    """
    if not cert.certified:
        raise ValueError("certificate is not positive")
    lam = Fraction(cert.lambda_star).limit_denominator(10 ** 9)
    eps = Fraction(cert.eps_star).limit_denominator(10 ** 9)
    target = math.ceil((lam + 3) / eps)
    k = multiple * math.ceil(target / multiple)
    eps_game = float(cert.lambda_star + 3) / k
    while math.ceil((cert.lambda_star + 3) / eps_game) > k:
        eps_game = np.nextafter(eps_game, np.inf)
    return k, eps_game


def dimension_certificate(n: int) -> Certificate:
    """One certificate valid for every path in dimension n.

    Each coarse cell's signs depend only on that cell's local type, so it is
    enough to check every type once: the table-driven path cells, the end
    cell's facets (which neighbours see), unvisited cells, and the background
    outside the start cell.  Central cells are at least 1/3 from the walls,
    so clipping never reduces their displacement below ``STEP``.
    """
    from . import tables
    from .field import (GRID, RES, STEP, background_grid, cell_of_vertex, cell_targets,
                        signs_from_targets)
    from .construction import GridMap as _G
    scale = STEP * GRID
    lam = 0.0
    eps = STEP
    shape = (RES + 1,) * n + (n,)

    def check(sig, certify=True):
        nonlocal lam, eps
        sig = sig.reshape(shape)
        lam = max(lam, slope_bound(sig, scale))
        if certify:
            mn, mx = corner_extremes(sig)
            ok = ((mn == 1) | (mx == -1)).any(axis=-1)
            if not ok.all():
                eps = 0.0

    for bits in range(1 << n):
        cell = cell_of_vertex(bits, n)
        T, _ = cell_targets(n, cell, None, None, visited=False)
        check(signs_from_targets(n, cell, T), certify=bits != 0)
        prevs = [None] if bits == 0 else list(range(n))
        for p in prevs:
            T, _ = cell_targets(n, cell, p, None)
            check(signs_from_targets(n, cell, T), certify=False)  # end cell
            for b in range(n):
                if b == p or bits ^ (1 << b) == 0:
                    continue
                T, interior = cell_targets(n, cell, p, b)
                sig = signs_from_targets(n, cell, T)
                sig[interior] = tables.interior_signs(n, bits, p, b)
                check(sig)
    bg = _G(background_grid(n), end_cell=cell_of_vertex(0, n))
    lam = max(lam, lipschitz_bound(bg))
    eps = min(eps, exact_eps(bg))
    return Certificate(lam, eps, 1.0 / GRID, n, "all-paths", "types")
