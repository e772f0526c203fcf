"""Pure-Python/numpy versions of the hot loops.

These are the reference implementations; the compiled module ``_ckernels``
mirrors every function here with the same signature and results.
"""
import numpy as np


def walk_vertices(flips, start=0):
    """Cumulative xor of ``1 << flip``: the vertex sequence of a bit-flip walk."""
    out = [start]
    v = start
    for f in flips:
        v ^= 1 << int(f)
        out.append(v)
    return np.array(out, dtype=np.int64) if _fits(out) else out


def _fits(seq):
    return all(0 <= int(x) < (1 << 62) for x in seq)


def cut_cycles(verts):
    """Keep the first vertex, jump past its last recurrence, repeat."""
    verts = [int(v) for v in verts]
    last = {}
    for i, v in enumerate(verts):
        last[v] = i
    out = []
    i = 0
    while i < len(verts):
        v = verts[i]
        out.append(v)
        i = last[v] + 1
    return out


def max_cycle_length(verts):
    first = {}
    best = 0
    for i, v in enumerate(verts):
        v = int(v)
        if v in first:
            best = max(best, i - first[v])
        else:
            first[v] = i
    return best


def field_eval(sig, shape_n, res, step, pts):
    """Evaluate x + multilinear(step * sig) clipped to [0,1] at each row of pts.

    ``sig`` is an int8 array of shape (res+1,)*n + (n,) holding the unit
    displacement signs on the grid of spacing 1/res.
    """
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    n = shape_n
    m = pts.shape[0]
    t = pts * res
    base = np.clip(np.floor(t).astype(np.int64), 0, res - 1)
    frac = t - base
    disp = np.zeros((m, n))
    for corner in range(1 << n):
        w = np.ones(m)
        idx = []
        for l in range(n):
            bit = (corner >> l) & 1
            w = w * (frac[:, l] if bit else 1.0 - frac[:, l])
            idx.append(base[:, l] + bit)
        disp += w[:, None] * sig[tuple(idx)]
    return np.clip(pts + step * disp, 0.0, 1.0)


def scan_pure_fixed_grid(sig, shape_n, res, step, k, chunk=1 << 18):
    """All a in {0..k}^n whose image f(a/k) passes the group-2 WSNE test.

    Player i's action a_i/k must be within 3/(4k^2) (squared-distance slack)
    of the best grid reply to f_i(a/k).  Returns an (m, n) int array.
    """
    n = shape_n
    total = (k + 1) ** n
    found = []
    slack = 3.0 / (4.0 * k * k)
    for lo in range(0, total, chunk):
        flat = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        a = np.stack(np.unravel_index(flat, (k + 1,) * n), axis=1)
        y = field_eval(sig, n, res, step, a / k)
        near = np.clip(np.round(y * k), 0, k) / k
        ok = ((a / k - y) ** 2 <= (near - y) ** 2 + slack + 1e-12).all(axis=1)
        if ok.any():
            found.append(a[ok])
    if not found:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(found)
