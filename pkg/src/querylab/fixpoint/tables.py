"""Loading the precomputed interior sign tables.

File layout (``data/interior_tables.npz``), for each supported n:
  ``keys_{n}``  int16 array (T, 3): cell bits, entry axis (-1 at the start), exit axis
  ``bits_{n}``  uint8 packbits of the (T, (RES-1)^n * n) sign array, 1 meaning +1
Interior vertices are listed in C order of their local offsets 1..RES-1.
"""
from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np

from .field import RES, check_dimension

DATA = Path(__file__).with_name("data") / "interior_tables.npz"


class MissingTable(KeyError):
    pass


@lru_cache(maxsize=None)
def _load(n):
    check_dimension(n)
    with np.load(DATA) as z:
        keys = z[f"keys_{n}"]
        bits = z[f"bits_{n}"]
    width = (RES - 1) ** n * n
    signs = np.unpackbits(bits, axis=1, count=width).astype(np.int8) * 2 - 1
    signs = signs.reshape(len(keys), (RES - 1) ** n, n)
    index = {tuple(int(x) for x in k): i for i, k in enumerate(keys)}
    return index, signs


def interior_signs(n, cell_bits, prev_axis, next_axis):
    """(RES-1)^n x n int8 signs for the interior of a non-end path cell."""
    index, signs = _load(n)
    key = (cell_bits, -1 if prev_axis is None else prev_axis, next_axis)
    if key not in index:
        raise MissingTable(f"no interior table for n={n}, type {key}")
    return signs[index[key]]


def pack(keys, signs):
    """Inverse of the loader, used by the generator script."""
    keys = np.asarray(keys, dtype=np.int16)
    flat = (np.asarray(signs).reshape(len(keys), -1) > 0).astype(np.uint8)
    return keys, np.packbits(flat, axis=1)
