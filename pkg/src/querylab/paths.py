"""Hypercube walks, cycle cutting, the end-of-path oracle and the hit-the-path game.

Vertices of the n-cube are written externally as tuples with entries in
{1, 2}; internally they are n-bit integers where bit ``l`` is ``coord_l - 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import kernels
from .query import QueryTranscript, record


class DimensionMismatch(ValueError):
    pass


class InvalidPath(ValueError):
    pass


def encode(coords: Sequence[int]) -> int:
    v = 0
    for l, c in enumerate(coords):
        if c not in (1, 2):
            raise ValueError(f"hypercube coordinates must be 1 or 2, got {c}")
        v |= (c - 1) << l
    return v


def decode(v: int, n: int) -> tuple:
    return tuple(((int(v) >> l) & 1) + 1 for l in range(n))


def adjacent(u: int, v: int) -> bool:
    return bin(int(u) ^ int(v)).count("1") == 1


def grid_adjacent(u: Sequence[int], v: Sequence[int]) -> bool:
    """Adjacency in the grid graph G(n, k): one coordinate differs by exactly one."""
    diff = [abs(a - b) for a, b in zip(u, v)]
    return sum(diff) == 1


class Walk:
    """A sequence of hypercube vertices, consecutive ones adjacent."""

    def __init__(self, n: int, vertices):
        self.n = n
        self.vertices = vertices

    def __len__(self):
        return len(self.vertices)

    def coords(self):
        return [decode(v, self.n) for v in self.vertices]


class SimplePath(Walk):
    """A walk with no repeated vertex."""

    def __init__(self, n: int, vertices, check: bool = True):
        vertices = tuple(int(v) for v in vertices)
        super().__init__(n, vertices)
        if check:
            self.validate()
        self._index = None

    def validate(self):
        if not self.vertices:
            raise InvalidPath("empty path")
        if any(v < 0 or v >> self.n for v in self.vertices):
            raise InvalidPath("vertex outside the hypercube")
        if len(set(self.vertices)) != len(self.vertices):
            raise InvalidPath("path repeats a vertex")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if not adjacent(a, b):
                raise InvalidPath(f"vertices {decode(a, self.n)} and {decode(b, self.n)} are not adjacent")

    @classmethod
    def from_coords(cls, coords):
        coords = [tuple(c) for c in coords]
        return cls(len(coords[0]), [encode(c) for c in coords])

    @property
    def start(self):
        return self.vertices[0]

    @property
    def end(self):
        return self.vertices[-1]

    def position(self, v: int):
        if self._index is None:
            self._index = {u: i for i, u in enumerate(self.vertices)}
        return self._index.get(int(v))

    def __eq__(self, other):
        return isinstance(other, SimplePath) and self.n == other.n and self.vertices == other.vertices

    def __hash__(self):
        return hash((self.n, self.vertices))

    def __repr__(self):
        return f"SimplePath(n={self.n}, L={len(self)})"


def random_walk(n: int, steps: int, seed: int) -> Walk:
    """Walk of ``steps`` vertices from (1,...,1), flipping a uniform coordinate each move."""
    if n < 1 or steps < 1:
        raise ValueError("need n >= 1 and steps >= 1")
    rng = np.random.default_rng(seed)
    flips = rng.integers(0, n, size=steps - 1)
    if n <= 62:
        verts = kernels.walk_vertices(flips.astype(np.int64), 0)
    else:
        verts = kernels.python.walk_vertices(flips, 0)
    return Walk(n, verts)


def cut_cycles(walk: Walk) -> SimplePath:
    """Remove cycles: for the first vertex that recurs, cut up to its *last* recurrence."""
    if len(walk) == 0:
        raise ValueError("walk must be nonempty")
    verts = walk.vertices
    if isinstance(verts, np.ndarray) and verts.dtype == np.int64:
        out = kernels.cut_cycles(verts)
    else:
        out = kernels.python.cut_cycles(verts)
    return SimplePath(walk.n, out, check=False)


def max_cycle_length(walk: Walk) -> int:
    """Largest gap j - i between two visits of the same vertex (0 if none)."""
    verts = walk.vertices
    if isinstance(verts, np.ndarray) and verts.dtype == np.int64:
        return int(kernels.max_cycle_length(verts))
    return kernels.python.max_cycle_length(verts)


# ---------------------------------------------------------------------------
# end-of-simple-path oracle


@dataclass(frozen=True)
class LocalPathInfo:
    visited: bool
    prev: int | None = None
    next: int | None = None

    def as_coords(self, n):
        f = lambda v: None if v is None else decode(v, n)
        return self.visited, f(self.prev), f(self.next)


def esp_answer(path: SimplePath, v) -> LocalPathInfo:
    """Does the path visit v, and if so which vertices come before and after it."""
    if not isinstance(v, (int, np.integer)):
        if len(v) != path.n:
            raise DimensionMismatch(f"vertex has {len(v)} coordinates, path lives in n={path.n}")
        v = encode(v)
    elif int(v) >> path.n:
        raise DimensionMismatch("vertex index outside the hypercube")
    i = path.position(v)
    if i is None:
        return LocalPathInfo(False)
    prev = path.vertices[i - 1] if i > 0 else None
    nxt = path.vertices[i + 1] if i + 1 < len(path) else None
    return LocalPathInfo(True, prev, nxt)


class ESPOracle:
    """Transcript-recording wrapper around :func:`esp_answer`."""

    def __init__(self, path: SimplePath, transcript: QueryTranscript | None = None):
        self.path = path
        self.n = path.n
        self.transcript = transcript if transcript is not None else QueryTranscript()

    def __call__(self, v) -> LocalPathInfo:
        info = esp_answer(self.path, v)
        q = v if isinstance(v, (int, np.integer)) else encode(v)
        record(self.transcript, None, "esp", int(q), (int(info.visited), info.prev, info.next))
        return info


# ---------------------------------------------------------------------------
# hit-the-path game


@dataclass
class HtpOutcome:
    winner: str
    hit_step: int | None
    queries_used: int


def htp_play(path: SimplePath, algorithm: Callable, n: int, T: int,
             transcript: QueryTranscript | None = None) -> HtpOutcome:
    """Play T rounds; ``algorithm(revealed, t)`` returns an int vertex.

    Round t shows w_1..w_{n^2 (t-1)} and the guess wins if it equals some
    w_i with i > t n^2 (1-based).  Afterwards n^2 more vertices are revealed.
    """
    if path.n != n:
        raise DimensionMismatch("path dimension differs from n")
    block = n * n
    L = len(path)
    used = 0
    for t in range(1, T + 1):
        revealed = path.vertices[: min(L, block * (t - 1))]
        q = int(algorithm(revealed, t))
        used += 1
        i = path.position(q)  # 0-based
        hit = i is not None and i + 1 > t * block
        if transcript is not None:
            record(transcript, None, "htp", q, int(hit))
        if hit:
            return HtpOutcome("algorithm", t, used)
    return HtpOutcome("adversary", None, used)


def uniform_guess_win_probability(L: int, n: int, T: int) -> float:
    """Chance that T independent uniform guesses hit a future vertex of a length-L path."""
    miss = 1.0
    for t in range(1, T + 1):
        future = max(0, L - t * n * n)
        miss *= 1.0 - future / 2.0 ** n
    return 1.0 - miss


# ---------------------------------------------------------------------------
# serialization


def dumps_path(path: SimplePath) -> str:
    lines = [f"{path.n} {len(path)}"]
    lines += [" ".join(map(str, decode(v, path.n))) for v in path.vertices]
    return "\n".join(lines) + "\n"


class ParseError(ValueError):
    def __init__(self, line, msg):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def loads_path(text: str) -> SimplePath:
    lines = text.strip("\n").split("\n")
    try:
        n, L = (int(x) for x in lines[0].split())
    except ValueError:
        raise ParseError(1, "expected header 'n L'") from None
    if len(lines) - 1 != L:
        raise ParseError(len(lines), f"expected {L} vertex lines, found {len(lines) - 1}")
    verts = []
    for i, line in enumerate(lines[1:], start=2):
        try:
            c = [int(x) for x in line.split()]
            if len(c) != n:
                raise ValueError
            verts.append(encode(c))
        except ValueError:
            raise ParseError(i, "expected n coordinates in {1,2}") from None
    try:
        return SimplePath(n, verts)
    except InvalidPath as e:
        raise ParseError(2, str(e)) from None


def all_simple_paths(n: int):
    """Every simple path from vertex 0 (enumeration; only sensible for n <= 3)."""
    out = []

    def grow(p, seen):
        out.append(SimplePath(n, p, check=False))
        for l in range(n):
            w = p[-1] ^ (1 << l)
            if w not in seen:
                seen.add(w)
                p.append(w)
                grow(p, seen)
                p.pop()
                seen.remove(w)

    grow([0], {0})
    return out
