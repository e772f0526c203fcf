"""Normal-form games, the two-group game built from a map, and equilibrium verifiers.

A mixed profile is a list of 1-D probability arrays, one per player.
Payoffs live in [0, 1].
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from .query import QueryTranscript, _fmt, record

SUPPORT_TOL = 1e-12


class InvalidParameters(ValueError):
    pass


class TooLarge(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, line, msg):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def pure(actions, sizes):
    """Mixed profile putting all mass on the given action indices."""
    out = []
    for a, m in zip(actions, sizes):
        x = np.zeros(m)
        x[a] = 1.0
        out.append(x)
    return out


def uniform(sizes):
    return [np.full(m, 1.0 / m) for m in sizes]


def support(x):
    return np.flatnonzero(np.asarray(x) > SUPPORT_TOL)


def check_profile(profile, sizes):
    if len(profile) != len(sizes):
        raise ValueError("profile has the wrong number of players")
    for x, m in zip(profile, sizes):
        x = np.asarray(x)
        if x.shape != (m,) or np.any(x < -SUPPORT_TOL) or abs(x.sum() - 1.0) > 1e-9:
            raise ValueError("each strategy must be a distribution over that player's actions")


# ---------------------------------------------------------------------------
# explicit games


class ExplicitGame:
    """Full payoff tensor of shape (m_1, ..., m_n, n)."""

    def __init__(self, payoffs):
        payoffs = np.asarray(payoffs, dtype=float)
        if payoffs.ndim < 2 or payoffs.shape[-1] != payoffs.ndim - 1:
            raise InvalidParameters("payoff tensor must have shape (m_1..m_n, n)")
        if np.any(payoffs < 0) or np.any(payoffs > 1):
            raise InvalidParameters("payoffs must lie in [0, 1]")
        self.payoffs = payoffs
        self.n = payoffs.ndim - 1
        self.sizes = payoffs.shape[:-1]

    @property
    def num_profiles(self):
        return int(np.prod(self.sizes))

    def payoff(self, actions, transcript: QueryTranscript | None = None):
        u = self.payoffs[tuple(actions)].copy()
        if transcript is not None:
            record(transcript, None, "wsn", tuple(int(a) for a in actions), tuple(u))
        return u

    def action_values(self, player, profile):
        """u_i(a_i, x_{-i}) for every own action a_i."""
        T = self.payoffs[..., player]
        for j in reversed(range(self.n)):
            if j != player:
                T = np.tensordot(T, np.asarray(profile[j], dtype=float), axes=([j], [0]))
        return T

    def expected_payoffs(self, profile):
        return np.array([self.action_values(i, profile) @ np.asarray(profile[i]) for i in range(self.n)])

    def shifted(self, c):
        """Same game with every payoff moved by c (kept only if it stays in [0, 1])."""
        return ExplicitGame(self.payoffs + c)


# ---------------------------------------------------------------------------
# game from a map


def grid_size(lam, eps) -> int:
    """k = ceil((lambda + 3) / eps), computed on exact rationals."""
    lam = Fraction(lam).limit_denominator(10 ** 12) if isinstance(lam, float) else Fraction(lam)
    eps = Fraction(eps).limit_denominator(10 ** 12) if isinstance(eps, float) else Fraction(eps)
    return math.ceil((lam + 3) / eps)


class FunctionGame:
    """2n players; player i < n picks a_i, player n+i picks b_i, all on {0, 1/k, ..., 1}.

    Payoffs (shifted by +1 into [0, 1]):
        u_i = 1 - (a_i - b_i)^2          (group 1 imitates group 2)
        v_i = 1 - (b_i - f_i(a))^2       (group 2 tracks the map)
    """

    def __init__(self, f, lam, eps, n=None, k=None, transcript: QueryTranscript | None = None):
        if lam < 0 or eps <= 0:
            raise InvalidParameters("need lambda >= 0 and eps > 0")
        self.f = f
        self.lam = lam
        self.eps = eps
        self.k = grid_size(lam, eps) if k is None else int(k)
        if self.k < 3:
            raise InvalidParameters("k must be at least 3")
        self.dim = getattr(f, "n", None) if n is None else n
        if self.dim is None:
            raise InvalidParameters("dimension of f is unknown; pass n")
        self.n = 2 * self.dim
        self.sizes = (self.k + 1,) * self.n
        self.transcript = transcript
        self._fcache = {}

    @property
    def grid(self):
        return np.arange(self.k + 1) / self.k

    def f_at(self, a):
        """f(a/k), evaluated once per distinct group-1 profile."""
        key = tuple(int(x) for x in a)
        if key not in self._fcache:
            self._fcache[key] = np.asarray(self.f(np.array(key) / self.k), dtype=float)
        return self._fcache[key]

    def payoff(self, actions, transcript: QueryTranscript | None = None):
        d = self.dim
        a = np.asarray(actions[:d])
        b = np.asarray(actions[d:])
        fa = self.f_at(a)
        u = 1.0 - ((a - b) / self.k) ** 2
        v = 1.0 - (b / self.k - fa) ** 2
        out = np.concatenate([u, v])
        tr = transcript if transcript is not None else self.transcript
        if tr is not None:
            record(tr, None, "wsn", tuple(int(x) for x in actions), tuple(out))
        return out

    def action_values(self, player, profile):
        d = self.dim
        g = self.grid
        if player < d:
            y = np.asarray(profile[d + player], dtype=float)
            return expected_payoff_quadratic(g, y, self.k)
        i = player - d
        supps = [support(profile[j]) for j in range(d)]
        mean = 0.0
        second = 0.0
        for a in itertools.product(*supps):
            w = float(np.prod([profile[j][a[j]] for j in range(d)]))
            fi = self.f_at(a)[i]
            mean += w * fi
            second += w * fi * fi
        var = max(second - mean * mean, 0.0)
        return 1.0 - (g - mean) ** 2 - var

    def expected_payoffs(self, profile):
        return np.array([self.action_values(i, profile) @ np.asarray(profile[i]) for i in range(self.n)])


def game_from_function(f, lam, eps, n=None, transcript=None) -> FunctionGame:
    return FunctionGame(f, lam, eps, n=n, transcript=transcript)


def expected_payoff_quadratic(a_i, y_i, k):
    """1 - (a_i - E y)^2 - Var y for y a distribution over {0, 1/k, ..., 1}.

    ``a_i`` is a grid value (or array of them), not an index.
    """
    g = np.arange(k + 1) / k
    y = np.asarray(y_i, dtype=float)
    mean = float(g @ y)
    var = max(float((g * g) @ y) - mean * mean, 0.0)
    return 1.0 - (np.asarray(a_i, dtype=float) - mean) ** 2 - var


# ---------------------------------------------------------------------------
# verifiers


def best_reply_value(game, player, profile) -> float:
    return float(np.max(game.action_values(player, profile)))


def is_eps_ne(game, profile, eps) -> bool:
    for i in range(game.n):
        vals = game.action_values(i, profile)
        if float(vals @ np.asarray(profile[i])) < vals.max() - eps - 1e-12:
            return False
    return True


def is_eps_wsne(game, profile, eps) -> bool:
    for i in range(game.n):
        vals = game.action_values(i, profile)
        s = support(profile[i])
        if np.any(vals[s] < vals.max() - eps - 1e-12):
            return False
    return True


def brute_force_pure_wsne(game, eps, limit=10 ** 7):
    """Every pure profile that is an eps-WSNE (i.e. an eps-pure NE)."""
    total = int(np.prod([float(m) for m in game.sizes]))
    if total > limit:
        raise TooLarge(f"{total} profiles exceed the limit of {limit}")
    if isinstance(game, ExplicitGame):
        P = game.payoffs
        ok = np.ones(game.sizes, dtype=bool)
        for i in range(game.n):
            u = P[..., i]
            ok &= u >= u.max(axis=i, keepdims=True) - eps - 1e-12
        return [tuple(int(x) for x in a) for a in np.argwhere(ok)]
    d, k = game.dim, game.k
    g = game.grid
    out = []
    for a in itertools.product(range(k + 1), repeat=d):
        fa = game.f_at(a)
        # group 2: v(b) = 1 - (b - f_i)^2 ; group 1: u(a) = 1 - (a - b)^2
        v = 1.0 - (g[None, :] - fa[:, None]) ** 2
        good_b = [np.flatnonzero(v[i] >= v[i].max() - eps - 1e-12) for i in range(d)]
        for b in itertools.product(*good_b):
            u_ok = all(1.0 - ((a[i] - b[i]) / k) ** 2 >= 1.0 - eps - 1e-12 for i in range(d))
            if u_ok:
                out.append(tuple(a) + tuple(int(x) for x in b))
    return out


# ---------------------------------------------------------------------------
# serialization


def dumps_game(game: ExplicitGame) -> str:
    lines = [" ".join(map(str, [game.n, *game.sizes]))]
    flat = game.payoffs.reshape(-1, game.n)
    lines += [" ".join(_fmt(float(x)) for x in row) for row in flat]
    return "\n".join(lines) + "\n"


def loads_game(text: str) -> ExplicitGame:
    lines = text.strip("\n").split("\n")
    try:
        head = [int(x) for x in lines[0].split()]
        n, sizes = head[0], head[1:]
        if n < 1 or len(sizes) != n or min(sizes) < 1:
            raise ValueError
    except (ValueError, IndexError):
        raise ParseError(1, "expected header 'n m_1 .. m_n'") from None
    rows = int(np.prod(sizes))
    if len(lines) - 1 != rows:
        raise ParseError(len(lines), f"expected {rows} payoff rows, found {len(lines) - 1}")
    data = np.empty((rows, n))
    for r, line in enumerate(lines[1:]):
        try:
            vals = [float(x) for x in line.split()]
            if len(vals) != n:
                raise ValueError
        except ValueError:
            raise ParseError(r + 2, f"expected {n} payoffs") from None
        data[r] = vals
    try:
        return ExplicitGame(data.reshape(*sizes, n))
    except InvalidParameters as e:
        raise ParseError(2, str(e)) from None
