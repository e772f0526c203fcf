"""Adapters between the query problems, sampling, and WSNE-from-approximate-NE."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .fixpoint import AFPOracle, GridMap, PathFunction, dimension_certificate
from .fixpoint.field import COARSE, vertex_of_cell
from .games import (ExplicitGame, FunctionGame, is_eps_ne, is_eps_wsne, pure, support)
from .paths import decode
from .query import QueryTranscript, record


class NotAnEquilibrium(ValueError):
    pass


class SupportTooWide(ValueError):
    pass


class CertificationMissing(ValueError):
    pass


class SolverFailure(RuntimeError):
    pass


class NonBinaryPayoffs(ValueError):
    pass


class PreconditionViolated(ValueError):
    pass


# ---------------------------------------------------------------------------
# WSN -> AFP


def wsne_window_eps(k):
    return 3.0 / (4.0 * k * k)


def wsne_to_fixed_point(game: FunctionGame, eq):
    """Read an approximate fixed point off a 3/(4k^2)-WSNE of the derived game.

    Each group-1 support must fit in two adjacent grid points; any support
    profile c then satisfies |c_i - f_i(c)| <= (3 + lambda)/k.
    """
    if not is_eps_wsne(game, eq, wsne_window_eps(game.k)):
        raise NotAnEquilibrium("profile is not a 3/(4k^2)-WSNE")
    c = []
    for i in range(game.dim):
        s = support(eq[i])
        if s.max() - s.min() > 1:
            raise SupportTooWide(f"player {i} support {s.tolist()} spans more than one grid step")
        c.append(int(s.min()))
    return np.array(c) / game.k


def as_profile(game, sol):
    """Accept either action indices or a mixed profile."""
    if len(sol) == game.n and np.ndim(sol[0]) == 0:
        return pure([int(a) for a in sol], game.sizes)
    return [np.asarray(x, dtype=float) for x in sol]


@dataclass
class AfpResult:
    point: np.ndarray
    wsn_queries: QueryTranscript
    f_queries: QueryTranscript


def solve_afp_via_wsn(f, lam, eps, wsn_solver, n=None) -> AfpResult:
    """Turn a WSN solver into an approximate-fixed-point solver.

    Every pure profile (a, b) the solver asks is answered with one evaluation
    of f at a/k (cached per distinct a, so f-evaluations <= profile queries).
    """
    f_log = QueryTranscript()
    wsn_log = QueryTranscript()
    afp = AFPOracle(f, f_log)
    game = FunctionGame(afp, lam, eps, n=n if n is not None else getattr(f, "n", None),
                        transcript=wsn_log)
    sol = wsn_solver(game)
    if sol is None:
        raise SolverFailure("WSN solver returned nothing")
    point = wsne_to_fixed_point(game, as_profile(game, sol))
    return AfpResult(point, wsn_log, f_log)


def brute_force_wsn_solver(game):
    """Ask every pure profile in order; return the first pure 3/(4k^2)-WSNE (tiny games only)."""
    eps = wsne_window_eps(game.k)
    answers = {}
    for prof in itertools.product(*[range(m) for m in game.sizes]):
        answers[prof] = game.payoff(prof)
    for prof, u in answers.items():
        ok = True
        for i in range(game.n):
            best = max(answers[prof[:i] + (a,) + prof[i + 1:]][i] for a in range(game.sizes[i]))
            if u[i] < best - eps - 1e-12:
                ok = False
                break
        if ok:
            return prof
    return None


def diagonal_wsn_solver(game):
    """Scan profiles (a, a) and return the first pure 3/(4k^2)-WSNE.

    Group 1 loses at least 1/k^2 > 3/(4k^2) whenever a_i != b_i, so every
    pure 3/(4k^2)-WSNE has b = a.  Writing r = |a_i/k - f_i(a)|, read off the
    answer as r^2 = 1 - v_i, group 2 is within the window iff r <= 7/(8k):
    below 1/(2k) a_i is the nearest grid point, between 1/(2k) and 1/k the
    nearest one is at 1/k - r, and beyond 1/k the window is always missed.
    So one query per scanned profile suffices.
    """
    d, k = game.dim, game.k
    limit = 49.0 / (64.0 * k * k) + 1e-12
    for a in itertools.product(range(k + 1), repeat=d):
        v = game.payoff(a + a)[d:]
        if np.all(1.0 - v <= limit):
            return a + a
    return None


def pure_wsne_profiles(game: FunctionGame):
    """All pure 3/(4k^2)-WSNE of a game built on a grid-backed map (query-free bulk scan)."""
    f = game.f.f if isinstance(game.f, AFPOracle) else game.f
    g = GridMap.from_function(f) if isinstance(f, PathFunction) else f
    if not isinstance(g, GridMap):
        raise TypeError("bulk scan needs a PathFunction or GridMap")
    found = kernels.scan_pure_fixed_grid(g.signs, g.n, g.res, g.step, game.k)
    return [tuple(int(x) for x in a) * 2 for a in found]


# ---------------------------------------------------------------------------
# AFP -> ESP


def cell_vertex_of_point(x):
    """Hypercube vertex whose cell contains x, or None outside the central block."""
    cell = tuple(int(c) for c in np.clip(np.floor(np.asarray(x) * COARSE), 0, COARSE - 1))
    return vertex_of_cell(cell)


@dataclass
class EspResult:
    vertex: tuple
    afp_queries: QueryTranscript
    esp_queries: QueryTranscript
    point: np.ndarray = field(default=None)


def solve_esp_via_afp(n, esp_oracle, afp_solver, certificate=None) -> EspResult:
    """Find the path's end with an approximate-fixed-point solver.

    Each point query inside the central block [2/6, 4/6]^n needs the answer
    for the corresponding vertex; queries outside it need no answer at all
    (the map is fixed background flow there).  Cells are memoized, so ESP
    queries <= AFP queries.  ``afp_solver(oracle, n, eps)`` returns a point.
    """
    cert = certificate if certificate is not None else dimension_certificate(n)
    if not cert.eps_star > 0:
        raise CertificationMissing("the map has no positive certificate")
    esp_log = getattr(esp_oracle, "transcript", None)
    if esp_log is None:
        esp_log = QueryTranscript()
        raw = esp_oracle

        def esp_oracle(v):
            info = raw(v)
            record(esp_log, None, "esp", int(v), (int(info.visited), info.prev, info.next))
            return info
    f = PathFunction(n, esp_oracle)
    afp_log = QueryTranscript()
    # eps* is a floor that off-end points can attain, so ask for strictly less
    x = afp_solver(AFPOracle(f, afp_log), n, cert.eps_star / 2)
    if x is None:
        raise SolverFailure("AFP solver returned nothing")
    v = cell_vertex_of_point(x)
    if v is None:
        raise SolverFailure("reported point lies outside the central block")
    return EspResult(decode(v, n), afp_log, esp_log, np.asarray(x))


def grid_scan_afp_solver(oracle, n, eps, res=42):
    """Query fine-cell centres in order until one is an eps-fixed point."""
    for idx in itertools.product(range(res), repeat=n):
        x = (np.array(idx) + 0.5) / res
        if np.max(np.abs(oracle(x) - x)) <= eps:
            return x
    return None


# ---------------------------------------------------------------------------
# distribution queries


def sample_count(n, delta):
    return math.ceil(n / (delta * delta) - 1e-9)


def sample_dist_query(game, mixture, delta, seed, transcript: QueryTranscript | None = None):
    """Answer a distribution query with ceil(n/delta^2) counted pure queries.

    ``mixture`` is a list of (weight, profile).  By Hoeffding each player's
    estimate is off by more than delta with probability <= 2 exp(-2n).
    """
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    w = np.array([p for p, _ in mixture], dtype=float)
    if np.any(w <= 0) or abs(w.sum() - 1) > 1e-9:
        raise ValueError("mixture weights must be positive and sum to 1")
    rng = np.random.default_rng(seed)
    s = sample_count(game.n, delta)
    picks = rng.choice(len(mixture), size=s, p=w / w.sum())
    total = np.zeros(game.n)
    for j in picks:
        total += game.payoff(tuple(mixture[j][1]), transcript)
    return total / s


def exact_dist_query(game: ExplicitGame, weights, transcript: QueryTranscript | None = None):
    """Exact expected payoffs under a distribution over all profiles (C order), as Fractions."""
    flat = game.payoffs.reshape(-1, game.n)
    out = []
    for i in range(game.n):
        out.append(sum((Fraction(w) * Fraction(float(u)) for w, u in zip(weights, flat[:, i])), Fraction(0)))
    if transcript is not None:
        record(transcript, None, "dist-exact", len(weights), tuple(float(x) for x in out))
    return out


def one_query_extraction(game: ExplicitGame, transcript: QueryTranscript | None = None):
    """Recover a 0/1 payoff tensor from a single exact distribution query.

    Profile j (C order) gets weight 2^j / (2^N - 1); the answer times
    (2^N - 1) is an integer whose binary digits are the payoffs.
    """
    flat = game.payoffs.reshape(-1, game.n)
    if not np.all((flat == 0) | (flat == 1)):
        raise NonBinaryPayoffs("payoffs must be 0 or 1")
    N = flat.shape[0]
    denom = (1 << N) - 1
    weights = [Fraction(1 << j, denom) for j in range(N)]
    answer = exact_dist_query(game, weights, transcript if transcript is not None else QueryTranscript())
    out = np.zeros_like(flat)
    for i, val in enumerate(answer):
        code = val * denom
        assert code.denominator == 1
        code = int(code)
        for j in range(N):
            out[j, i] = (code >> j) & 1
    return out.reshape(game.payoffs.shape)


# ---------------------------------------------------------------------------
# WSNE from approximate NE


@dataclass
class ClassifiedActions:
    good: np.ndarray
    medium: np.ndarray
    bad: np.ndarray
    g_star: int
    values: np.ndarray
    samples: int = 0


def sampled_count(m, n, eps, phi):
    """Samples so every estimate is eps/8-accurate with probability >= 1 - phi (Hoeffding + union)."""
    return math.ceil(32.0 * math.log(2.0 * m * n / phi) / (eps * eps))


def worst_case_sample_count(n):
    """The worst-case preset used in the original argument (10^18 n), for reference only."""
    return 10 ** 18 * n


def estimate_action_values(game: ExplicitGame, x, player, samples, rng):
    """Monte Carlo estimate of u_i(a_i, x_{-i}) for every a_i from shared opponent draws."""
    draws = []
    for j in range(game.n):
        if j == player:
            draws.append(None)
        else:
            p = np.asarray(x[j], dtype=float)
            draws.append(rng.choice(len(p), size=samples, p=p / p.sum()))
    vals = np.zeros(game.sizes[player])
    for a in range(game.sizes[player]):
        idx = tuple(np.full(samples, a) if d is None else d for d in draws)
        vals[a] = game.payoffs[idx + (player,)].mean()
    return vals


def classify_actions(game, x, player, eps, value_source="exact", seed=0, phi=1e-3, samples=None):
    """Split a player's actions into good / medium / bad against x_{-i}.

    Exact values: good >= br - eps/4, bad < br - eps/2, medium in between.
    Sampled values (eps/8-accurate whp): one threshold br_hat - 3 eps/8;
    true-good actions land in good and true-bad in bad, medium anywhere.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if value_source == "exact":
        vals = game.action_values(player, x)
        br = vals.max()
        good = np.flatnonzero(vals >= br - eps / 4)
        bad = np.flatnonzero(vals < br - eps / 2)
        medium = np.setdiff1d(np.arange(len(vals)), np.union1d(good, bad))
        return ClassifiedActions(good, medium, bad, int(np.argmax(vals)), vals)
    if value_source != "sampled":
        raise ValueError(f"unknown value source {value_source!r}")
    m = game.sizes[player]
    s = samples if samples is not None else sampled_count(max(game.sizes), game.n, eps, phi)
    rng = np.random.default_rng([seed, player])
    vals = estimate_action_values(game, x, player, s, rng)
    br = vals.max()
    good = np.flatnonzero(vals >= br - 3 * eps / 8)
    bad = np.setdiff1d(np.arange(m), good)
    return ClassifiedActions(good, np.array([], dtype=int), bad, int(np.argmax(vals)), vals, s * m)


def moved_mass(x, y):
    return [float(np.clip(np.asarray(xi) - np.asarray(yi), 0, None).sum()) for xi, yi in zip(x, y)]


def wsne_from_ane(game, x, eps, value_source="exact", seed=0, phi=1e-3, check=True):
    """Move all medium and bad mass of each player onto a good action g*."""
    if check and isinstance(game, ExplicitGame):
        if not is_eps_ne(game, x, eps * eps / (16 * game.n)):
            raise PreconditionViolated("input is not an (eps^2/(16n))-NE")
    y = []
    for i in range(game.n):
        cls = classify_actions(game, x, i, eps, value_source, seed=seed, phi=phi)
        yi = np.array(x[i], dtype=float)
        drop = np.union1d(cls.medium, cls.bad).astype(int)
        moved = yi[drop].sum()
        yi[drop] = 0.0
        yi[cls.g_star] += moved
        y.append(yi)
    return y
