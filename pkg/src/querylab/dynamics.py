"""Adaptive dynamics that learn the game only through payoff queries.

A dynamic is two functions of the *answers seen so far*:

* ``plan(view)``      -> list of k query payloads (pure profiles, or mixtures
                         [(weight, profile), ...] for distribution queries)
* ``strategy(view)``  -> the mixed profile played at the next step

``view`` is a :class:`AnswerView`: realized profiles plus (query, answer)
pairs, never the game.  Each step: play strategy, draw a profile, then ask
the k planned queries.  The game's payoff methods are sealed while dynamic
code runs, so a dynamic that tries to read the game directly raises
:class:`QueryLeak`.
"""
from __future__ import annotations

import io
import itertools
from dataclasses import dataclass, field

import numpy as np

from .games import ExplicitGame, uniform
from .query import PrecisionPolicy, QueryTranscript, perturb, record


class QueryLeak(RuntimeError):
    pass


def d1(x, y) -> float:
    """Sum of absolute differences between two distributions over the same actions."""
    return float(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)).sum())


@dataclass
class AnswerView:
    sizes: tuple
    realized: list = field(default_factory=list)
    answers: list = field(default_factory=list)  # per step: list of (query, answer)

    @property
    def t(self):
        return len(self.realized)

    def flat(self):
        return [qa for step in self.answers for qa in step]


@dataclass
class History:
    sizes: tuple
    realized: list
    strategies: list
    view: AnswerView
    transcript: QueryTranscript

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("step,player,distribution,realized\n")
        for t, (prof, real) in enumerate(zip(self.strategies, self.realized), start=1):
            for i, x in enumerate(prof):
                dist = ";".join(format(float(p), ".17g") for p in x)
                buf.write(f"{t},{i},{dist},{real[i]}\n")
        return buf.getvalue()


class KQueryDynamic:
    """Base class: k queries per step, strategies from answers only."""

    k = 0

    def plan(self, view: AnswerView):
        return []

    def strategy(self, view: AnswerView):
        return uniform(view.sizes)


class ConstantDynamic(KQueryDynamic):
    """Always the same profile (uniform unless given); asks nothing."""

    def __init__(self, profile=None):
        self.profile = profile

    def strategy(self, view):
        return [np.array(x, dtype=float) for x in self.profile] if self.profile is not None else uniform(view.sizes)


def deviation_queries(sizes, a):
    """All unilateral deviations (a_i', a_{-i}) in player-major order (includes a itself)."""
    out = []
    for i, m in enumerate(sizes):
        for b in range(m):
            q = list(a)
            q[i] = b
            out.append(tuple(q))
    return out


def _deviation_values(sizes, step_answers):
    """Per player, the payoff vector u_i(., a_{-i}) from one step's deviation answers."""
    vals = []
    pos = 0
    for i, m in enumerate(sizes):
        vals.append(np.array([step_answers[pos + b][1][i] for b in range(m)], dtype=float))
        pos += m
    return vals


class RegretMatching(KQueryDynamic):
    """Unconditional regret matching; asks the n*m deviations of the last realized profile.

    Cumulative regret of action b for player i is sum_t u_i(b, a(t)_{-i}) - u_i(a(t)).
    Play proportionally to positive regrets, uniform if none is positive.  An
    optional floor ``eta`` mixes in that much uniform play.
    """

    def __init__(self, sizes, eta=0.0):
        self.sizes = tuple(sizes)
        self.k = int(sum(sizes))
        self.eta = eta

    def plan(self, view):
        return deviation_queries(view.sizes, view.realized[-1])

    def strategy(self, view):
        # views are append-only, so keep running regrets per view
        key, done, regrets = getattr(self, "_memo", (None, 0, None))
        if key is not view or done > len(view.answers):
            done, regrets = 0, [np.zeros(m) for m in view.sizes]
        regrets = _accumulate_regrets(view, regrets, done)
        self._memo = (view, len(view.answers), regrets)
        return _regret_profile(regrets, view.sizes, self.eta)


def _accumulate_regrets(view, regrets, start=0):
    for a, step in zip(view.realized[start:], view.answers[start:]):
        vals = _deviation_values(view.sizes, step)
        for i in range(len(view.sizes)):
            regrets[i] = regrets[i] + vals[i] - vals[i][a[i]]
    return regrets


def _regret_profile(regrets, sizes, eta):
    out = []
    for r, m in zip(regrets, sizes):
        pos = np.maximum(r, 0.0)
        s = pos.sum()
        p = pos / s if s > 0 else np.full(m, 1.0 / m)
        if eta:
            p = (1 - eta) * p + eta / m
        out.append(p)
    return out


def regret_matching_step(view: AnswerView, eta=0.0):
    """Regret-matching profile from scratch: positive-part regrets, uniform if none."""
    regrets = _accumulate_regrets(view, [np.zeros(m) for m in view.sizes])
    return _regret_profile(regrets, view.sizes, eta)


class BestReplyDynamic(KQueryDynamic):
    """Each player plays a pure best reply (lowest index on ties) to the last realized profile."""

    def __init__(self, sizes):
        self.sizes = tuple(sizes)
        self.k = int(sum(sizes))

    def plan(self, view):
        return deviation_queries(view.sizes, view.realized[-1])

    def strategy(self, view):
        if not view.answers:
            return uniform(view.sizes)
        vals = _deviation_values(view.sizes, view.answers[-1])
        out = []
        for v, m in zip(vals, view.sizes):
            x = np.zeros(m)
            x[int(np.argmax(v))] = 1.0
            out.append(x)
        return out


# ---------------------------------------------------------------------------
# running


_SEALED = ("payoff", "action_values", "expected_payoffs")


class _Sealed:
    def __init__(self, game):
        self.game = game
        self.saved = {}

    def _leak(self, *a, **kw):
        raise QueryLeak("dynamic code touched the game outside its query channel")

    def __enter__(self):
        for name in _SEALED:
            if hasattr(self.game, name):
                self.saved[name] = self.game.__dict__.get(name, None)
                setattr(self.game, name, self._leak)
        if isinstance(self.game, ExplicitGame):
            self.saved["payoffs"] = self.game.payoffs
            self.game.payoffs = _SealedArray(self._leak)
        return self

    def __exit__(self, *exc):
        for name, val in self.saved.items():
            if name == "payoffs":
                self.game.payoffs = val
            elif val is None:
                delattr(self.game, name)
            else:
                setattr(self.game, name, val)
        self.saved = {}
        return False


class _SealedArray:
    def __init__(self, leak):
        self._leak = leak

    def __getitem__(self, item):
        self._leak()

    def __array__(self, *a, **kw):
        self._leak()

    def __getattr__(self, name):
        self._leak()


def _answer(game, query, policy, rng_seed, transcript):
    if isinstance(query, list):
        # mixture [(weight, profile), ...] -> exact expectation, then the precision policy
        true = sum(w * game.payoff(tuple(p)) for w, p in query)
        ans = perturb(policy, true, rng_seed)
        record(transcript, None, "dist", tuple((float(w), tuple(p)) for w, p in query), tuple(ans))
        return ans
    true = game.payoff(tuple(query))
    ans = perturb(policy, true, rng_seed) if policy is not None else true
    record(transcript, None, "pure", tuple(int(x) for x in query), tuple(ans))
    return ans


def run_dynamic(game, dynamic: KQueryDynamic, T: int, seed: int,
                policy: PrecisionPolicy | None = None, stop=None) -> History:
    """Run T steps (or until ``stop(view)`` is true after a step's answers)."""
    rng = np.random.default_rng(seed)
    sizes = tuple(game.sizes)
    view = AnswerView(sizes)
    transcript = QueryTranscript()
    strategies = []
    for t in range(T):
        with _Sealed(game):
            x = dynamic.strategy(view)
        strategies.append([np.asarray(p, dtype=float) for p in x])
        a = tuple(int(rng.choice(m, p=np.asarray(p) / np.sum(p))) for m, p in zip(sizes, x))
        view.realized.append(a)
        with _Sealed(game):
            queries = dynamic.plan(view)
        if len(queries) != dynamic.k:
            raise ValueError(f"dynamic planned {len(queries)} queries, declared k={dynamic.k}")
        step = []
        for j, q in enumerate(queries):
            step.append((q, _answer(game, q, policy, [seed, t, j], transcript)))
        view.answers.append(step)
        if stop is not None and stop(view):
            break
    return History(sizes, list(view.realized), strategies, view, transcript)


def replay(dynamic: KQueryDynamic, history: History, answers=None):
    """Recompute the strategy sequence from realized profiles and answers alone."""
    answers = history.view.answers if answers is None else answers
    view = AnswerView(history.sizes)
    out = []
    for t, a in enumerate(history.realized):
        out.append([np.asarray(p, dtype=float) for p in dynamic.strategy(view)])
        view.realized.append(a)
        view.answers.append(answers[t])
    return out


def dynamic_to_algorithm(dynamic: KQueryDynamic, stop, max_steps=10 ** 4):
    """Turn a dynamic into a solver: ``solver(game, seed) -> (profile, queries, steps)``.

    The returned profile is the last strategy played; query count is k per step.
    """
    def solver(game, seed=0):
        h = run_dynamic(game, dynamic, max_steps, seed, stop=stop)
        steps = len(h.realized)
        success = stop(h.view)
        return h.strategies[-1] if success else None, h.transcript.count, steps

    return solver


def stop_at_pure_ne(view: AnswerView) -> bool:
    """True when the last realized profile is a pure NE, judged from its deviation answers."""
    if not view.answers:
        return False
    a = view.realized[-1]
    vals = _deviation_values(view.sizes, view.answers[-1])
    return all(v[a[i]] >= v.max() - 1e-12 for i, v in enumerate(vals))


# ---------------------------------------------------------------------------
# analysis helpers (these may read the game: they are not part of a dynamic)


def empirical_swap_regret(game: ExplicitGame, realized) -> float:
    """Largest per-player swap regret of the empirical joint distribution of play.

    For player i it is sum_a max(0, max_b mean_t 1[a_i(t)=a](u_i(b, a_{-i}(t)) - u_i(a(t)))).
    """
    R = np.asarray(realized)
    T = len(R)
    worst = 0.0
    for i, m in enumerate(game.sizes):
        total = 0.0
        for a in range(m):
            rows = R[R[:, i] == a]
            if len(rows) == 0:
                continue
            base = game.payoffs[tuple(rows.T) + (i,)]
            gains = []
            for b in range(m):
                alt = rows.copy()
                alt[:, i] = b
                gains.append((game.payoffs[tuple(alt.T) + (i,)] - base).sum() / T)
            total += max(0.0, max(gains))
        worst = max(worst, total)
    return worst


@dataclass
class LipschitzEstimate:
    nu_hat: float
    alpha: float
    max_d1: float


def lipschitz_test(dynamic: KQueryDynamic, game, T, alpha, trials, seed) -> LipschitzEstimate:
    """Lower-bound the answer-Lipschitz constant of a dynamic.

    Each trial runs the dynamic on exact answers, rounds every answer to the
    alpha-grid (moving it by at most alpha/2 <= alpha), replays the strategy
    map on the rounded stream with the same realized profiles, and records the
    largest per-player d1 gap divided by alpha.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    policy = PrecisionPolicy(alpha, "grid-rounding")
    worst = 0.0
    for r in range(trials):
        h = run_dynamic(game, dynamic, T, seed=int(np.random.SeedSequence([seed, r]).generate_state(1)[0]))
        noisy = [[(q, perturb(policy, a)) for q, a in step] for step in h.view.answers]
        exact = replay(dynamic, h)
        moved = replay(dynamic, h, noisy)
        for x, y in zip(exact, moved):
            for xi, yi in zip(x, y):
                worst = max(worst, d1(xi, yi))
    return LipschitzEstimate(worst / alpha, alpha, worst)


def matching_pennies():
    p = np.zeros((2, 2, 2))
    for a, b in itertools.product(range(2), repeat=2):
        p[a, b, 0] = 1.0 if a == b else 0.0
        p[a, b, 1] = 1.0 - p[a, b, 0]
    return ExplicitGame(p)
