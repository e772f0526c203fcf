import itertools
import math

import numpy as np
import pytest

from querylab.dynamics import (AnswerView, BestReplyDynamic, ConstantDynamic, KQueryDynamic,
                               QueryLeak, RegretMatching, d1, dynamic_to_algorithm,
                               empirical_swap_regret, lipschitz_test, matching_pennies,
                               regret_matching_step, replay, run_dynamic, stop_at_pure_ne)
from querylab.games import ExplicitGame, brute_force_pure_wsne, uniform
from querylab.query import PrecisionPolicy


def dominant_game(m=3, best=2):
    p = np.full((m, m, 2), 0.2)
    p[best, :, 0] = 0.9
    p[:, best, 1] = 0.9
    return ExplicitGame(p)


def swap_regret_oracle(game, realized):
    """Swap regret from the empirical joint distribution, enumerating every swap map."""
    T = len(realized)
    counts = {}
    for a in realized:
        counts[a] = counts.get(a, 0) + 1
    worst = 0.0
    for i, m in enumerate(game.sizes):
        base = sum(c * game.payoffs[a + (i,)] for a, c in counts.items()) / T
        best = base
        for phi in itertools.product(range(m), repeat=m):
            val = 0.0
            for a, c in counts.items():
                b = list(a)
                b[i] = phi[a[i]]
                val += c * game.payoffs[tuple(b) + (i,)]
            best = max(best, val / T)
        worst = max(worst, best - base)
    return worst


def test_constant_dynamic_asks_nothing():
    h = run_dynamic(matching_pennies(), ConstantDynamic(), 5, seed=0)
    assert h.transcript.count == 0
    assert len(h.realized) == 5


def test_regret_matching_query_count():
    for T in (1, 7, 50):
        dyn = RegretMatching((2, 2))
        h = run_dynamic(matching_pennies(), dyn, T, seed=T)
        assert h.transcript.count == 4 * T


def test_best_reply_absorbs_at_dominant_profile():
    G = dominant_game()
    h = run_dynamic(G, BestReplyDynamic(G.sizes), 6, seed=1)
    assert all(a == (2, 2) for a in h.realized[3:])
    assert h.realized[1] == (2, 2)


def test_regret_matching_step_uniform_cases():
    assert all(np.allclose(p, q) for p, q in zip(regret_matching_step(AnswerView((2, 3))), uniform((2, 3))))
    G = dominant_game()
    # realized profile already dominant: every deviation has negative regret
    h = run_dynamic(G, ConstantDynamic([np.eye(3)[2], np.eye(3)[2]]), 1, seed=0)
    view = AnswerView(G.sizes, h.realized, [[(q, G.payoff(q)) for q in
                                             [(0, 2), (1, 2), (2, 2), (2, 0), (2, 1), (2, 2)]]])
    out = regret_matching_step(view)
    assert all(np.allclose(p, np.full(3, 1 / 3)) for p in out)


def test_incremental_regret_matching_equals_from_scratch():
    rng = np.random.default_rng(0)
    G = ExplicitGame(rng.random((3, 2, 2)))
    dyn = RegretMatching(G.sizes)
    h = run_dynamic(G, dyn, 40, seed=3)
    view = AnswerView(G.sizes)
    for t in range(40):
        want = regret_matching_step(view)
        assert all(np.allclose(a, b) for a, b in zip(want, h.strategies[t]))
        view.realized.append(h.realized[t])
        view.answers.append(h.view.answers[t])


def test_dynamic_cannot_read_the_game():
    class Peeker(KQueryDynamic):
        def __init__(self, game):
            self.game = game

        def strategy(self, view):
            self.game.payoff((0, 0))
            return uniform(view.sizes)

    class TensorPeeker(Peeker):
        def strategy(self, view):
            float(self.game.payoffs[0, 0, 0])
            return uniform(view.sizes)

    G = matching_pennies()
    for cls in (Peeker, TensorPeeker):
        with pytest.raises(QueryLeak):
            run_dynamic(G, cls(G), 3, seed=0)
    # the game is usable again afterwards
    assert G.payoff((0, 0))[0] == 1.0


def test_replay_reproduces_strategies_from_answers():
    rng = np.random.default_rng(4)
    for s in range(10):
        G = ExplicitGame(rng.random((2, 3, 2)))
        dyn = RegretMatching(G.sizes)
        h = run_dynamic(G, dyn, 30, seed=s)
        again = replay(RegretMatching(G.sizes), h)
        assert all(np.array_equal(a, b) for x, y in zip(h.strategies, again) for a, b in zip(x, y))


def test_dynamic_to_algorithm_examples():
    G = dominant_game()
    solver = dynamic_to_algorithm(BestReplyDynamic(G.sizes), stop_at_pure_ne, max_steps=50)
    prof, queries, steps = solver(G, seed=0)
    assert [int(np.argmax(p)) for p in prof] == [2, 2]
    assert queries <= G.n * 3 * 3
    solver = dynamic_to_algorithm(ConstantDynamic(), lambda v: v.t >= 3, max_steps=10)
    _, queries, steps = solver(G, seed=0)
    assert queries == 0 and steps == 3


def test_regret_matching_solver_finds_pure_ne_on_small_games():
    rng = np.random.default_rng(5)
    tried = hits = 0
    while tried < 20:
        G = ExplicitGame(rng.random((2, 2, 2)))
        if not brute_force_pure_wsne(G, 0.0):
            continue
        tried += 1
        solver = dynamic_to_algorithm(RegretMatching(G.sizes), stop_at_pure_ne, max_steps=2000)
        prof, queries, steps = solver(G, seed=tried)
        hits += prof is not None
        assert queries == 4 * steps
    assert hits == tried


def test_empirical_swap_regret_matches_enumeration():
    rng = np.random.default_rng(6)
    for s in range(10):
        G = ExplicitGame(rng.random((3, 2, 2)))
        realized = [tuple(int(rng.integers(m)) for m in G.sizes) for _ in range(40)]
        assert empirical_swap_regret(G, realized) == pytest.approx(swap_regret_oracle(G, realized), abs=1e-12)


def test_lipschitz_constant_dynamic_is_zero():
    est = lipschitz_test(ConstantDynamic(), matching_pennies(), 20, 1e-3, trials=3, seed=0)
    assert est.nu_hat == 0.0


def test_lipschitz_flags_best_reply_tie():
    g = 1e-4
    p = np.zeros((2, 2, 2))
    p[0, :, 0] = 0.5
    p[1, :, 0] = 0.5 + g
    p[:, :, 1] = 0.5
    G = ExplicitGame(p)
    est = lipschitz_test(BestReplyDynamic(G.sizes), G, 10, 1e-3, trials=2, seed=0)
    assert est.max_d1 == 2.0
    assert est.nu_hat > 1e3


def test_lipschitz_smoothed_regret_matching_is_finite():
    G = ExplicitGame(np.random.default_rng(7).random((2, 2, 2)))
    for alpha in (1e-2, 1e-3, 1e-4):
        est = lipschitz_test(RegretMatching(G.sizes, eta=0.1), G, 50, alpha, trials=2, seed=1)
        assert math.isfinite(est.nu_hat)


def test_noisy_answers_stay_within_delta():
    pol = PrecisionPolicy(0.05, "seeded-uniform-noise")
    G = matching_pennies()
    h = run_dynamic(G, RegretMatching(G.sizes), 20, seed=2, policy=pol)
    for step in h.view.answers:
        for q, a in step:
            assert np.max(np.abs(a - G.payoff(q))) <= 0.05


def test_history_csv_has_row_per_player_step():
    h = run_dynamic(matching_pennies(), ConstantDynamic(), 4, seed=0)
    rows = h.to_csv().strip().splitlines()
    assert rows[0] == "step,player,distribution,realized"
    assert len(rows) == 1 + 4 * 2


def test_d1():
    assert d1([1, 0], [0, 1]) == 2.0
