import itertools

import numpy as np
import pytest

from querylab.dynamics import matching_pennies
from querylab.games import (ExplicitGame, FunctionGame, InvalidParameters, ParseError, TooLarge,
                            best_reply_value, brute_force_pure_wsne, dumps_game,
                            expected_payoff_quadratic, game_from_function, grid_size, is_eps_ne,
                            is_eps_wsne, loads_game, pure, uniform)


def zero_map(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def random_mixed(rng, sizes, sparse=False):
    out = []
    for m in sizes:
        p = rng.random(m)
        if sparse:
            p[rng.random(m) < 0.4] = 0
            if p.sum() == 0:
                p[rng.integers(m)] = 1
        out.append(p / p.sum())
    return out


def enumerate_expected(game, i, profile):
    """u_i(a_i, x_{-i}) for each a_i by summing over every opponent profile."""
    vals = np.zeros(game.sizes[i])
    for prof in itertools.product(*[range(m) for m in game.sizes]):
        w = np.prod([profile[j][prof[j]] for j in range(game.n) if j != i])
        vals[prof[i]] += w * game.payoff(prof)[i]
    return vals


def test_grid_size_examples():
    assert grid_size(79, 1 / 88) == 7216
    g = game_from_function(zero_map, 79, 1 / 88, n=1)
    assert g.k == 7216 and g.sizes[0] == 7217
    assert game_from_function(zero_map, 1, 0.5, n=1).sizes == (9, 9)
    with pytest.raises(InvalidParameters):
        FunctionGame(zero_map, 1, 0, n=1)


def test_zero_map_payoffs():
    g = game_from_function(zero_map, 1, 0.5, n=1)
    assert np.array_equal(g.payoff((0, 0)), [1.0, 1.0])
    assert is_eps_wsne(g, pure((0, 0), g.sizes), 0.0)


def test_best_reply_value_examples():
    one = ExplicitGame(np.array([[0.2], [0.7]]))
    assert best_reply_value(one, 0, [np.array([0.5, 0.5])]) == 0.7
    g = game_from_function(zero_map, 1, 0.5, n=1)
    assert best_reply_value(g, 0, pure((0, 3), g.sizes)) == pytest.approx(1.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        G = ExplicitGame(rng.random((2, 2, 2)))
        x = random_mixed(rng, G.sizes)
        for i in range(2):
            assert best_reply_value(G, i, x) == pytest.approx(enumerate_expected(G, i, x).max(), abs=1e-12)


def test_quadratic_examples():
    assert expected_payoff_quadratic(0.25, np.eye(5)[3], 4) == pytest.approx(1 - 0.5 ** 2)
    y = np.array([0.5, 0.5])
    assert expected_payoff_quadratic(0.0, y, 1) == pytest.approx(0.5)
    assert expected_payoff_quadratic(0.5, y, 1) == pytest.approx(0.75)


def test_function_game_action_values_match_enumeration():
    rng = np.random.default_rng(2)
    f = lambda x: np.clip(np.asarray(x) ** 2 + 0.1, 0, 1)
    g = FunctionGame(f, 2, 1.0, n=2)  # k = 5
    for _ in range(5):
        x = random_mixed(rng, g.sizes, sparse=True)
        for i in range(g.n):
            assert np.allclose(g.action_values(i, x), enumerate_expected(g, i, x), atol=1e-12)


def test_is_eps_ne_examples():
    rng = np.random.default_rng(3)
    G = ExplicitGame(rng.random((3, 2, 2, 3)))
    assert is_eps_ne(G, random_mixed(rng, G.sizes), 1.0)
    assert is_eps_ne(matching_pennies(), uniform((2, 2)), 0.0)
    dom = np.zeros((2, 2, 2))
    dom[0, :, 0] = 1.0   # player 0 strictly prefers action 0 by gap 1
    dom[:, :, 1] = 0.5
    assert not is_eps_ne(ExplicitGame(dom), pure((1, 0), (2, 2)), 0.5)
    assert is_eps_ne(ExplicitGame(dom), pure((0, 0), (2, 2)), 0.0)


def support_oracle(game, x, eps):
    for i in range(game.n):
        vals = enumerate_expected(game, i, x)
        for a in range(game.sizes[i]):
            if x[i][a] > 1e-12 and vals[a] < vals.max() - eps - 1e-12:
                return False
    return True


def test_is_eps_wsne_matches_support_oracle():
    rng = np.random.default_rng(4)
    for _ in range(60):
        G = ExplicitGame(rng.random((3, 2, 2, 3)))
        x = random_mixed(rng, G.sizes, sparse=True)
        eps = rng.uniform(0, 0.5)
        assert is_eps_wsne(G, x, eps) == support_oracle(G, x, eps)


def test_brute_force_examples():
    one = ExplicitGame(np.array([[0.2], [0.7]]))
    assert brute_force_pure_wsne(one, 0.4) == [(1,)]
    assert brute_force_pure_wsne(matching_pennies(), 0.0) == []
    g = FunctionGame(zero_map, 1, 0.5, n=1)
    assert g.k == 8
    sols = brute_force_pure_wsne(g, 0.01)
    assert (0, 0) in sols
    # explicit tensor of all 81 profiles as the oracle
    P = np.array([g.payoff(p) for p in itertools.product(range(9), repeat=2)]).reshape(9, 9, 2)
    assert sorted(sols) == sorted(brute_force_pure_wsne(ExplicitGame(P), 0.01))
    with pytest.raises(TooLarge):
        brute_force_pure_wsne(FunctionGame(zero_map, 79, 1 / 88, n=1), 0.0)


def test_brute_force_agrees_with_verifier():
    rng = np.random.default_rng(6)
    for _ in range(30):
        G = ExplicitGame(rng.integers(0, 3, (2, 3, 2, 3)) / 2)
        sols = set(brute_force_pure_wsne(G, 0.0))
        for prof in itertools.product(range(2), range(3), range(2)):
            assert (prof in sols) == is_eps_wsne(G, pure(prof, G.sizes), 0.0)


def test_game_file_roundtrip_is_bit_exact():
    rng = np.random.default_rng(7)
    G = ExplicitGame(rng.random((2, 3, 4, 3)))
    back = loads_game(dumps_game(G))
    assert back.payoffs.tobytes() == G.payoffs.tobytes()
    with pytest.raises(ParseError) as e:
        loads_game("x\n")
    assert e.value.line == 1
    with pytest.raises(ParseError) as e:
        loads_game("1 2\n0.5\nfoo\n")
    assert e.value.line == 3


def test_payoffs_must_be_in_unit_interval():
    with pytest.raises(InvalidParameters):
        ExplicitGame(np.full((2, 1), 1.5))
