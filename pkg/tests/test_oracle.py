import random

import pytest

from spe_ncrs.arena import GameStructure, Reach, evaluate_lasso
from spe_ncrs.equilibria_oracle import (ResourceGuard, brute_solve_parity, gains, is_0fixed_ne,
                                        is_0fixed_spe_memoryless, is_spe_memoryless,
                                        memoryless_profiles, outcome, refute_solution)
from spe_ncrs.gen import random_game, random_parity_arena
from spe_ncrs.parity_solver import ParityArena
from spe_ncrs.strategy import MealyStrategy

from conftest import profile

LOOPS = dict(v3="l_p", v4="l_p", v5="l_p", v6="l_p")


def red(g):
    return profile(g, v0="r", v1="r_p", v2="r_p", **LOOPS)


def blue(g):
    return profile(g, v0="l", v1="l_p", v2="l_p", **LOOPS)


def test_ne(fig2):
    g, objs = fig2
    assert is_0fixed_ne(g, objs, red(g))
    assert is_0fixed_ne(g, objs, blue(g))


def test_one_step_profitable_deviation():
    g = GameStructure(2, [("a", 1), ("b", 0), ("t", 0)],
                      [("a", "x", "b"), ("a", "y", "t"), ("b", "z", "b"), ("t", "z2", "t")], "a")
    objs = [Reach(frozenset()), Reach(frozenset({2}))]
    prof = {0: g.action_id("x"), 1: g.action_id("z"), 2: g.action_id("z2")}
    assert not is_0fixed_ne(g, objs, prof)


def test_spe(fig2):
    g, objs = fig2
    assert is_spe_memoryless(g, objs, blue(g))
    assert is_0fixed_spe_memoryless(g, objs, blue(g))
    # The red profile fails subgame perfection only through player 0's own
    # deviations (l' at v1 or v2); with player 0 fixed it is an equilibrium in
    # every subgame, since player 1 scores 0 after either move at v0.
    assert not is_spe_memoryless(g, objs, red(g))
    assert is_0fixed_spe_memoryless(g, objs, red(g))


def test_all_winning_is_spe():
    g = GameStructure(2, [("a", 1), ("b", 0)], [("a", "x", "b"), ("a", "y", "a"), ("b", "z", "a")], "a")
    objs = [Reach(frozenset({0})), Reach(frozenset({0}))]
    for prof in memoryless_profiles(g):
        assert is_0fixed_spe_memoryless(g, objs, prof)


def test_gains(fig2):
    g, objs = fig2
    assert gains(g, objs, blue(g)) == (1, 1)
    assert gains(g, objs, red(g)) == (0, 0)


def _brute_ne(g, objs, prof):
    """0-fixed NE by enumerating every memoryless deviation (enough for
    reachability: a reachable target is reached along a simple path)."""
    base = gains(g, objs, prof)
    for i in range(1, g.n_players):
        if base[i]:
            continue
        for dev in memoryless_profiles(g, [i]):
            p2 = dict(prof)
            p2.update(dev)
            if evaluate_lasso(outcome(g, p2), objs[i]):
                return False
    return True


def test_ne_against_deviation_enumeration():
    rng = random.Random(3)
    checked = 0
    for _ in range(400):
        g, objs = random_game(rng, rng.randint(1, 5), rng.choice([2, 3]))
        for prof in list(memoryless_profiles(g))[:20]:
            assert is_0fixed_ne(g, objs, prof) == _brute_ne(g, objs, prof)
            checked += 1
    assert checked > 1000


def test_spe_implies_ne():
    rng = random.Random(4)
    for _ in range(100):
        g, objs = random_game(rng, rng.randint(1, 5), 3)
        for prof in list(memoryless_profiles(g))[:10]:
            if is_0fixed_spe_memoryless(g, objs, prof):
                assert is_0fixed_ne(g, objs, prof)


def test_outcome_replays():
    rng = random.Random(6)
    for _ in range(200):
        g, _ = random_game(rng, rng.randint(1, 6), 2)
        prof = {s: rng.choice(g.actions_at(s)) for s in range(g.n_states)}
        play = outcome(g, prof)
        play.check(g, g.initial)
        assert all(prof[s] == a for s, a in play.prefix + play.cycle)


def test_brute_parity_small():
    assert brute_solve_parity(ParityArena([0], [[0]], [0])) == {0}
    assert brute_solve_parity(ParityArena([0, 1], [[1], [0]], [1, 1])) == frozenset()


def test_brute_parity_partition_by_dual():
    rng = random.Random(8)
    for _ in range(200):
        a = random_parity_arena(rng, rng.randint(1, 6))
        even = brute_solve_parity(a)
        dual = ParityArena([1 - o for o in a.owner], a.succ, [p + 1 for p in a.priority])
        odd = brute_solve_parity(dual)
        assert even | odd == set(range(a.n)) and not even & odd


def test_brute_parity_guard():
    a = ParityArena([0] * 20, [[0, 1]] * 20, [0] * 20)
    with pytest.raises(ResourceGuard):
        brute_solve_parity(a, max_strategies=1000)


def _sigma0(g, v1, v2):
    choice = {g.state_id("v1"): g.action_id(v1), g.state_id("v2"): g.action_id(v2)}
    for s in ("v3", "v4", "v5", "v6"):
        choice[g.state_id(s)] = g.action_id("l'")
    return MealyStrategy.memoryless(g, choice)


def test_refute_fig2(fig2):
    g, objs = fig2
    assert refute_solution(g, objs, _sigma0(g, "l'", "l'")) is None
    ce = refute_solution(g, objs, _sigma0(g, "r'", "l'"))
    assert ce is not None
    assert ce.outcome.prefix[0] == (g.state_id("v0"), g.action_id("l"))
    assert ce.gains == (0, 0)


def test_refute_fig2_mod(fig2_mod):
    g, objs = fig2_mod
    for a in ("l'", "r'"):
        for b in ("l'", "r'"):
            ce = refute_solution(g, objs, _sigma0(g, a, b))
            assert ce is not None
            assert ce.outcome.prefix[0] == (g.state_id("v0"), g.action_id("r"))
            assert ce.gains[0] == 0 and ce.gains[1] == 1


def test_refute_player0_always_wins():
    g = GameStructure(2, [("a", 1), ("b", 0)], [("a", "x", "b"), ("a", "y", "a"), ("b", "z", "a")], "a")
    objs = [Reach(frozenset({0})), Reach(frozenset())]
    strat = MealyStrategy.memoryless(g, {1: g.action_id("z")})
    assert refute_solution(g, objs, strat) is None
