import random

import pytest
from hypothesis import given, settings, strategies as st

from spe_ncrs.arena import (GameError, GameStructure, LassoPlay, Parity, Rabin, Reach, Streett,
                            binarize_ex, evaluate_lasso, format_game, parse_game, reach_to_parity,
                            validate)
from spe_ncrs.equilibria_oracle import outcome
from spe_ncrs.gen import random_game

from conftest import profile


def test_fig2_parses(fig2):
    g, objs = fig2
    assert g.n_states == 7 and g.n_players == 2
    assert validate(g) == []
    v3 = g.state_id("v3")
    assert objs == [Reach(frozenset({v3})), Reach(frozenset({v3}))]


def test_one_state_self_loop():
    g, objs = parse_game("players 1\nstate s owner 0\ninit s\nedge s a s\nobjective 0 reach s\n")
    assert g.n_states == 1 and g.n_actions == 1


@pytest.mark.parametrize("text, needle", [
    ("players 1\nstate s owner 0\nstate t owner 0\ninit s\nedge s a t\nobjective 0 reach s\n",
     "deadlock"),
    ("players 1\nstate s owner 0\ninit s\nedge s a x\nobjective 0 reach s\n", "undeclared state"),
    ("players 1\nstate s owner 0\nstate s owner 0\ninit s\nedge s a s\nobjective 0 reach s\n",
     "duplicate state"),
    ("players 1\nstate s owner 0\ninit s\nedge s a s\nedge s a s\nobjective 0 reach s\n",
     "duplicate edge"),
    ("players 1\nstate s owner 0\ninit s\nedge s a s\nobjective 3 reach s\n", "unknown player"),
    ("players 1\nstate s owner 0\ninit s\nedge s a s\nfoo\n", "unknown directive"),
    ("players 1\nstate s owner 0\ninit s\nedge s a s\n", "missing objective"),
    ("players 1\nstate s owner 0\ninit s\nedge s a s\nobjective 0 parity\n", "misses s"),
])
def test_parse_errors(text, needle):
    with pytest.raises(GameError, match=needle):
        parse_game(text)


def test_parse_error_position():
    with pytest.raises(GameError) as exc:
        parse_game("players 1\nstate s ownr 0\n")
    assert exc.value.line == 2 and exc.value.column == 9


def test_action_unique_violation():
    g = GameStructure(1, [("s", 0), ("t", 0)], [("s", "a", "t"), ("s", "b", "t"), ("t", "a", "t")], "s")
    assert any("action-unique" in p and "s" in p for p in validate(g))


def test_disjointness_violation():
    g = GameStructure(2, [("s", 0), ("t", 1)], [("s", "l", "t"), ("t", "l", "s")], "s")
    assert any("disjointness" in p and "l" in p for p in validate(g))


def test_round_trip(fig2):
    g, objs = fig2
    g2, objs2 = parse_game(format_game(g, objs))
    assert format_game(g2, objs2) == format_game(g, objs)
    text = "players 2\nstate a owner 0\nstate b owner 1\ninit a\nedge a x b\nedge b y a\n" \
           "objective 0 parity a:0 b:1\nobjective 1 parity a:1 b:2\n"
    g, objs = parse_game(text)
    assert parse_game(format_game(g, objs))[1] == objs


def test_fig2_outcomes(fig2):
    g, objs = fig2
    red = profile(g, v0="r", v1="r_p", v2="r_p", v3="l_p", v4="l_p", v5="l_p", v6="l_p")
    blue = profile(g, v0="l", v1="l_p", v2="l_p", v3="l_p", v4="l_p", v5="l_p", v6="l_p")
    s = g.state_id
    a = g.action_id
    assert outcome(g, red) == LassoPlay(((s("v0"), a("r")), (s("v2"), a("r'"))), ((s("v6"), a("l'")),))
    blue_play = outcome(g, blue)
    assert blue_play == LassoPlay(((s("v0"), a("l")), (s("v1"), a("l'"))), ((s("v3"), a("l'")),))
    assert all(evaluate_lasso(blue_play, o) for o in objs)
    assert not any(evaluate_lasso(outcome(g, red), o) for o in objs)


def test_parity_single_state():
    play = LassoPlay((), ((0, 0),))
    assert not evaluate_lasso(play, Parity((1,)))
    assert evaluate_lasso(play, Parity((2,)))


@given(st.lists(st.integers(0, 3), min_size=1, max_size=6), st.integers(0, 2),
       st.lists(st.tuples(st.frozensets(st.integers(0, 3)), st.frozensets(st.integers(0, 3))),
                max_size=3))
def test_rabin_streett_duality(cycle, pre, pairs):
    play = LassoPlay(tuple((s, 0) for s in cycle[:pre]), tuple((s, 0) for s in cycle[pre:] or cycle))
    pairs = tuple(pairs)
    assert evaluate_lasso(play, Rabin(pairs)) != evaluate_lasso(play, Streett(pairs))


def test_canonical_lasso():
    a = LassoPlay(((0, 0), (1, 0)), ((2, 0), (1, 0)))
    b = LassoPlay(((0, 0),), ((1, 0), (2, 0), (1, 0), (2, 0)))
    assert a.same_play(b)
    assert a.canonical() == b.canonical()


def test_binarize_four_way():
    edges = [("r", f"a{k}", f"t{k}") for k in range(4)] + [(f"t{k}", "z", f"t{k}") for k in range(4)]
    g = GameStructure(1, [("r", 0)] + [(f"t{k}", 0) for k in range(4)], edges, "r")
    b = binarize_ex(g)
    assert len(b.internal) == 2
    assert all(len(b.game.succ(s)) <= 2 for s in range(b.game.n_states))
    assert b.game.n_states == g.n_states + 2


def test_binarize_fig2_isomorphic(fig2):
    g, _ = fig2
    b = binarize_ex(g)
    assert not b.internal and sorted(b.game.edges()) == sorted(g.edges())


def _random_lasso(g, rng):
    s = g.initial
    seen, steps = {}, []
    while s not in seen or rng.random() < 0.3:
        seen.setdefault(s, len(steps))
        a, t = rng.choice(g.succ(s))
        steps.append((s, a))
        s = t
        if len(steps) > 40:
            break
    # close at the last occurrence of s
    k = max(i for i, (x, _) in enumerate(steps) if x == s) if s in seen else None
    if k is None:
        return None
    return LassoPlay(tuple(steps[:k]), tuple(steps[k:]))


def test_binarize_preserves_reach():
    rng = random.Random(5)
    checked = 0
    for _ in range(60):
        g, objs = random_game(rng, rng.randint(2, 6), 2, max_out=4)
        b = binarize_ex(g, objs)
        gb = b.game
        for _ in range(20):
            lasso = _random_lasso(gb, rng)
            if lasso is None:
                continue
            lasso.check(gb)
            visited = {b.origin[s] for s, _ in lasso.prefix + lasso.cycle if b.origin[s] is not None}
            for o, ob in zip(objs, b.objectives):
                assert evaluate_lasso(lasso, ob) == bool(visited & o.targets)
            checked += 1
    assert checked > 500


def test_reach_to_parity(fig2):
    g, objs = fig2
    aug, prios, origin, bits = reach_to_parity(g, [o.targets for o in objs])
    blue = profile(g, v0="l", v1="l_p", v2="l_p", v3="l_p", v4="l_p", v5="l_p", v6="l_p")
    aug_prof = {s: blue[origin[s]] for s in range(aug.n_states)}
    play = outcome(aug, aug_prof)
    assert all(evaluate_lasso(play, Parity(p)) for p in prios)
    red = profile(g, v0="r", v1="r_p", v2="r_p", v3="l_p", v4="l_p", v5="l_p", v6="l_p")
    play = outcome(aug, {s: red[origin[s]] for s in range(aug.n_states)})
    assert not any(evaluate_lasso(play, Parity(p)) for p in prios)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_reach_to_parity_agrees(seed):
    rng = random.Random(seed)
    g, objs = random_game(rng, rng.randint(1, 5), 2)
    aug, prios, origin, _ = reach_to_parity(g, [o.targets for o in objs])
    choice = {s: rng.choice(g.actions_at(s)) for s in range(g.n_states)}
    play = outcome(aug, {s: choice[origin[s]] for s in range(aug.n_states)})
    base = outcome(g, choice)
    for o, p in zip(objs, prios):
        assert evaluate_lasso(play, Parity(p)) == evaluate_lasso(base, o)
