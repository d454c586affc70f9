import random

import pytest

from spe_ncrs.arena import GameStructure, LassoPlay, Reach, evaluate_lasso
from spe_ncrs.gen import random_game
from spe_ncrs.igame import SizeGuard, check_lasso, random_lasso
from spe_ncrs.pcp import (INIT, action_stability_violations, build_pcp, classify_play, deadlocks,
                          gain_monotonicity_violations, player_stability_violations,
                          sampled_player_stability, simulate_projection, simulated_gain, size_bounds_hold,
                          to_dot)


def example_game():
    """v0 (player 0) -a0-> v1 (player 1) -a1/b1-> v3/v2, v2 (player 2) loops."""
    g = GameStructure(3, [("v0", 0), ("v1", 1), ("v2", 2), ("v3", 2)],
                      [("v0", "a0", "v1"), ("v1", "a1", "v3"), ("v1", "b1", "v2"),
                       ("v2", "a2", "v2"), ("v3", "a3", "v3")], "v0")
    objs = [Reach(frozenset({3})), Reach(frozenset({2})), Reach(frozenset())]
    return g, objs


def _ids(pg, keys):
    return [pg.arena.index[k] for k in keys]


def test_example_history_projection():
    g, objs = example_game()
    pg = build_pcp(g, objs)
    v0, v1, v2 = 0, 1, 2
    a0, a1, b1, a2 = (g.action_id(x) for x in ("a0", "a1", "b1", "a2"))
    gg, g2 = 0b010, 0b000
    keys = [INIT, ("G", v0, gg), ("G", v1, gg), ("A", v1, a1, gg), ("P", v2, 1, gg), ("G", v2, g2)]
    acts = [("gain", gg), ("act", a0), ("prop", a1, 1), ("act", b1), ("gain", g2)]
    ids = _ids(pg, keys)
    hist = [x for pair in zip(ids, acts) for x in pair] + [ids[-1]]
    assert simulate_projection(pg, hist) == [v0, a0, v1, b1, v2]
    # the play continues with accepted proposals at v2 forever
    loop_keys = [("G", v2, g2), ("A", v2, a2, g2), ("P", v2, 0, g2)]
    loop_acts = [("prop", a2, 2), ("act", a2), ("gain", g2)]
    prefix = tuple(zip(ids[:-1], acts))
    cycle = tuple(zip(_ids(pg, loop_keys), loop_acts))
    lasso = LassoPlay(prefix, cycle)
    check_lasso(pg.arena, lasso, pg.arena.initial)
    sim = simulate_projection(pg, lasso)
    assert sim.same_play(LassoPlay(((v0, a0), (v1, b1)), ((v2, a2),)))
    assert simulated_gain(pg, lasso) == 0b010


def test_fig2_root_gains(fig2):
    g, objs = fig2
    pg = build_pcp(g, objs)
    roots = {pg.arena.keys[w] for _, w in pg.arena.succ[pg.arena.initial]}
    assert roots == {("G", 0, 0b00), ("G", 0, 0b10)}


def test_player0_only_game():
    g = GameStructure(1, [("s", 0)], [("s", "a", "s")], "s")
    pg = build_pcp(g, [Reach(frozenset())])
    assert {k[0] for k in pg.arena.keys} == {"I", "G"}


def _fig2_lasso(pg, g, gain, branch, answer):
    s = g.state_id
    a = g.action_id
    v0 = s("v0")
    mid = s("v1") if branch == "l" else s("v2")
    end = g.delta(mid, a(answer))
    keys = [INIT, ("G", v0, gain), ("A", v0, a(branch), gain), ("P", mid, 0, gain), ("G", mid, gain)]
    acts = [("gain", gain), ("prop", a(branch), 1), ("act", a(branch)), ("gain", gain), ("act", a(answer))]
    prefix = tuple(zip(_ids(pg, keys), acts))
    cycle = ((pg.arena.index[("G", end, gain)], ("act", a("l'"))),)
    return LassoPlay(prefix, cycle)


def test_fig2_simulated_gains(fig2):
    g, objs = fig2
    pg = build_pcp(g, objs)
    blue = _fig2_lasso(pg, g, 0b10, "l", "l'")
    assert simulated_gain(pg, blue) == 0b11
    red = _fig2_lasso(pg, g, 0b00, "r", "r'")
    assert simulated_gain(pg, red) == 0b00
    assert classify_play(pg, red) == ("C", "iC")
    assert classify_play(pg, blue) == ("P", "iP")


def _unrolled_classify(pg, lasso):
    """Direct reading of the five conditions on a long unrolling of the lasso."""
    sim = simulated_gain(pg, lasso)
    reps = 3
    tail = [pg.arena.keys[v] for v, _ in lasso.cycle] * reps
    late_devs = [k[2] for k in tail if k[0] == "P" and k[2]]
    if len(set(late_devs)) > 1:
        return "iiiC"
    if late_devs:
        i = late_devs[0]
        ok = all((k[3] >> i & 1) >= (sim >> i & 1) for k in tail if k[0] == "P" and k[2] == i)
        return "iiC" if ok else "iiP"
    return "iC" if all(k[-1] == sim for k in tail) else "iP"


def test_classify_against_unrolled():
    rng = random.Random(21)
    tags = set()
    for _ in range(60):
        g, objs = random_game(rng, rng.randint(2, 4), 3)
        pg = build_pcp(g, objs)
        for _ in range(40):
            lasso = random_lasso(pg.arena, rng, min_len=rng.randint(0, 12))
            if lasso is None:
                continue
            winner, tag = classify_play(pg, lasso)
            assert tag == _unrolled_classify(pg, lasso)
            assert winner == ("P" if tag in ("iP", "iiP") else "C")
            tags.add(tag)
    assert tags == {"iC", "iiC", "iiiC", "iP", "iiP"}


def test_invariants_on_random_games():
    rng = random.Random(22)
    for _ in range(40):
        g, objs = random_game(rng, rng.randint(1, 5), rng.choice([2, 3]))
        pg = build_pcp(g, objs)
        assert size_bounds_hold(pg)
        assert action_stability_violations(pg.arena) == []
        assert player_stability_violations(pg.arena) == []
        assert sampled_player_stability(pg.arena, 300, 10, seed=1)[1] == 0
        assert gain_monotonicity_violations(pg) == []
        assert deadlocks(pg.arena) == []


def test_owners_and_decision_phase(fig2):
    g, objs = fig2
    pg = build_pcp(g, objs)
    for v, a, w in pg.arena.edges():
        k, k2 = pg.arena.keys[v], pg.arena.keys[w]
        if k[0] == "A":
            assert pg.arena.owner[v] == "P2"
            _, s, prop, gg = k
            b = a[1]
            assert k2 == ("P", g.delta(s, b), 0 if b == prop else g.owner[s], gg)
        if k[0] == "G":
            assert pg.arena.owner[v] == ("P1" if g.owner[k[1]] == 0 else "C")


def test_player_cap():
    g = GameStructure(4, [("s", 0)], [("s", "a", "s")], "s")
    with pytest.raises(SizeGuard):
        build_pcp(g, [Reach(frozenset())] * 4, max_players=3)


def test_dot(fig2):
    g, objs = fig2
    text = to_dot(build_pcp(g, objs))
    assert text.startswith("digraph") and "diamond" in text and "box" in text
