import random

from spe_ncrs.equilibria_oracle import brute_solve_parity
from spe_ncrs.gen import random_parity_arena
from spe_ncrs.parity_solver import (ParityArena, SolveResult, attractor, compress_priorities, solve,
                                    verify_strategy)


def test_single_even_loop():
    res = solve(ParityArena([0], [[0]], [0]), checked=True)
    assert res.region == (frozenset({0}), frozenset())


def test_forced_cycle_odd():
    res = solve(ParityArena([0, 0], [[1], [0]], [1, 2]), checked=True)
    assert res.region[1] == {0, 1}


def test_random_against_brute():
    rng = random.Random(11)
    for _ in range(500):
        a = random_parity_arena(rng, rng.randint(1, 7), max_out=3, n_prios=4)
        res = solve(a)
        assert res.region[0] == brute_solve_parity(a)
        assert res.region[0] | res.region[1] == set(range(a.n))
        assert verify_strategy(a, res)


def test_corrupted_strategy_rejected():
    # Even wins at 0 only by moving to itself (priority 0); moving to 1 loses.
    a = ParityArena([0, 0], [[0, 1], [1]], [0, 1])
    res = solve(a)
    assert res.region[0] == {0} and res.strategy[0][0] == 0
    bad = SolveResult(res.region, ({0: 1}, res.strategy[1]))
    assert not verify_strategy(a, bad)


def test_empty_region_is_fine():
    a = ParityArena([1], [[0]], [1])
    res = solve(a)
    assert res.region[0] == frozenset() and verify_strategy(a, res)


def test_idempotent_on_region():
    rng = random.Random(12)
    for _ in range(200):
        a = random_parity_arena(rng, rng.randint(2, 8))
        res = solve(a)
        for p in (0, 1):
            region = sorted(res.region[p])
            if not region:
                continue
            pos = {v: k for k, v in enumerate(region)}
            sub = ParityArena([a.owner[v] for v in region],
                              [[pos[w] for w in a.succ[v] if w in pos] for v in region],
                              [a.priority[v] for v in region])
            assert solve(sub).region[p] == set(range(len(region)))


def test_attractor_within_region():
    rng = random.Random(13)
    for _ in range(200):
        a = random_parity_arena(rng, rng.randint(2, 8))
        res = solve(a)
        attr = attractor(a, a.preds(), set(range(a.n)), set(res.region[0]), 0, {})
        assert attr == res.region[0]


def test_compress_priorities():
    assert compress_priorities([3, 7, 8, 10, 2 ** 30 + 1]) == [1, 1, 2, 2, 3]
    rng = random.Random(14)
    for _ in range(100):
        a = random_parity_arena(rng, rng.randint(1, 7), n_prios=9)
        b = ParityArena(a.owner, a.succ, compress_priorities(a.priority))
        assert solve(a).region == solve(b).region
