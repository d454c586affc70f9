"""Zielonka's recursive algorithm for two-player min-parity games.

Player 0 (Even) wins a play when the least priority seen infinitely often is
even.  Arenas are given as ``owner[v] in {0, 1}``, ``succ[v]`` (ordered list of
successor ids) and ``priority[v]``.
"""
from __future__ import annotations

import sys
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import networkx as nx


@dataclass
class ParityArena:
    owner: Sequence[int]
    succ: Sequence[Sequence[int]]
    priority: Sequence[int]

    @property
    def n(self) -> int:
        return len(self.owner)

    def preds(self) -> list[list[int]]:
        pred: list[list[int]] = [[] for _ in range(self.n)]
        for v, ws in enumerate(self.succ):
            for w in ws:
                pred[w].append(v)
        return pred


@dataclass
class SolveResult:
    region: tuple[frozenset[int], frozenset[int]]
    strategy: tuple[dict[int, int], dict[int, int]]

    def winner(self, v: int) -> int:
        return 0 if v in self.region[0] else 1


def attractor(arena: ParityArena, pred, live: set[int], target: set[int], player: int,
              strategy: dict[int, int]) -> set[int]:
    """Attractor of ``target`` for ``player`` inside ``live``; fills ``strategy``
    with the lowest-indexed successor that entered the attractor before it."""
    attr = set(target)
    count = {v: sum(1 for w in arena.succ[v] if w in live) for v in live}
    queue = deque(sorted(target))
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v not in live or v in attr:
                continue
            if arena.owner[v] == player:
                strategy[v] = next(x for x in arena.succ[v] if x in attr)
                attr.add(v)
                queue.append(v)
            else:
                count[v] -= 1
                if count[v] == 0:
                    attr.add(v)
                    queue.append(v)
    return attr


def _zielonka(arena: ParityArena, pred, live: set[int]):
    if not live:
        return set(), set(), {}, {}
    p = min(arena.priority[v] for v in live)
    me = p % 2
    top = {v for v in live if arena.priority[v] == p}
    strat_me: dict[int, int] = {}
    a = attractor(arena, pred, live, top, me, strat_me)
    sub = _zielonka(arena, pred, live - a)
    w_sub = (sub[0], sub[1])
    s_sub = (sub[2], sub[3])
    if not w_sub[1 - me]:
        win = [set(), set()]
        win[me] = set(live)
        strat = [{}, {}]
        strat[me].update(s_sub[me])
        strat[me].update(strat_me)
        for v in top:
            if arena.owner[v] == me:
                strat[me][v] = next(w for w in arena.succ[v] if w in live)
        return win[0], win[1], strat[0], strat[1]
    strat_opp: dict[int, int] = dict(s_sub[1 - me])
    b = attractor(arena, pred, live, w_sub[1 - me], 1 - me, strat_opp)
    rest = _zielonka(arena, pred, live - b)
    win = [set(rest[0]), set(rest[1])]
    win[1 - me] |= b
    strat = [dict(rest[2]), dict(rest[3])]
    strat[1 - me].update(strat_opp)
    return win[0], win[1], strat[0], strat[1]


def zielonka(arena: ParityArena) -> SolveResult:
    pred = arena.preds()
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 10 * arena.n + 1000))
    try:
        w0, w1, s0, s1 = _zielonka(arena, pred, set(range(arena.n)))
    finally:
        sys.setrecursionlimit(limit)
    s0 = {v: w for v, w in s0.items() if v in w0 and arena.owner[v] == 0}
    s1 = {v: w for v, w in s1.items() if v in w1 and arena.owner[v] == 1}
    return SolveResult((frozenset(w0), frozenset(w1)), (s0, s1))


BACKENDS: dict[str, Callable[[ParityArena], SolveResult]] = {"zielonka": zielonka}


def solve(arena: ParityArena, backend: str = "zielonka", checked: bool = False) -> SolveResult:
    for v in range(arena.n):
        if not arena.succ[v]:
            raise ValueError(f"state {v} has no successor")
    res = BACKENDS[backend](arena)
    if checked and not verify_strategy(arena, res):
        raise AssertionError("solver produced an unverifiable strategy")
    return res


def verify_strategy(arena: ParityArena, result: SolveResult) -> bool:
    """Each region must be a trap for the loser, closed under the winner's
    positional choice, and every cycle there must favour the winner."""
    w0, w1 = result.region
    if w0 & w1 or len(w0) + len(w1) != arena.n:
        return False
    for player in (0, 1):
        region = result.region[player]
        strat = result.strategy[player]
        g = nx.DiGraph()
        g.add_nodes_from(region)
        for v in region:
            if arena.owner[v] == player:
                w = strat.get(v)
                if w is None or w not in arena.succ[v] or w not in region:
                    return False
                g.add_edge(v, w)
            else:
                for w in arena.succ[v]:
                    if w not in region:
                        return False
                    g.add_edge(v, w)
        if _bad_cycle(g, arena.priority, 1 - player):
            return False
    return True


def _bad_cycle(g: nx.DiGraph, priority, parity: int) -> bool:
    """Is there a cycle whose least priority has the given parity?"""
    for p in sorted({priority[v] for v in g.nodes if priority[v] % 2 == parity}):
        sub = g.subgraph([v for v in g.nodes if priority[v] >= p])
        for comp in nx.strongly_connected_components(sub):
            if not any(priority[v] == p for v in comp):
                continue
            if len(comp) > 1 or any(sub.has_edge(v, v) for v in comp):
                return True
    return False


def compress_priorities(priority: Sequence[int]) -> list[int]:
    """Map priorities to a dense range preserving order and parity."""
    out = list(priority)
    values = sorted(set(priority))
    mapping = {}
    cur = None
    for p in values:
        if cur is None:
            cur = p % 2
        elif cur % 2 != p % 2:
            cur += 1
        mapping[p] = cur
    return [mapping[p] for p in out]
