"""Brute-force ground truth: outcomes, 0-fixed equilibria, parity solving by
enumeration and refutation of candidate solutions.

Reachability objectives are handled on the fly by pairing every state with the
mask of targets visited so far, so that the gain of a subgame depends only on
the current node.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

from .arena import GameError, GameStructure, LassoPlay, Objective, Parity, Reach
from .graphs import backward_reach, good_cycle_nodes
from .parity_solver import ParityArena
from .strategy import MealyStrategy


class ResourceGuard(RuntimeError):
    """An enumeration or construction exceeded its configured bound."""


MemorylessProfile = Mapping[int, int]


def outcome(g: GameStructure, profile: MemorylessProfile, start: int | None = None) -> LassoPlay:
    s = g.initial if start is None else start
    seen: dict[int, int] = {}
    steps = []
    while s not in seen:
        seen[s] = len(steps)
        a = profile[s]
        t = g.delta(s, a)
        if t is None:
            raise GameError(f"profile action undefined at {g.state_names[s]}")
        steps.append((s, a))
        s = t
    k = seen[s]
    return LassoPlay(tuple(steps[:k]), tuple(steps[k:]))


# -- product arenas -------------------------------------------------------------

@dataclass
class _Arena:
    keys: list            # (memory, state, mask)
    owner: list[int]
    succ: list[list[tuple[int, int]]]   # (action, node)
    prio: list[list[int]]               # prio[player][node]

    @property
    def n(self) -> int:
        return len(self.keys)


def _mark(objectives, s: int, mask: int) -> int:
    for i, o in enumerate(objectives):
        if isinstance(o, Reach) and s in o.targets:
            mask |= 1 << i
    return mask


def _explore(g: GameStructure, objectives: Sequence[Objective], start: int,
             fixed0: Mapping[int, int] | None = None, mealy: MealyStrategy | None = None,
             limit: int = 200_000) -> _Arena:
    """Product of the game with visited-target masks (and a strategy's memory)."""
    for o in objectives:
        if not isinstance(o, (Reach, Parity)):
            raise GameError("oracles support reach and parity objectives")
    if mealy is not None:
        m0 = mealy.initial
        if mealy.memory[m0].state != start:
            raise GameError("strategy memory does not start at the start state")
    else:
        m0 = None
    root = (m0, start, _mark(objectives, start, 0))
    index = {root: 0}
    keys = [root]
    succ: list[list[tuple[int, int]]] = []
    k = 0
    while k < len(keys):
        m, s, mask = keys[k]
        k += 1
        if g.owner[s] == 0 and mealy is not None:
            a = mealy.output(m)
            if a is None or g.delta(s, a) is None:
                raise GameError(f"strategy has no valid output at memory {m}")
            acts = [a]
        elif g.owner[s] == 0 and fixed0 is not None:
            acts = [fixed0[s]]
        else:
            acts = list(g.actions_at(s))
        out = []
        for a in acts:
            t = g.delta(s, a)
            m2 = mealy.step(m, a) if mealy is not None else None
            key = (m2, t, _mark(objectives, t, mask))
            if key not in index:
                if len(keys) >= limit:
                    raise ResourceGuard(f"product exceeds {limit} nodes")
                index[key] = len(keys)
                keys.append(key)
            out.append((a, index[key]))
        succ.append(out)
    prio = []
    for i, o in enumerate(objectives):
        if isinstance(o, Reach):
            prio.append([0 if mask >> i & 1 else 1 for _, _, mask in keys])
        else:
            prio.append([o.priority[s] for _, s, _ in keys])
    return _Arena(keys, [g.owner[s] for _, s, _ in keys], succ, prio)


def _fixed_wins(arena: _Arena, choice: Sequence[int], prio: Sequence[int]) -> list[bool]:
    """Outcome gains in the functional graph node -> choice[node]."""
    n = arena.n
    res: list[bool | None] = [None] * n
    for v in range(n):
        if res[v] is not None:
            continue
        path = []
        pos: dict[int, int] = {}
        w = v
        while res[w] is None and w not in pos:
            pos[w] = len(path)
            path.append(w)
            w = choice[w]
        if res[w] is None:
            cyc = path[pos[w]:]
            val = min(prio[x] for x in cyc) % 2 == 0
            for x in cyc:
                res[x] = val
            path = path[:pos[w]]
        else:
            val = res[w]
        for x in path:
            res[x] = val
    return res  # type: ignore[return-value]


def _deviation_wins(arena: _Arena, choice: Sequence[int], player: int,
                    prio: Sequence[int]) -> set[int]:
    """Nodes from which ``player`` can win when everyone else is fixed."""
    adj = [[w for _, w in arena.succ[v]] if arena.owner[v] == player else [choice[v]]
           for v in range(arena.n)]
    pred: list[list[int]] = [[] for _ in range(arena.n)]
    for v, ws in enumerate(adj):
        for w in ws:
            pred[w].append(v)
    good = good_cycle_nodes(range(arena.n), adj.__getitem__, prio.__getitem__, 0)
    return backward_reach(good, pred.__getitem__)


def _ne_nodes(arena: _Arena, choice: Sequence[int], deviators: Sequence[int]) -> list[bool]:
    ok = [True] * arena.n
    for i in deviators:
        wins = _fixed_wins(arena, choice, arena.prio[i])
        can = _deviation_wins(arena, choice, i, arena.prio[i])
        for v in range(arena.n):
            if not wins[v] and v in can:
                ok[v] = False
    return ok


def _choice_from_profile(g: GameStructure, arena: _Arena, profile: MemorylessProfile) -> list[int]:
    out = []
    for v, (_, s, _) in enumerate(arena.keys):
        if len(arena.succ[v]) == 1 and g.owner[s] == 0 and s not in profile:
            out.append(arena.succ[v][0][1])
            continue
        a = profile[s]
        nxt = [w for b, w in arena.succ[v] if b == a]
        if not nxt:
            raise GameError(f"profile action undefined at {g.state_names[s]}")
        out.append(nxt[0])
    return out


def gains(g: GameStructure, objectives: Sequence[Objective], profile: MemorylessProfile,
          start: int | None = None) -> tuple[int, ...]:
    arena = _explore(g, objectives, g.initial if start is None else start)
    choice = _choice_from_profile(g, arena, profile)
    return tuple(int(_fixed_wins(arena, choice, arena.prio[i])[0]) for i in range(len(objectives)))


def is_0fixed_ne(g: GameStructure, objectives: Sequence[Objective], profile: MemorylessProfile,
                 start: int | None = None) -> bool:
    arena = _explore(g, objectives, g.initial if start is None else start)
    choice = _choice_from_profile(g, arena, profile)
    return _ne_nodes(arena, choice, range(1, g.n_players))[0]


def is_0fixed_spe_memoryless(g: GameStructure, objectives: Sequence[Objective],
                             profile: MemorylessProfile) -> bool:
    """Every node reachable with player 0 following the profile must be a 0-fixed NE."""
    fixed0 = {s: profile[s] for s in g.states_of(0)}
    arena = _explore(g, objectives, g.initial, fixed0=fixed0)
    choice = _choice_from_profile(g, arena, profile)
    return all(_ne_nodes(arena, choice, range(1, g.n_players)))


def is_spe_memoryless(g: GameStructure, objectives: Sequence[Objective],
                      profile: MemorylessProfile) -> bool:
    """Plain subgame perfection: every player, player 0 included, may deviate."""
    arena = _explore(g, objectives, g.initial)
    choice = _choice_from_profile(g, arena, profile)
    return all(_ne_nodes(arena, choice, range(g.n_players)))


def memoryless_profiles(g: GameStructure, players: Sequence[int] | None = None):
    """All memoryless choices for the given players; ascending enumeration order."""
    players = list(g.players) if players is None else list(players)
    slots = [s for p in players for s in g.states_of(p)]
    for combo in itertools.product(*(g.actions_at(s) for s in slots)):
        yield dict(zip(slots, combo))


# -- parity games by enumeration ---------------------------------------------

def brute_solve_parity(arena: ParityArena, max_strategies: int = 1 << 16) -> frozenset[int]:
    """Even's winning region by enumerating Even's positional strategies."""
    n = arena.n
    even = [v for v in range(n) if arena.owner[v] == 0]
    count = 1
    for v in even:
        count *= len(arena.succ[v])
        if count > max_strategies:
            raise ResourceGuard(f"more than {max_strategies} positional strategies")
    region: set[int] = set()
    for combo in itertools.product(*(arena.succ[v] for v in even)):
        pick = dict(zip(even, combo))
        adj = [[pick[v]] if v in pick else list(arena.succ[v]) for v in range(n)]
        pred: list[list[int]] = [[] for _ in range(n)]
        for v, ws in enumerate(adj):
            for w in ws:
                pred[w].append(v)
        bad = good_cycle_nodes(range(n), adj.__getitem__, arena.priority.__getitem__, 1)
        odd_wins = backward_reach(bad, pred.__getitem__)
        region |= set(range(n)) - odd_wins
        if len(region) == n:
            break
    return frozenset(region)


# -- refutation ------------------------------------------------------------

@dataclass
class Counterexample:
    profile: dict[tuple, str]          # (memory, state name, visited mask) -> action name
    outcome: LassoPlay                 # in the original game
    gains: tuple[int, ...]


def refute_solution(g: GameStructure, objectives: Sequence[Objective], sigma0: MealyStrategy,
                    max_profiles: int = 1 << 16) -> Counterexample | None:
    """Search memoryless environment responses on the product of the game with
    the strategy's memory for a 0-fixed SPE whose outcome player 0 loses.

    A returned profile refutes ``sigma0``; ``None`` is not a proof, since
    subgame-perfect responses may need memory beyond the product.
    """
    arena = _explore(g, objectives, g.initial, mealy=sigma0)
    env = sorted((v for v in range(arena.n) if arena.owner[v] != 0),
                 key=lambda v: (arena.owner[v], arena.keys[v][1], v))
    count = 1
    for v in env:
        count *= len(arena.succ[v])
        if count > max_profiles:
            raise ResourceGuard(f"more than {max_profiles} environment profiles")
    base = [arena.succ[v][0][1] for v in range(arena.n)]
    for combo in itertools.product(*(arena.succ[v] for v in env)):
        choice = list(base)
        for v, (_, w) in zip(env, combo):
            choice[v] = w
        wins0 = _fixed_wins(arena, choice, arena.prio[0])
        if wins0[0]:
            continue
        if not all(_ne_nodes(arena, choice, range(1, g.n_players))):
            continue
        prof = {}
        for v, (a, _) in zip(env, combo):
            m, s, mask = arena.keys[v]
            prof[(m, g.state_names[s], mask)] = g.action_names[a]
        play = _play_of(g, arena, choice)
        gn = tuple(int(_fixed_wins(arena, choice, arena.prio[i])[0])
                   for i in range(len(objectives)))
        return Counterexample(prof, play, gn)
    return None


def _play_of(g: GameStructure, arena: _Arena, choice: Sequence[int]) -> LassoPlay:
    pos: dict[int, int] = {}
    steps = []
    v = 0
    while v not in pos:
        pos[v] = len(steps)
        w = choice[v]
        a = next(b for b, x in arena.succ[v] if x == w)
        steps.append((arena.keys[v][1], a))
        v = w
    k = pos[v]
    return LassoPlay(tuple(steps[:k]), tuple(steps[k:]))
