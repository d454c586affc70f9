"""The three-player prover/challenger/prover game built from a multi-player game.

State keys:

* ``("I",)``             initial state, owned by the challenger
* ``("G", v, g)``        G-state; owned by P1 when ``v`` is player 0's, else by C
* ``("A", v, a, g)``     action-state, C proposed action ``a``; owned by P2
* ``("P", v, i, g)``     player-state; ``i`` is the deviator, 0 meaning none; owned by C

Gain profiles ``g`` are bitmasks, bit ``i`` for player ``i``.  Actions are
``("act", a)`` for original actions played by P1 or P2, ``("prop", a, i)`` for
a proposal by C and ``("gain", g)`` for a gain choice of C.  Prover 1 observes
the G-component of states and the original actions; challenger moves are
hidden.
"""
from __future__ import annotations

import random
from collections import defaultdict, deque
from dataclasses import dataclass
from typing import Hashable, Sequence

from .arena import GameError, GameStructure, LassoPlay, Objective, evaluate_lasso, mask_str
from .igame import HIDDEN, ExplicitGame, SizeGuard, explore

INIT = ("I",)
P1, C, P2 = "P1", "C", "P2"
SIZE_CONSTANT = 5


def _action_obs(a: Hashable) -> Hashable:
    return a[1] if a[0] == "act" else HIDDEN


@dataclass
class PcpGame:
    game: GameStructure
    objectives: tuple[Objective, ...]
    arena: ExplicitGame

    # convenience views
    @property
    def n(self) -> int:
        return self.arena.n

    def key(self, v: int):
        return self.arena.keys[v]

    def kind(self, v: int) -> str:
        return self.arena.keys[v][0]

    def gain(self, v: int) -> int | None:
        k = self.arena.keys[v]
        return None if k == INIT else k[-1]

    def label(self, v: int) -> str:
        return state_label(self.game, self.arena.keys[v])


def state_label(g: GameStructure, k) -> str:
    n = g.n_players
    if k == INIT:
        return "init"
    if k[0] == "G":
        return f"({g.state_names[k[1]]},{mask_str(k[2], n)})"
    if k[0] == "A":
        return f"({g.state_names[k[1]]},{g.action_names[k[2]]},{mask_str(k[3], n)})"
    dev = "-" if k[2] == 0 else str(k[2])
    return f"({g.state_names[k[1]]},{dev},{mask_str(k[3], n)})"


def action_label(g: GameStructure, a) -> str:
    if a[0] == "act":
        return g.action_names[a[1]]
    if a[0] == "prop":
        return f"({g.action_names[a[1]]},{a[2]})"
    return mask_str(a[1], g.n_players)


def build_pcp(g: GameStructure, objectives: Sequence[Objective] = (),
              max_players: int = 8, max_states: int | None = None) -> PcpGame:
    n = g.n_players
    if n > max_players:
        raise SizeGuard(f"pcp (player cap {max_players})", max_players)
    gains = range(1 << n)

    def expand(k):
        if k == INIT:
            return [(("gain", gg), ("G", g.initial, gg)) for gg in gains if not gg & 1]
        tag = k[0]
        if tag == "G":
            _, v, gg = k
            if g.owner[v] == 0:
                return [(("act", a), ("G", u, gg)) for a, u in g.succ(v)]
            i = g.owner[v]
            return [(("prop", a, i), ("A", v, a, gg)) for a, _ in g.succ(v)]
        if tag == "A":
            _, v, a, gg = k
            out = []
            for b, u in g.succ(v):
                dev = 0 if b == a else g.owner[v]
                out.append((("act", b), ("P", u, dev, gg)))
            return out
        _, u, i, gg = k
        if i == 0:
            return [(("gain", gg), ("G", u, gg))]
        bit = 1 << i
        return [(("gain", g2), ("G", u, g2)) for g2 in gains if not (g2 & bit and not gg & bit)]

    def owner(k):
        if k == INIT:
            return C
        if k[0] == "G":
            return P1 if g.owner[k[1]] == 0 else C
        return P2 if k[0] == "A" else C

    def obs(k):
        return "init" if k == INIT else k[1]

    arena = explore(INIT, expand, owner, obs, _action_obs, max_states, "pcp")
    return PcpGame(g, tuple(objectives), arena)


# -- simulated plays -----------------------------------------------------------

def simulate_history(pcp: PcpGame, history: Sequence) -> list[int]:
    """Project ``[s0, a0, s1, ...]`` (PCP state ids and actions) to ``[v0, b0, v1, ...]``."""
    out: list[int] = []
    for k, x in enumerate(history):
        if k % 2 == 0:
            key = pcp.key(x)
            if key[0] == "G":
                out.append(key[1])
        elif x[0] == "act":
            out.append(x[1])
    return out


def _rotate_to_g(pcp: PcpGame, play: LassoPlay) -> LassoPlay:
    cyc = play.cycle
    for k, (s, _) in enumerate(cyc):
        if pcp.kind(s) == "G":
            return LassoPlay(play.prefix + cyc[:k], cyc[k:] + cyc[:k])
    raise GameError("pcp lasso cycle contains no G-state")


def _project_steps(pcp: PcpGame, steps) -> tuple:
    out = []
    cur = None
    for s, a in steps:
        key = pcp.key(s)
        if key[0] == "G":
            cur = key[1]
        if a[0] == "act":
            out.append((cur, a[1]))
    return tuple(out)


def simulate_projection(pcp: PcpGame, play) -> LassoPlay | list[int]:
    """Simulated play (for a lasso) or simulated history (for a list)."""
    if not isinstance(play, LassoPlay):
        return simulate_history(pcp, play)
    p = _rotate_to_g(pcp, play)
    return LassoPlay(_project_steps(pcp, p.prefix), _project_steps(pcp, p.cycle))


def simulated_gain(pcp: PcpGame, play: LassoPlay, objectives: Sequence[Objective] | None = None) -> int:
    objectives = pcp.objectives if objectives is None else objectives
    sim = simulate_projection(pcp, play)
    mask = 0
    for i, o in enumerate(objectives):
        if evaluate_lasso(sim, o):
            mask |= 1 << i
    return mask


def classify_play(pcp: PcpGame, play: LassoPlay,
                  objectives: Sequence[Objective] | None = None) -> tuple[str, str]:
    """Winner (``"P"`` or ``"C"``) and the condition tag, evaluated on the cycle.

    With no deviation on the cycle the gain component is constant there, and
    it is compared with the simulated gain even when the cycle has no
    player-state at all.
    """
    sim = simulated_gain(pcp, play, objectives)
    keys = [pcp.key(s) for s, _ in play.cycle]
    devs = {k[2] for k in keys if k[0] == "P" and k[2] != 0}
    if len(devs) >= 2:
        return "C", "iiiC"
    if len(devs) == 1:
        i = devs.pop()
        gi = [k[3] >> i & 1 for k in keys if k[0] == "P" and k[2] == i]
        if all(x >= (sim >> i & 1) for x in gi):
            return "C", "iiC"
        return "P", "iiP"
    gains = {k[-1] for k in keys}
    if len(gains) != 1:
        raise GameError("gain changes on a cycle without deviations")
    return ("C", "iC") if gains.pop() == sim else ("P", "iP")


# -- invariants -----------------------------------------------------------------

def action_stability_violations(arena: ExplicitGame) -> list[str]:
    """Both directions of action-stability, over all pairs of edges."""
    out = []
    by_obs: dict[Hashable, list[tuple[int, Hashable, int]]] = defaultdict(list)
    for v, a, w in arena.edges():
        by_obs[arena.obs[v]].append((v, a, w))
    for o, edges in by_obs.items():
        target_of: dict[Hashable, set] = defaultdict(set)
        action_of: dict[Hashable, set] = defaultdict(set)
        for v, a, w in edges:
            target_of[a].add(arena.obs[w])
            if arena.action_obs(a) != HIDDEN:
                action_of[arena.obs[w]].add(arena.action_obs(a))
        for a, ts in target_of.items():
            if len(ts) > 1:
                out.append(f"observation {o}: action {a} reaches observations {sorted(map(str, ts))}")
        for t, acts in action_of.items():
            if len(acts) > 1:
                out.append(f"observation {o}: visible actions {sorted(map(str, acts))} "
                           f"reach the same observation {t}")
    return out


def equal_observation_pairs(arena: ExplicitGame, strong: bool = False) -> set[tuple[int, int]]:
    """All pairs of last states of equally observed histories of equal length.

    With ``strong`` the final states' observations are not required to agree,
    which is the pairing used for strong player-stability: histories equal up
    to their last state.
    """
    start = (arena.initial, arena.initial)
    seen = {start}
    queue = deque([start])
    res = {start}
    while queue:
        v, w = queue.popleft()
        for a, v2 in arena.succ[v]:
            oa = arena.action_obs(a)
            for b, w2 in arena.succ[w]:
                if arena.action_obs(b) != oa:
                    continue
                if strong:
                    res.add((v2, w2))
                if arena.obs[v2] != arena.obs[w2]:
                    continue
                pair = (v2, w2)
                res.add(pair)
                if pair not in seen:
                    seen.add(pair)
                    queue.append(pair)
    return res


def player_stability_violations(arena: ExplicitGame) -> list[tuple[int, int]]:
    return sorted((v, w) for v, w in equal_observation_pairs(arena) if arena.owner[v] != arena.owner[w])


def synchronized_walks(arena: ExplicitGame, count: int, length: int, seed: int = 0):
    """Random pairs of equally observed histories of equal length.

    The first walk is uniform; the second follows, at each step, a uniformly
    chosen successor matching the first walk's action and state observations.
    Walks stop early if the second cannot follow.
    """
    rng = random.Random(seed)
    for _ in range(count):
        v = w = arena.initial
        h1, h2 = [v], [w]
        for _ in range(length):
            a, v2 = rng.choice(arena.succ[v])
            oa, ov = arena.action_obs(a), arena.obs[v2]
            options = [(b, w2) for b, w2 in arena.succ[w]
                       if arena.action_obs(b) == oa and arena.obs[w2] == ov]
            if not options:
                break
            b, w2 = rng.choice(options)
            h1 += [a, v2]
            h2 += [b, w2]
            v, w = v2, w2
        yield h1, h2


def sampled_player_stability(arena: ExplicitGame, count: int = 10_000, length: int = 12,
                             seed: int = 0) -> tuple[int, int]:
    """(pairs checked, violations): owners must agree position by position."""
    bad = 0
    for h1, h2 in synchronized_walks(arena, count, length, seed):
        if any(arena.owner[x] != arena.owner[y] for x, y in zip(h1[::2], h2[::2])):
            bad += 1
    return count, bad


def gain_monotonicity_violations(pcp: PcpGame) -> list[str]:
    out = []
    for v, a, w in pcp.arena.edges():
        k = pcp.key(v)
        if k[0] != "P":
            continue
        g2 = pcp.key(w)[-1]
        _, _, i, gg = k
        if i == 0 and g2 != gg:
            out.append(f"{pcp.label(v)}: gain changed without deviation")
        if i != 0 and (g2 >> i & 1) > (gg >> i & 1):
            out.append(f"{pcp.label(v)}: deviator gain increased")
    return out


def deadlocks(arena: ExplicitGame) -> list[int]:
    return [v for v in range(arena.n) if not arena.succ[v]]


def size_report(pcp: PcpGame) -> dict:
    g = pcp.game
    blow = 1 << g.n_players
    n_actions = len(pcp.arena.actions())
    return {
        "states": pcp.n,
        "state_bound": SIZE_CONSTANT * g.n_states * g.n_actions * blow,
        "actions": n_actions,
        "action_bound": SIZE_CONSTANT * g.n_actions * blow,
    }


def size_bounds_hold(pcp: PcpGame) -> bool:
    r = size_report(pcp)
    return r["states"] <= r["state_bound"] and r["actions"] <= r["action_bound"]


# -- export ---------------------------------------------------------------------

_SHAPES = {P1: "circle", C: "box", P2: "diamond"}


def to_dot(pcp: PcpGame) -> str:
    g = pcp.game
    lines = ["digraph pcp {", "  rankdir=LR;"]
    for v in range(pcp.n):
        obs = pcp.arena.obs[v]
        obs_s = obs if obs == "init" else g.state_names[obs]
        lines.append(f'  n{v} [shape={_SHAPES[pcp.arena.owner[v]]}, '
                     f'label="{pcp.label(v)}\\nobs {obs_s}"];')
    for v, a, w in pcp.arena.edges():
        lines.append(f'  n{v} -> n{w} [label="{action_label(g, a)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
