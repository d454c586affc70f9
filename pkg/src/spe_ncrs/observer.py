"""Deterministic observers over the prover/challenger arena and their products.

The observer payload is embedded in the product state ``(pcp_key, payload)``.
For parity objectives the payload is ``(j, d, f)``; for reachability it is
``(t, j, d, f)`` where ``t`` is the mask of visited targets.  ``j`` is the
player component of the last player-state (0 when it accepted), ``d`` the last
deviating player and ``f`` records whether the last two deviators differ.

Rabin pairs are stored as integer bitsets over product states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .arena import GameError, LassoPlay, Parity, Reach
from .igame import ExplicitGame, explore
from .pcp import INIT, PcpGame, action_label, state_label


@dataclass
class ObserverProduct:
    pcp: PcpGame
    arena: ExplicitGame
    pairs: list[tuple[int, int]]       # (E, F) bitsets over product states
    pair_names: list[str]
    kind: str                          # "reach" or "parity"

    @property
    def n(self) -> int:
        return self.arena.n

    def pcp_state(self, v: int) -> int:
        return self.pcp.arena.index[self.arena.keys[v][0]]

    def payload(self, v: int):
        return self.arena.keys[v][1]

    def in_set(self, bits: int, v: int) -> bool:
        return bool(bits >> v & 1)

    def observer_states(self) -> set:
        """Distinct observer states (the pcp key minus its G-component, plus payload)."""
        return {(nu(k), q) for k, q in self.arena.keys}


def nu(k) -> tuple:
    """The pcp key without its G-component."""
    return () if k == INIT else (k[0],) + tuple(k[2:])


def _step_jdf(j: int, d: int, f: int, k) -> tuple[int, int, int]:
    if k == INIT or k[0] != "P":
        return j, d, f
    i = k[2]
    if i == 0:
        return 0, d, f
    return i, i, int(i != d)


def _is_dev(k) -> int:
    """Deviating player of a player-state, else 0."""
    return k[2] if k != INIT and k[0] == "P" else 0


def _product(pcp: PcpGame, q0, update, limit: int | None) -> ExplicitGame:
    pa = pcp.arena

    def expand(key):
        k, q = key
        v = pa.index[k]
        return [(a, (pa.keys[w], update(q, pa.keys[w]))) for a, w in pa.succ[v]]

    return explore((INIT, q0), expand, lambda key: pa.owner[pa.index[key[0]]],
                   lambda key: pa.obs[pa.index[key[0]]], pa.action_obs, limit, "observer product")


def _bits(n: int, pred) -> int:
    out = 0
    for v in range(n):
        if pred(v):
            out |= 1 << v
    return out


def build_reach_observer_product(pcp: PcpGame, targets: Sequence[frozenset[int]] | None = None,
                                 limit: int | None = None) -> ObserverProduct:
    if targets is None:
        if not all(isinstance(o, Reach) for o in pcp.objectives):
            raise GameError("reach observer needs reachability objectives")
        targets = [o.targets for o in pcp.objectives]
    n_pl = pcp.game.n_players

    def update(q, k):
        t, j, d, f = q
        if k != INIT:
            for i, tg in enumerate(targets):
                if k[1] in tg:
                    t |= 1 << i
        return (t,) + _step_jdf(j, d, f, k)

    arena = _product(pcp, (0, 0, 0, 0), update, limit)
    keys = arena.keys
    n = arena.n
    gain = [None if k == INIT else k[-1] for k, _ in keys]
    dev = [_is_dev(k) for k, _ in keys]
    pairs = [(_bits(n, lambda v: dev[v] != 0),
              _bits(n, lambda v: gain[v] is not None and gain[v] != keys[v][1][0]))]
    names = ["accept: predicted gain wrong"]
    for j in range(1, n_pl):
        bit = 1 << j
        pairs.append((
            _bits(n, lambda v: keys[v][1][3] == 1 or (dev[v] != 0 and dev[v] != j)),
            _bits(n, lambda v: gain[v] is not None and not gain[v] & bit and keys[v][1][0] & bit)))
        names.append(f"deviate {j}: profitable")
    return ObserverProduct(pcp, arena, pairs, names, "reach")


def build_parity_observer_product(pcp: PcpGame, priorities: Sequence[Sequence[int]] | None = None,
                                  limit: int | None = None) -> ObserverProduct:
    if priorities is None:
        if not all(isinstance(o, Parity) for o in pcp.objectives):
            raise GameError("parity observer needs parity objectives")
        priorities = [o.priority for o in pcp.objectives]
    n_pl = pcp.game.n_players

    def update(q, k):
        return _step_jdf(*q, k)

    arena = _product(pcp, (0, 0, 0), update, limit)
    keys = arena.keys
    n = arena.n
    state = [None if k == INIT else k[1] for k, _ in keys]
    gain = [None if k == INIT else k[-1] for k, _ in keys]
    dev = [_is_dev(k) for k, _ in keys]
    pairs: list[tuple[int, int]] = []
    names: list[str] = []

    def prio(i, v):
        return priorities[i][state[v]]

    for i in range(n_pl):
        top = max(priorities[i])
        for p in range(top + 1):
            want = 0 if p % 2 == 0 else 1
            e = _bits(n, lambda v: state[v] is not None and (dev[v] != 0 or prio(i, v) < p))
            f = _bits(n, lambda v: state[v] is not None and (gain[v] >> i & 1) == want
                      and prio(i, v) == p)
            pairs.append((e, f))
            names.append(f"accept: player {i} gain {want} but priority {p}")
    for j in range(1, n_pl):
        for p in range(0, max(priorities[j]) + 1, 2):
            e = _bits(n, lambda v: state[v] is not None and (
                keys[v][1][2] == 1 or prio(j, v) < p or (dev[v] != 0 and dev[v] != j)))
            f = _bits(n, lambda v: state[v] is not None and not gain[v] >> j & 1
                      and prio(j, v) == p)
            pairs.append((e, f))
            names.append(f"deviate {j}: profitable at priority {p}")
    return ObserverProduct(pcp, arena, pairs, names, "parity")


def rabin_holds(pairs: Sequence[tuple[int, int]], inf_bits: int) -> bool:
    return any(not (e & inf_bits) and (f & inf_bits) for e, f in pairs)


def lasso_winner_product(prod: ObserverProduct, lasso: LassoPlay) -> str:
    inf = 0
    for v, _ in lasso.cycle:
        inf |= 1 << v
    return "P" if rabin_holds(prod.pairs, inf) else "C"


def project_lasso(prod: ObserverProduct, lasso: LassoPlay) -> LassoPlay:
    f = prod.pcp_state
    return LassoPlay(tuple((f(v), a) for v, a in lasso.prefix),
                     tuple((f(v), a) for v, a in lasso.cycle))


def reach_observer_bound(n_players: int, n_actions: int) -> int:
    """Upper bound on observer states, independent of the number of game states."""
    blow = 1 << n_players
    n_nu = 1 + blow + n_actions * blow + n_players * blow
    return n_nu * blow * n_players * n_players * 2


def to_dot(prod: ObserverProduct) -> str:
    g = prod.pcp.game
    lines = ["digraph product {", "  rankdir=LR;"]
    for v, (k, q) in enumerate(prod.arena.keys):
        member = [str(x) for x, (e, f) in enumerate(prod.pairs)
                  if f >> v & 1 and not e >> v & 1]
        tag = f"\\nF: {','.join(member)}" if member else ""
        lines.append(f'  n{v} [label="{state_label(g, k)} {q}{tag}"];')
    for v, a, w in prod.arena.edges():
        lines.append(f'  n{v} -> n{w} [label="{action_label(g, a)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
