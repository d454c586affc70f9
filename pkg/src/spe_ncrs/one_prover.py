"""Merging the two provers into a single prover with function actions.

The merged game keeps the states, edges and Rabin pairs of the observer
product.  At a P2 state the single prover plays a function action: a map from
P2 states to their actions, observed as itself.  Function actions are
enumerated per observation class of P2 states, identifying maps that agree on
the class; the knowledge game further restricts them to the current knowledge
set.
"""
from __future__ import annotations

import itertools
import random
from collections import defaultdict
from dataclasses import dataclass
from typing import Hashable, Iterator, Sequence

from .igame import HIDDEN, ExplicitGame, SizeGuard
from .observer import ObserverProduct
from .pcp import P2


def is_function(a) -> bool:
    return isinstance(a, tuple) and len(a) == 2 and a[0] == "f"


@dataclass
class PCGame:
    prod: ObserverProduct
    classes: dict[Hashable, tuple[int, ...]]     # observation -> P2 states
    max_functions: int = 1 << 16

    @property
    def arena(self) -> ExplicitGame:
        return self.prod.arena

    @property
    def pairs(self):
        return self.prod.pairs

    def owner(self, v: int) -> str:
        return "C" if self.arena.owner[v] == "C" else "P"

    def role(self, v: int) -> str:
        return self.arena.owner[v]

    def function_actions(self, obs: Hashable, domain: Sequence[int] | None = None) -> Iterator[tuple]:
        """Function actions over ``domain`` (default: the whole observation class)."""
        dom = self.classes[obs] if domain is None else tuple(sorted(domain))
        choices = [[a for a, _ in self.arena.succ[u]] for u in dom]
        total = 1
        for c in choices:
            total *= len(c)
        if total > self.max_functions:
            raise SizeGuard("function actions", self.max_functions)
        for combo in itertools.product(*choices):
            yield ("f", tuple(zip(dom, combo)))

    def succ(self, v: int) -> list[tuple[Hashable, int]]:
        if self.arena.owner[v] != P2:
            return list(self.arena.succ[v])
        out = []
        for f in self.function_actions(self.arena.obs[v]):
            out.append((f, self.delta(v, f)))
        return out

    def delta(self, v: int, a) -> int | None:
        if is_function(a):
            b = dict(a[1]).get(v)
            return None if b is None else self.arena.delta(v, b)
        return self.arena.delta(v, a)

    def observe(self, x, is_action: bool):
        if not is_action:
            return self.arena.obs[x]
        return x if is_function(x) else self.arena.action_obs(x)


def merge_provers(prod: ObserverProduct, max_functions: int = 1 << 16) -> PCGame:
    classes: dict[Hashable, list[int]] = defaultdict(list)
    for v in range(prod.n):
        if prod.arena.owner[v] == P2:
            classes[prod.arena.obs[v]].append(v)
    return PCGame(prod, {o: tuple(vs) for o, vs in classes.items()}, max_functions)


def corresp(pc: PCGame, history: Sequence) -> list:
    """Replace every function action by its value at the state it is played from."""
    out = list(history)
    for k in range(1, len(out), 2):
        a = out[k]
        if is_function(a):
            out[k] = dict(a[1])[out[k - 1]]
    return out


def observe_pc(pc: PCGame, history: Sequence) -> tuple:
    return tuple(pc.observe(x, k % 2 == 1) for k, x in enumerate(history))


def quotient_check(pc: PCGame, obs: Hashable) -> bool:
    """Maps over one class are pairwise distinct and realize every choice combination."""
    funs = [f[1] for f in pc.function_actions(obs)]
    dom = pc.classes[obs]
    combos = {tuple(a for _, a in f) for f in funs}
    expected = 1
    for u in dom:
        expected *= len(pc.arena.succ[u])
    return len(funs) == len(set(funs)) == len(combos) == expected


def synchronized_pc_walks(pc: PCGame, count: int, length: int, seed: int = 0):
    """Pairs of equally observed histories in the merged game.

    At P2 states a random function action is drawn over the observation class
    and played in both histories.  The walk stops when the two final states
    are observed differently, so each pair ends at the first such position.
    """
    rng = random.Random(seed)
    arena = pc.arena
    for _ in range(count):
        v = w = arena.initial
        h1, h2 = [v], [w]
        for _ in range(length):
            if arena.owner[v] == P2:
                dom = sorted({v, w})
                choice = tuple((u, rng.choice(arena.succ[u])[0]) for u in dom)
                f = ("f", choice)
                v2, w2 = pc.delta(v, f), pc.delta(w, f)
                a = b = f
            else:
                a, v2 = rng.choice(arena.succ[v])
                oa = arena.action_obs(a)
                options = [(b, w2) for b, w2 in arena.succ[w] if arena.action_obs(b) == oa]
                if oa != HIDDEN:
                    same = [x for x in options if arena.obs[x[1]] == arena.obs[v2]]
                    options = same or options
                if not options:
                    break
                b, w2 = rng.choice(options)
            h1 += [a, v2]
            h2 += [b, w2]
            v, w = v2, w2
            if arena.obs[v] != arena.obs[w]:
                break
        yield h1, h2


def sampled_strong_stability(pc: PCGame, count: int = 10_000, length: int = 12,
                             seed: int = 0) -> dict:
    """Count pairs whose final states differ in owner or in observation."""
    owner_bad = obs_bad = 0
    example = None
    for h1, h2 in synchronized_pc_walks(pc, count, length, seed):
        v, w = h1[-1], h2[-1]
        if pc.owner(v) != pc.owner(w):
            owner_bad += 1
        if pc.arena.obs[v] != pc.arena.obs[w]:
            obs_bad += 1
            if example is None:
                example = (h1, h2)
    return {"pairs": count, "owner_violations": owner_bad, "observation_violations": obs_bad,
            "example": example}
