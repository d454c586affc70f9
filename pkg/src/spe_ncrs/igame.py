"""Explicit game graphs with hashable state keys and an observation function.

Every intermediate game of the reduction (the prover/challenger arena, its
observer product and the merged one-prover game) is materialized as an
``ExplicitGame``: states are numbered in breadth-first order from the initial
state, each state has an owner label and an ordered successor list.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable

from .arena import LassoPlay

HIDDEN = "#"


class SizeGuard(RuntimeError):
    """A construction exceeded its configured state bound."""

    def __init__(self, stage: str, bound: int):
        super().__init__(f"{stage}: more than {bound} states")
        self.stage = stage
        self.bound = bound


@dataclass
class ExplicitGame:
    keys: list[Hashable]
    owner: list[str]
    succ: list[list[tuple[Hashable, int]]]
    obs: list[Hashable]                       # observation of each state
    action_obs: Callable[[Hashable], Hashable]
    index: dict[Hashable, int] = field(default_factory=dict)

    initial: int = 0

    @property
    def n(self) -> int:
        return len(self.keys)

    def delta(self, v: int, a: Hashable) -> int | None:
        for b, w in self.succ[v]:
            if b == a:
                return w
        return None

    def edges(self) -> Iterable[tuple[int, Hashable, int]]:
        for v, out in enumerate(self.succ):
            for a, w in out:
                yield v, a, w

    def actions(self) -> set[Hashable]:
        return {a for out in self.succ for a, _ in out}

    def observe(self, history: list) -> tuple:
        """Observation of ``v0 a0 v1 ...`` given as alternating list."""
        return tuple(self.obs[x] if k % 2 == 0 else self.action_obs(x)
                     for k, x in enumerate(history))


def explore(initial: Hashable, expand: Callable[[Hashable], list[tuple[Hashable, Hashable]]],
            owner: Callable[[Hashable], str], obs: Callable[[Hashable], Hashable],
            action_obs: Callable[[Hashable], Hashable], limit: int | None = None,
            stage: str = "explore") -> ExplicitGame:
    index = {initial: 0}
    keys = [initial]
    succ: list[list[tuple[Hashable, int]]] = []
    queue = deque([initial])
    while queue:
        k = queue.popleft()
        out = []
        for a, t in expand(k):
            if t not in index:
                if limit is not None and len(keys) >= limit:
                    raise SizeGuard(stage, limit)
                index[t] = len(keys)
                keys.append(t)
                queue.append(t)
            out.append((a, index[t]))
        succ.append(out)
    return ExplicitGame(keys, [owner(k) for k in keys], succ, [obs(k) for k in keys],
                        action_obs, index)


def check_lasso(arena: ExplicitGame, lasso, start: int | None = None) -> None:
    """Raise ValueError unless ``lasso`` (steps of (state, action)) is a play."""
    steps = lasso.prefix + lasso.cycle
    if not lasso.cycle:
        raise ValueError("lasso cycle must be nonempty")
    if start is not None and steps[0][0] != start:
        raise ValueError("lasso does not start at the expected state")
    for k, (v, a) in enumerate(steps):
        nxt = steps[k + 1][0] if k + 1 < len(steps) else lasso.cycle[0][0]
        if arena.delta(v, a) != nxt:
            raise ValueError(f"lasso broken at step {k}")


def random_lasso(arena: ExplicitGame, rng, min_len: int = 0, max_len: int = 200):
    """Random walk from the initial state, closed at the first repeated state
    after ``min_len`` steps.  Returns None if no repetition within ``max_len``."""
    v = arena.initial
    steps: list[tuple[int, Hashable]] = []
    seen: dict[int, int] = {}
    while len(steps) <= max_len:
        if v in seen and len(steps) >= min_len:
            k = seen[v]
            return LassoPlay(tuple(steps[:k]), tuple(steps[k:]))
        seen[v] = len(steps)
        a, w = rng.choice(arena.succ[v])
        steps.append((v, a))
        v = w
    return None
