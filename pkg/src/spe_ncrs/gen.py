"""Random game generators used by the tests, the acceptance suite and the CLI."""
from __future__ import annotations

import random

from .arena import GameStructure, Parity, Reach
from .parity_solver import ParityArena


def random_game(rng: random.Random, n_states: int, n_players: int, max_out: int = 2,
                kind: str = "reach", max_prio: int = 2, target_p: float = 0.3):
    """A valid game: action-unique, deadlock-free, player-private action names."""
    names = [f"s{k}" for k in range(n_states)]
    owner = [rng.randrange(n_players) for _ in range(n_states)]
    states = list(zip(names, owner))
    edges = []
    for k in range(n_states):
        deg = rng.randint(1, min(max_out, n_states))
        for x, t in enumerate(rng.sample(range(n_states), deg)):
            edges.append((names[k], f"a{owner[k]}_{x}", names[t]))
    g = GameStructure(n_players, states, edges, names[0])
    if kind == "reach":
        objs = [Reach(frozenset(s for s in range(n_states) if rng.random() < target_p))
                for _ in range(n_players)]
    else:
        objs = [Parity(tuple(rng.randint(0, max_prio) for _ in range(n_states)))
                for _ in range(n_players)]
    return g, objs


def random_parity_arena(rng: random.Random, n: int, max_out: int = 2, n_prios: int = 3) -> ParityArena:
    owner = [rng.randrange(2) for _ in range(n)]
    succ = [sorted(rng.sample(range(n), rng.randint(1, min(max_out, n)))) for _ in range(n)]
    prio = [rng.randrange(n_prios) for _ in range(n)]
    return ParityArena(owner, succ, prio)
