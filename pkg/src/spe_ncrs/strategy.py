"""Finite-memory strategies for player 0 and their JSON form."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping

from .arena import GameError, GameStructure


@dataclass
class MemoryState:
    id: int
    state: int                    # game state the memory sits at
    U: tuple[str, ...] = ()       # knowledge set (rendered) when extracted
    q: int | None = None          # automaton state when extracted
    owner: str = ""
    output: int | None = None     # player-0 action, if the state is player 0's


@dataclass
class MealyStrategy:
    """Observation-driven strategy of player 0.

    Each memory state sits at one game state; ``update[(m, a)]`` is the memory
    after action ``a`` is taken there.  Player 0 is fully informed in the
    original game, so the observation of a step is the step itself.
    """

    game: GameStructure
    memory: list[MemoryState]
    initial: int
    update: dict[tuple[int, int], int] = field(default_factory=dict)

    def output(self, m: int) -> int | None:
        return self.memory[m].output

    def step(self, m: int, a: int) -> int:
        try:
            return self.update[(m, a)]
        except KeyError:
            raise GameError(
                f"strategy has no update from memory {m} on action "
                f"{self.game.action_names[a]}") from None

    def check(self) -> list[str]:
        """Structural problems: outputs undefined or updates inconsistent."""
        g = self.game
        out = []
        if self.memory[self.initial].state != g.initial:
            out.append("initial memory does not sit at the initial state")
        for m in self.memory:
            if g.owner[m.state] == 0:
                if m.output is None or g.delta(m.state, m.output) is None:
                    out.append(f"memory {m.id}: no defined output at {g.state_names[m.state]}")
        for (m, a), m2 in self.update.items():
            t = g.delta(self.memory[m].state, a)
            if t is None or self.memory[m2].state != t:
                out.append(f"update from memory {m} on {g.action_names[a]} is inconsistent")
        return out

    def reachable(self) -> set[int]:
        g = self.game
        seen = {self.initial}
        stack = [self.initial]
        while stack:
            m = stack.pop()
            s = self.memory[m].state
            acts = [self.memory[m].output] if g.owner[s] == 0 else list(g.actions_at(s))
            for a in acts:
                if a is None:
                    continue
                m2 = self.update.get((m, a))
                if m2 is not None and m2 not in seen:
                    seen.add(m2)
                    stack.append(m2)
        return seen

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        g = self.game
        return {
            "initial": self.initial,
            "memory": [
                {"id": m.id, "state": g.state_names[m.state], "U": list(m.U), "q": m.q,
                 "owner": m.owner,
                 "output": None if m.output is None else g.action_names[m.output]}
                for m in self.memory
            ],
            "updates": [
                {"from": m, "letter": [g.state_names[self.memory[m].state], g.action_names[a]],
                 "to": m2}
                for (m, a), m2 in sorted(self.update.items())
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, g: GameStructure, data: Mapping) -> "MealyStrategy":
        try:
            rows = sorted(data["memory"], key=lambda r: r["id"])
            memory = []
            for k, r in enumerate(rows):
                if r["id"] != k:
                    raise GameError("memory ids must be 0..n-1")
                out = r.get("output")
                memory.append(MemoryState(
                    k, g.state_id(r["state"]), tuple(r.get("U", ())), r.get("q"),
                    r.get("owner", ""), None if out is None else g.action_id(out)))
            update = {}
            for e in data.get("updates", []):
                s, a = e["letter"]
                m = int(e["from"])
                if memory[m].state != g.state_id(s):
                    raise GameError(f"update letter {s} does not match memory {m}")
                update[(m, g.action_id(a))] = int(e["to"])
            return cls(g, memory, int(data["initial"]), update)
        except (KeyError, TypeError, IndexError, ValueError) as exc:
            if isinstance(exc, GameError):
                raise
            raise GameError(f"malformed strategy JSON: {exc}") from None

    @classmethod
    def memoryless(cls, g: GameStructure, choice: Mapping[int, int]) -> "MealyStrategy":
        """One memory state per game state; ``choice`` maps player-0 states to actions."""
        memory = [MemoryState(s, s, (g.state_names[s],), None,
                              "P1" if g.owner[s] == 0 else "C",
                              choice.get(s) if g.owner[s] == 0 else None)
                  for s in range(g.n_states)]
        update = {(s, a): t for s, a, t in g.edges()}
        return cls(g, memory, g.initial, update)
