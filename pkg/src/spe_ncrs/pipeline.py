"""End-to-end decision procedure and extraction of a player-0 strategy.

Stages: binarize, build the prover/challenger arena, take its product with the
observer, merge the provers, build the observation automaton, determinize and
complement it, build the knowledge game and solve it.  Reachability games use
either the parity route (visited-bit augmentation first) or the fast route
whose observation automaton runs on observer states only.
"""
from __future__ import annotations

import os
import time
from dataclasses import dataclass, field
from typing import Hashable, Sequence

from . import knowledge, observer, one_prover, pcp as pcp_mod
from .arena import GameError, GameStructure, Objective, Parity, Reach, binarize_ex, reach_to_parity, validate
from .igame import HIDDEN, SizeGuard
from .observer import nu
from .parity_solver import ParityArena, SolveResult, compress_priorities, solve
from .pcp import INIT, P1, P2, PcpGame, build_pcp
from .strategy import MealyStrategy, MemoryState

MODES = ("auto", "parity", "reach-fast")


@dataclass
class Stage:
    name: str
    size: int
    seconds: float
    extra: dict = field(default_factory=dict)


@dataclass
class Verdict:
    answer: str                               # "YES" or "NO"
    strategy: MealyStrategy | None
    stats: list[Stage]
    mode: str
    artifacts: dict = field(default_factory=dict)

    @property
    def yes(self) -> bool:
        return self.answer == "YES"

    def stats_dict(self) -> dict:
        return {"mode": self.mode, "answer": self.answer,
                "stages": [{"stage": s.name, "size": s.size, "seconds": round(s.seconds, 4), **s.extra}
                           for s in self.stats]}


class _Timer:
    def __init__(self, stats: list[Stage]):
        self.stats = stats
        self.t = time.perf_counter()

    def done(self, name: str, size: int, **extra) -> None:
        now = time.perf_counter()
        self.stats.append(Stage(name, size, now - self.t, extra))
        self.t = now


def _pick_mode(objectives: Sequence[Objective], mode: str) -> str:
    if mode not in MODES:
        raise GameError(f"unknown mode {mode!r}")
    all_reach = all(isinstance(o, Reach) for o in objectives)
    if mode == "reach-fast" and not all_reach:
        raise GameError("reach-fast mode needs reachability objectives for every player")
    if mode == "auto":
        return "reach-fast" if all_reach else "parity"
    return mode


def observer_split(key) -> tuple[Hashable, Hashable]:
    k, q = key
    return ("init" if k == INIT else k[1]), (nu(k), q)


def observer_join(o: Hashable, q) -> Hashable:
    n, payload = q
    k = INIT if not n else (n[0], o) + tuple(n[1:])
    return (k, payload)


def solve_spe_ncrs(g: GameStructure, objectives: Sequence[Objective], mode: str = "auto",
                   max_states: int | None = 200_000, extract: bool = True,
                   full_functions: bool = False, max_letters: int = 100_000) -> Verdict:
    problems = validate(g)
    if problems:
        raise GameError("; ".join(problems))
    if len(objectives) != g.n_players:
        raise GameError("one objective per player is required")
    mode = _pick_mode(objectives, mode)
    stats: list[Stage] = []
    clock = _Timer(stats)

    binz = binarize_ex(g, objectives)
    work, objs = binz.game, list(binz.objectives)
    lifts = [("binarize", binz)]
    clock.done("binarize", work.n_states, actions=work.n_actions)

    if mode == "parity" and all(isinstance(o, Reach) for o in objs):
        aug, prios, origin, _ = reach_to_parity(work, [o.targets for o in objs])
        lifts.append(("augment", (work, origin)))
        work, objs = aug, [Parity(p) for p in prios]
        clock.done("augment", work.n_states)

    pg = build_pcp(work, objs, max_states=max_states)
    clock.done("pcp", pg.n, **pcp_mod.size_report(pg))
    if not pcp_mod.size_bounds_hold(pg):
        raise AssertionError("pcp size bound violated")

    if mode == "reach-fast":
        prod = observer.build_reach_observer_product(pg, limit=max_states)
    else:
        prod = observer.build_parity_observer_product(pg, limit=max_states)
    clock.done("observer", prod.n, pairs=len(prod.pairs),
               observer_states=len(prod.observer_states()))

    pc = one_prover.merge_provers(prod)
    clock.done("one-prover", prod.n, classes=len(pc.classes))

    if mode == "reach-fast":
        nsw = knowledge.ObserverNSW(prod.arena, prod.pairs, observer_split, observer_join)
    else:
        nsw = knowledge.build_streett_aut(prod.arena, prod.pairs)
    dpa = knowledge.determinize_complement(nsw, max_states)
    kg = knowledge.build_knowledge_game(prod.arena, dpa, max_states, fun_owner=P2,
                                        full_functions=full_functions, max_letters=max_letters)
    clock.done("knowledge", kg.n, dpa_states=dpa.n)

    raw = kg.parity_arena()
    arena = ParityArena(raw.owner, raw.succ, compress_priorities(raw.priority))
    res = solve(arena)
    answer = "YES" if 0 in res.region[0] else "NO"
    clock.done("solve", arena.n, winning=len(res.region[0]))

    artifacts = {"pcp": pg, "product": prod, "pc": pc, "kg": kg, "result": res, "lifts": lifts,
                 "work": work}
    strat = None
    if answer == "YES" and extract:
        inner = extract_strategy(res, kg, pc, pg)
        strat = lift_strategy(inner, lifts, g)
        problems = strat.check()
        if problems:
            raise AssertionError("extracted strategy is malformed: " + "; ".join(problems))
        clock.done("extract", len(strat.memory))
    return Verdict(answer, strat, stats, mode, artifacts)


# -- strategy extraction ---------------------------------------------------------

def _only(kg, v: int) -> int:
    """The single successor of a knowledge state whose letters all coincide."""
    out = kg.succ[v]
    if len(out) != 1:
        raise AssertionError(f"knowledge state {v} has {len(out)} letters, expected one")
    return out[0][1]


def _via(kg, v: int, o) -> int | None:
    for (oo, _), w in kg.succ[v]:
        if oo == o:
            return w
    return None


def _realizes(kg, v: int, letter, b) -> bool:
    f = dict(letter[1][1])
    return any(f.get(u) == ("act", b) for u in kg.keys[v][0])


def extract_strategy(res: SolveResult, kg: knowledge.KnowledgeGame, pc: one_prover.PCGame,
                     pg: PcpGame) -> MealyStrategy:
    """Observation-based player-0 strategy read off the knowledge game.

    Memory states are the knowledge states over G-states.  At player-0 states
    the winning letter gives the output.  An environment step ``(v, b)`` runs
    through the proposal, the function action and the gain adjustment; the
    function action is the winning one when it plays ``b`` somewhere, else a
    letter playing ``b`` whose successor is winning, else the constant ``b``.
    """
    g = pg.game
    game = kg.game
    win0 = res.region[0]
    strat0 = res.strategy[0]

    def g_state(v: int) -> int:
        obs = {game.obs[u] for u in kg.keys[v][0]}
        if len(obs) != 1:
            raise AssertionError(f"knowledge state {v} spans several G-states")
        return next(iter(obs))

    def choose(v: int, options: list) -> tuple:
        if v in strat0:
            for letter, w in options:
                if w == strat0[v]:
                    return letter, w
        return options[0]

    start = _only(kg, 0)
    ids = {start: 0}
    order = [start]
    update: dict[tuple[int, int], int] = {}
    outputs: dict[int, int] = {}

    def mem(v: int) -> int:
        if v not in ids:
            ids[v] = len(order)
            order.append(v)
        return ids[v]

    k = 0
    while k < len(order):
        v = order[k]
        m = k
        k += 1
        s = g_state(v)
        if g.owner[s] == 0:
            letter, w = choose(v, kg.succ[v])
            b = letter[1]
            if g.delta(s, b) is None:
                raise AssertionError(f"chosen letter {letter!r} is not a player-0 action")
            outputs[m] = b
            update[(m, b)] = mem(w)
            continue
        v1 = _only(kg, v)
        for b, t in g.succ(s):
            options = [(letter, w) for letter, w in kg.succ[v1] if _realizes(kg, v1, letter, b)]
            if not options:
                raise AssertionError(f"no function action plays {g.action_names[b]}")
            pick = None
            if v1 in strat0:
                pick = next((x for x in options if x[1] == strat0[v1]), None)
            if pick is None:
                pick = next((x for x in options if x[1] in win0), None)
            if pick is None:
                pick = next((x for x in options
                             if all(a == ("act", b) for _, a in x[0][1][1])), options[0])
            v3 = _via(kg, pick[1], t)
            if v3 is None:
                raise AssertionError("function action successor misses the target observation")
            update[(m, b)] = mem(v3)

    memory = []
    for m, v in enumerate(order):
        s = g_state(v)
        U = tuple(sorted({_render(pg, game.keys[u]) for u in kg.keys[v][0]}))
        memory.append(MemoryState(m, s, U, kg.keys[v][1], "P1" if g.owner[s] == 0 else "C",
                                  outputs.get(m)))
    return MealyStrategy(g, memory, 0, update)


def _render(pg: PcpGame, key) -> str:
    k, q = key
    return f"{pcp_mod.state_label(pg.game, k)}{list(q)}"


def lift_strategy(strat: MealyStrategy, lifts: list, original: GameStructure) -> MealyStrategy:
    """Undo visited-bit augmentation and binarization, innermost first."""
    for kind, data in reversed(lifts):
        if kind == "augment":
            base, origin = data
            strat = _lift_augment(strat, base, origin)
        else:
            strat = _lift_binarize(strat, data, original)
    return strat


def _lift_augment(strat: MealyStrategy, base: GameStructure, origin) -> MealyStrategy:
    memory = [MemoryState(m.id, origin[m.state], m.U, m.q, m.owner, m.output) for m in strat.memory]
    return MealyStrategy(base, memory, strat.initial, dict(strat.update))


def _lift_binarize(strat: MealyStrategy, binz, g: GameStructure) -> MealyStrategy:
    gb = binz.game
    # original action -> its path of binarized actions from the root
    paths: dict[tuple[int, int], list[int]] = {}
    for s in range(g.n_states):
        stack = [(s, [])]
        while stack:
            x, path = stack.pop()
            for a, t in gb.succ(x):
                if t in binz.internal:
                    stack.append((t, path + [a]))
                else:
                    paths[(s, g.action_id(gb.action_names[a]))] = path + [a]
    keep = [m for m in strat.memory if m.state not in binz.internal]
    new_id = {m.id: k for k, m in enumerate(keep)}
    memory = []
    update = {}
    for m in keep:
        k = new_id[m.id]
        out = None
        if g.owner[m.state] == 0:
            cur = m.id
            for _ in range(gb.n_states):
                a = strat.memory[cur].output
                cur = strat.update[(cur, a)]
                if strat.memory[cur].state not in binz.internal:
                    out = g.action_id(gb.action_names[a])
                    break
        memory.append(MemoryState(k, m.state, m.U, m.q, m.owner, out))
        for b in g.actions_at(m.state):
            cur = m.id
            for a in paths[(m.state, b)]:
                cur = strat.update.get((cur, a))
                if cur is None:
                    break
            if cur is not None:
                update[(k, b)] = new_id[cur]
    return MealyStrategy(g, memory, new_id[strat.initial], update)


# -- exports ---------------------------------------------------------------------

def export_dot(verdict: Verdict, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    a = verdict.artifacts
    kg = a["kg"]
    res = a["result"]
    files = {
        "01-pcp.dot": pcp_mod.to_dot(a["pcp"]),
        "02-observer.dot": observer.to_dot(a["product"]),
        "03-one-prover.dot": _pc_dot(a["pc"]),
        "04-knowledge.dot": _kg_dot(kg, None),
        "05-final.dot": _kg_dot(kg, res),
    }
    paths = []
    for name, text in files.items():
        p = os.path.join(out_dir, name)
        with open(p, "w") as fh:
            fh.write(text)
        paths.append(p)
    return paths


def _pc_dot(pc: one_prover.PCGame) -> str:
    g = pc.prod.pcp.game
    arena = pc.arena
    lines = ["digraph onepro {", "  rankdir=LR;"]
    for v, (k, q) in enumerate(arena.keys):
        shape = "box" if pc.owner(v) == "C" else "circle"
        lines.append(f'  n{v} [shape={shape},label="{pcp_mod.state_label(g, k)} {q}"];')
    for v, a, w in arena.edges():
        label = pcp_mod.action_label(g, a)
        if arena.owner[v] == P2:
            label = f"f:{label}"
        lines.append(f'  n{v} -> n{w} [label="{label}"];')
    for o, vs in sorted(pc.classes.items(), key=repr):
        lines.append(f'  // class {o}: {list(vs)}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _kg_dot(kg: knowledge.KnowledgeGame, res: SolveResult | None) -> str:
    lines = ["digraph knowledge {", "  rankdir=LR;"]
    for v, (U, q) in enumerate(kg.keys):
        shape = "box" if kg.owner[v] == "C" else "circle"
        color = ""
        if res is not None:
            color = ',style=filled,fillcolor="{}"'.format("palegreen" if v in res.region[0] else "lightpink")
        lines.append(f'  n{v} [shape={shape},label="{len(U)} states, q{q}, p{kg.priority(v)}"{color}];')
    for v, out in enumerate(kg.succ):
        for letter, w in out:
            o, ob = letter
            tag = "f" if isinstance(ob, tuple) else ("#" if ob == HIDDEN else str(ob))
            bold = ""
            if res is not None and res.strategy[0].get(v) == w:
                bold = ",penwidth=2"
            lines.append(f'  n{v} -> n{w} [label="{o}/{tag}"{bold}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def strategy_summary(g: GameStructure, strat: MealyStrategy) -> list[str]:
    out = []
    for m in strat.memory:
        if m.output is not None:
            out.append(f"memory {m.id} at {g.state_names[m.state]}: play {g.action_names[m.output]}")
    return out


__all__ = ["Verdict", "solve_spe_ncrs", "extract_strategy", "lift_strategy", "export_dot",
           "strategy_summary", "SizeGuard", "MODES", "P1"]
