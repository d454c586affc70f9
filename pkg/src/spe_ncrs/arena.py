"""Game structures, objectives, the text format and lasso evaluation.

States and actions are interned: user-facing names map to dense integer ids
and every internal table is indexed by those ids.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union


class GameError(ValueError):
    """Raised for malformed games; carries an optional line/column."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class GameStructure:
    """Finite turn-based arena with a deterministic partial transition function.

    The constructor only rejects nondeterminism and unknown names; the
    well-formedness conditions (deadlock-freeness, action-uniqueness, action
    ownership) are reported by :func:`validate`.
    """

    __slots__ = (
        "n_players", "state_names", "owner", "action_names", "initial",
        "_sidx", "_aidx", "_delta", "_succ", "_pred",
    )

    def __init__(self, n_players: int, states: Sequence[tuple[str, int]],
                 edges: Iterable[tuple[str, str, str]], initial: str,
                 actions: Sequence[str] | None = None):
        if n_players < 1:
            raise GameError("at least one player is required")
        self.n_players = n_players
        self.state_names = tuple(s for s, _ in states)
        self.owner = tuple(int(o) for _, o in states)
        self._sidx = {s: i for i, s in enumerate(self.state_names)}
        if len(self._sidx) != len(self.state_names):
            raise GameError("duplicate state name")
        for o in self.owner:
            if not 0 <= o < n_players:
                raise GameError(f"owner {o} is not a player")
        edges = list(edges)
        names: list[str] = list(actions) if actions is not None else []
        seen = set(names)
        for _, a, _ in edges:
            if a not in seen:
                seen.add(a)
                names.append(a)
        if actions is None:
            names.sort()
        self.action_names = tuple(names)
        self._aidx = {a: i for i, a in enumerate(self.action_names)}
        delta: dict[tuple[int, int], int] = {}
        for s, a, t in edges:
            for n in (s, t):
                if n not in self._sidx:
                    raise GameError(f"undeclared state {n!r}")
            key = (self._sidx[s], self._aidx[a])
            if key in delta:
                raise GameError(f"duplicate edge {s} {a}")
            delta[key] = self._sidx[t]
        self._delta = delta
        succ: list[list[tuple[int, int]]] = [[] for _ in self.state_names]
        pred: list[list[tuple[int, int]]] = [[] for _ in self.state_names]
        for (s, a), t in sorted(delta.items()):
            succ[s].append((a, t))
            pred[t].append((s, a))
        self._succ = tuple(tuple(x) for x in succ)
        self._pred = tuple(tuple(x) for x in pred)
        if initial not in self._sidx:
            raise GameError(f"undeclared initial state {initial!r}")
        self.initial = self._sidx[initial]

    # -- lookups ----------------------------------------------------------
    @property
    def n_states(self) -> int:
        return len(self.state_names)

    @property
    def n_actions(self) -> int:
        return len(self.action_names)

    @property
    def players(self) -> range:
        return range(self.n_players)

    def state_id(self, name: str) -> int:
        try:
            return self._sidx[name]
        except KeyError:
            raise GameError(f"undeclared state {name!r}") from None

    def action_id(self, name: str) -> int:
        try:
            return self._aidx[name]
        except KeyError:
            raise GameError(f"undeclared action {name!r}") from None

    def delta(self, s: int, a: int) -> int | None:
        return self._delta.get((s, a))

    def succ(self, s: int) -> tuple[tuple[int, int], ...]:
        """(action, target) pairs out of ``s``, ordered by action id."""
        return self._succ[s]

    def pred(self, s: int) -> tuple[tuple[int, int], ...]:
        return self._pred[s]

    def actions_at(self, s: int) -> tuple[int, ...]:
        return tuple(a for a, _ in self._succ[s])

    def edges(self):
        for (s, a), t in sorted(self._delta.items()):
            yield s, a, t

    def action_owners(self, a: int) -> frozenset[int]:
        return frozenset(self.owner[s] for (s, b) in self._delta if b == a)

    def states_of(self, player: int) -> list[int]:
        return [s for s in range(self.n_states) if self.owner[s] == player]

    def actions_of(self, player: int) -> frozenset[int]:
        return frozenset(a for (s, a) in self._delta if self.owner[s] == player)

    def __repr__(self) -> str:
        return (f"GameStructure(players={self.n_players}, states={self.n_states}, "
                f"actions={self.n_actions}, edges={len(self._delta)})")


# -- objectives --------------------------------------------------------------

@dataclass(frozen=True)
class Reach:
    targets: frozenset[int]


@dataclass(frozen=True)
class Parity:
    priority: tuple[int, ...]


@dataclass(frozen=True)
class Rabin:
    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]


@dataclass(frozen=True)
class Streett:
    pairs: tuple[tuple[frozenset[int], frozenset[int]], ...]


Objective = Union[Reach, Parity, Rabin, Streett]


# -- lassos -------------------------------------------------------------------

Step = tuple[int, int]  # (state, action)


@dataclass(frozen=True)
class LassoPlay:
    """An ultimately periodic play ``prefix . cycle^omega`` as (state, action) steps."""

    prefix: tuple[Step, ...]
    cycle: tuple[Step, ...]

    def states(self) -> list[int]:
        return [s for s, _ in self.prefix] + [s for s, _ in self.cycle]

    def cycle_states(self) -> set[int]:
        return {s for s, _ in self.cycle}

    def check(self, g: GameStructure, start: int | None = None) -> None:
        if not self.cycle:
            raise GameError("lasso cycle must be nonempty")
        steps = self.prefix + self.cycle
        if start is not None and steps[0][0] != start:
            raise GameError("lasso does not start at the expected state")
        for i, (s, a) in enumerate(steps):
            t = g.delta(s, a)
            if t is None:
                raise GameError(f"undefined transition at step {i}")
            nxt = steps[i + 1][0] if i + 1 < len(steps) else self.cycle[0][0]
            if t != nxt:
                raise GameError(f"lasso broken at step {i}")

    def canonical(self) -> "LassoPlay":
        """Shortest prefix, primitive cycle rotated to its least rotation.

        Rotating the cycle may require unrolling part of it into the prefix,
        so the result is the least-rotation form with the shortest prefix that
        admits it.
        """
        prefix, cycle = list(self.prefix), list(self.cycle)
        while prefix and prefix[-1] == cycle[-1]:
            cycle = [prefix.pop()] + cycle[:-1]
        n = len(cycle)
        for d in range(1, n + 1):
            if n % d == 0 and cycle == cycle[:d] * (n // d):
                cycle = cycle[:d]
                break
        n = len(cycle)
        best = min(range(n), key=lambda r: cycle[r:] + cycle[:r])
        return LassoPlay(tuple(prefix + cycle[:best]), tuple(cycle[best:] + cycle[:best]))

    def same_play(self, other: "LassoPlay") -> bool:
        a, b = self.canonical(), other.canonical()
        return a == b


def evaluate_lasso(play: LassoPlay, objective: Objective) -> bool:
    if not play.cycle:
        raise GameError("lasso cycle must be nonempty")
    inf = play.cycle_states()
    if isinstance(objective, Reach):
        return any(s in objective.targets for s in play.states())
    if isinstance(objective, Parity):
        return min(objective.priority[s] for s in inf) % 2 == 0
    if isinstance(objective, Rabin):
        return _rabin(inf, objective.pairs)
    if isinstance(objective, Streett):
        return not _rabin(inf, objective.pairs)
    raise TypeError(f"unknown objective {objective!r}")


def _rabin(inf: set[int], pairs) -> bool:
    return any(not (inf & e) and (inf & f) for e, f in pairs)


# -- validation ---------------------------------------------------------------

def validate(g: GameStructure) -> list[str]:
    out = []
    for s in range(g.n_states):
        succ = g.succ(s)
        if not succ:
            out.append(f"deadlock: state {g.state_names[s]} has no outgoing action")
        targets: dict[int, int] = {}
        for a, t in succ:
            if t in targets:
                out.append(
                    f"action-unique: state {g.state_names[s]} reaches "
                    f"{g.state_names[t]} by {g.action_names[targets[t]]} and {g.action_names[a]}")
            else:
                targets[t] = a
    for a in range(g.n_actions):
        owners = g.action_owners(a)
        if 0 in owners and len(owners) > 1:
            others = ",".join(str(o) for o in sorted(owners - {0}))
            out.append(f"disjointness: action {g.action_names[a]} owned by player 0 and {others}")
    return out


# -- text format --------------------------------------------------------------

_TOKEN = re.compile(r"\S+")


def parse_game(text: str) -> tuple[GameStructure, list[Objective]]:
    n_players = None
    states: list[tuple[str, int]] = []
    state_pos: dict[str, tuple[int, int]] = {}
    edges: list[tuple[str, str, str]] = []
    edge_pos: list[tuple[int, int]] = []
    init = None
    objectives: dict[int, tuple[list, int]] = {}

    def need(tokens, k, line):
        if len(tokens) < k:
            last = tokens[-1]
            raise GameError(f"expected more tokens after {last.group()!r}", line, last.end() + 1)

    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0]
        tokens = list(_TOKEN.finditer(body))
        if not tokens:
            continue
        head = tokens[0].group()
        col = lambda k: tokens[k].start() + 1  # noqa: E731
        if head == "players":
            need(tokens, 2, lineno)
            if len(tokens) > 2:
                raise GameError("unexpected token", lineno, col(2))
            if n_players is not None:
                raise GameError("players declared twice", lineno, col(0))
            try:
                n_players = int(tokens[1].group())
            except ValueError:
                raise GameError("player count must be an integer", lineno, col(1)) from None
            if n_players < 1:
                raise GameError("player count must be positive", lineno, col(1))
        elif head == "state":
            need(tokens, 4, lineno)
            if len(tokens) > 4:
                raise GameError("unexpected token", lineno, col(4))
            if tokens[2].group() != "owner":
                raise GameError("expected 'owner'", lineno, col(2))
            name = tokens[1].group()
            if name in state_pos:
                raise GameError(f"duplicate state {name!r}", lineno, col(1))
            try:
                owner = int(tokens[3].group())
            except ValueError:
                raise GameError("owner must be an integer", lineno, col(3)) from None
            if n_players is None:
                raise GameError("'players' must precede states", lineno, col(0))
            if not 0 <= owner < n_players:
                raise GameError(f"unknown player {owner}", lineno, col(3))
            states.append((name, owner))
            state_pos[name] = (lineno, col(1))
        elif head == "init":
            need(tokens, 2, lineno)
            if len(tokens) > 2:
                raise GameError("unexpected token", lineno, col(2))
            if init is not None:
                raise GameError("init declared twice", lineno, col(0))
            init = (tokens[1].group(), lineno, col(1))
        elif head == "edge":
            need(tokens, 4, lineno)
            if len(tokens) > 4:
                raise GameError("unexpected token", lineno, col(4))
            edges.append((tokens[1].group(), tokens[2].group(), tokens[3].group()))
            edge_pos.append((lineno, col(1)))
        elif head == "objective":
            need(tokens, 3, lineno)
            try:
                player = int(tokens[1].group())
            except ValueError:
                raise GameError("player must be an integer", lineno, col(1)) from None
            if n_players is None or not 0 <= player < n_players:
                raise GameError(f"objective for unknown player {player}", lineno, col(1))
            if player in objectives:
                raise GameError(f"second objective for player {player}", lineno, col(0))
            kind = tokens[2].group()
            if kind not in ("reach", "parity"):
                raise GameError(f"unknown objective kind {kind!r}", lineno, col(2))
            objectives[player] = ([kind] + [(t.group(), t.start() + 1) for t in tokens[3:]], lineno)
        else:
            raise GameError(f"unknown directive {head!r}", lineno, col(0))

    if n_players is None:
        raise GameError("missing 'players' declaration")
    if init is None:
        raise GameError("missing 'init' declaration")
    for (s, a, t), (ln, c) in zip(edges, edge_pos):
        for n in (s, t):
            if n not in state_pos:
                raise GameError(f"undeclared state {n!r}", ln, c)
    seen = set()
    for (s, a, t), (ln, c) in zip(edges, edge_pos):
        if (s, a) in seen:
            raise GameError(f"duplicate edge {s} {a}", ln, c)
        seen.add((s, a))
    owners_of: dict[str, set[int]] = {}
    owner_map = dict(states)
    for (s, a, t), (ln, c) in zip(edges, edge_pos):
        owners_of.setdefault(a, set()).add(owner_map[s])
        if len(owners_of[a]) > 1:
            raise GameError(f"action {a!r} used by several players", ln, c)
    if init[0] not in state_pos:
        raise GameError(f"undeclared state {init[0]!r}", init[1], init[2])
    g = GameStructure(n_players, states, edges, init[0])

    objs: list[Objective] = []
    for p in range(n_players):
        if p not in objectives:
            raise GameError(f"missing objective for player {p}")
        entry, ln = objectives[p]
        kind, items = entry[0], entry[1:]
        if kind == "reach":
            tgt = set()
            for name, c in items:
                if name not in state_pos:
                    raise GameError(f"undeclared state {name!r}", ln, c)
                tgt.add(g.state_id(name))
            objs.append(Reach(frozenset(tgt)))
        else:
            prio: dict[int, int] = {}
            for item, c in items:
                name, sep, val = item.rpartition(":")
                if not sep or not name:
                    raise GameError(f"expected state:priority, got {item!r}", ln, c)
                if name not in state_pos:
                    raise GameError(f"undeclared state {name!r}", ln, c)
                try:
                    pv = int(val)
                except ValueError:
                    raise GameError(f"priority must be an integer in {item!r}", ln, c) from None
                if pv < 0:
                    raise GameError("priorities must be nonnegative", ln, c)
                sid = g.state_id(name)
                if sid in prio:
                    raise GameError(f"priority for {name!r} given twice", ln, c)
                prio[sid] = pv
            missing = [g.state_names[s] for s in range(g.n_states) if s not in prio]
            if missing:
                raise GameError(f"priority map of player {p} misses {', '.join(missing)}", ln)
            objs.append(Parity(tuple(prio[s] for s in range(g.n_states))))
    problems = validate(g)
    if problems:
        raise GameError("; ".join(problems))
    return g, objs


def format_game(g: GameStructure, objectives: Sequence[Objective]) -> str:
    lines = [f"players {g.n_players}"]
    for s in range(g.n_states):
        lines.append(f"state {g.state_names[s]} owner {g.owner[s]}")
    lines.append(f"init {g.state_names[g.initial]}")
    for s, a, t in g.edges():
        lines.append(f"edge {g.state_names[s]} {g.action_names[a]} {g.state_names[t]}")
    for p, o in enumerate(objectives):
        if isinstance(o, Reach):
            names = " ".join(g.state_names[s] for s in sorted(o.targets))
            lines.append(f"objective {p} reach {names}".rstrip())
        elif isinstance(o, Parity):
            items = " ".join(f"{g.state_names[s]}:{o.priority[s]}" for s in range(g.n_states))
            lines.append(f"objective {p} parity {items}")
        else:
            raise GameError("only reach and parity objectives have a text form")
    return "\n".join(lines) + "\n"


# -- transformations ----------------------------------------------------------

@dataclass(frozen=True)
class Binarized:
    game: GameStructure
    internal: frozenset[int]          # tree-internal states of the new game
    origin: tuple[int | None, ...]    # new state -> original state (None if internal)
    image: tuple[int, ...]            # original state -> new state
    objectives: tuple[Objective, ...] = field(default=())


def binarize(g: GameStructure) -> GameStructure:
    return binarize_ex(g).game


def binarize_ex(g: GameStructure, objectives: Sequence[Objective] = ()) -> Binarized:
    """Replace every fan-out above two by a complete binary tree.

    Tree-internal states belong to the owner of the root.  Leaf edges keep the
    original action names; inner tree edges use the fixed per-owner names
    ``~<owner>L`` and ``~<owner>R``.
    """
    states: list[tuple[str, int]] = [(g.state_names[s], g.owner[s]) for s in range(g.n_states)]
    edges: list[tuple[str, str, str]] = []
    origin: list[int | None] = list(range(g.n_states))

    def build(node: str, base: str, owner: int, leaves: list[tuple[int, int]], path: str):
        half = (len(leaves) + 1) // 2
        for side, part in (("L", leaves[:half]), ("R", leaves[half:])):
            if len(part) == 1:
                a, t = part[0]
                edges.append((node, g.action_names[a], g.state_names[t]))
            else:
                child = f"{base}~{path + side}"
                states.append((child, owner))
                origin.append(None)
                edges.append((node, f"~{owner}{side}", child))
                build(child, base, owner, part, path + side)

    for s in range(g.n_states):
        succ = list(g.succ(s))
        if len(succ) <= 2:
            for a, t in succ:
                edges.append((g.state_names[s], g.action_names[a], g.state_names[t]))
        else:
            build(g.state_names[s], g.state_names[s], g.owner[s], succ, "")
    names = {n for n, _ in states}
    if len(names) != len(states):
        raise GameError("binarization produced clashing state names")
    gb = GameStructure(g.n_players, states, edges, g.state_names[g.initial])
    objs = []
    for o in objectives:
        if isinstance(o, Reach):
            objs.append(Reach(frozenset(o.targets)))
        elif isinstance(o, Parity):
            # internal nodes are transient within one decision; give them the
            # root's priority so infinite visits are unaffected
            pr = list(o.priority)
            objs.append(Parity(tuple(pr[origin[s]] if origin[s] is not None
                                     else pr[_root_of(gb.state_names[s], g)] for s in range(gb.n_states))))
        else:
            raise GameError("binarize supports reach and parity objectives")
    return Binarized(gb, frozenset(s for s, o in enumerate(origin) if o is None),
                     tuple(origin), tuple(range(g.n_states)), tuple(objs))


def _root_of(name: str, g: GameStructure) -> int:
    return g.state_id(name.rsplit("~", 1)[0])


def mask_str(mask: int, n: int) -> str:
    return "".join("1" if mask >> i & 1 else "0" for i in range(n))


def reach_to_parity(g: GameStructure, targets: Sequence[frozenset[int]]):
    """Visited-bit augmentation; returns (augmented game, priority maps, origin, bits).

    Bit ``i`` of an augmented state records that ``targets[i]`` has been
    visited (the current state included).  Player ``i`` gets priority 0 where
    the bit is set and 1 elsewhere.
    """
    n = len(targets)

    def mark(s, mask):
        for i, t in enumerate(targets):
            if s in t:
                mask |= 1 << i
        return mask

    start = (g.initial, mark(g.initial, 0))
    index = {start: 0}
    order = [start]
    edges = []
    k = 0
    while k < len(order):
        s, m = order[k]
        k += 1
        for a, t in g.succ(s):
            nxt = (t, mark(t, m))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            edges.append(((s, m), a, nxt))
    name = lambda sm: f"{g.state_names[sm[0]]}|{mask_str(sm[1], n)}"  # noqa: E731
    aug = GameStructure(
        g.n_players, [(name(sm), g.owner[sm[0]]) for sm in order],
        [(name(x), g.action_names[a], name(y)) for x, a, y in edges],
        name(start), actions=g.action_names)
    prios = tuple(tuple(0 if m >> i & 1 else 1 for _, m in order) for i in range(n))
    return aug, prios, tuple(s for s, _ in order), tuple(m for _, m in order)
