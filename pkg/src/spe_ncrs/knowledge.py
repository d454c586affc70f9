"""Removing imperfect information.

Pipeline: a nondeterministic Streett automaton reads observation letters
``(o, obar)``; it is turned into a Buchi automaton by guessing the pairs whose
F-set is avoided and cycling through the E-sets of the others; a Safra style
tree construction makes it deterministic and a shift of priorities complements
it.  The knowledge game is the subset construction of the merged game in
product with that deterministic automaton.

Letters are ``(o, obar)`` where ``obar`` is the observation of a visible
action, ``HIDDEN`` for challenger moves, or ``("f", ((s, a), ...))`` for a
function action given by its graph over the current knowledge set.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .arena import LassoPlay
from .graphs import is_nontrivial, sccs
from .igame import HIDDEN, ExplicitGame, SizeGuard
from .parity_solver import ParityArena

Letter = tuple
NO_EVENT = 2 ** 30 + 1   # priority of a Safra step without events


# -- Streett automata ----------------------------------------------------------

class StreettAutomaton:
    """Nondeterministic Streett automaton given by a successor function."""

    initial: Hashable
    pairs: list[tuple[frozenset, frozenset]]

    def post(self, s: Hashable, letter: Letter) -> Iterable[Hashable]:
        raise NotImplementedError


@dataclass
class ExplicitNSW(StreettAutomaton):
    initial: Hashable
    edges: dict[tuple[Hashable, Letter], frozenset]
    pairs: list[tuple[frozenset, frozenset]]
    alphabet: tuple = ()

    def post(self, s, letter):
        return self.edges.get((s, letter), ())

    def states(self) -> set:
        out = {self.initial}
        for (s, _), ts in self.edges.items():
            out.add(s)
            out |= ts
        return out

    def dumps(self) -> str:
        return "\n".join(f"{s} {letter} {t}" for (s, letter), ts in sorted(
            self.edges.items(), key=repr) for t in sorted(ts, key=repr)) + "\n"


def _fun_target(game: ExplicitGame, s: int, f) -> int | None:
    for u, a in f:
        if u == s:
            return game.delta(s, a)
    return None


class GameNSW(StreettAutomaton):
    """States are the states of an imperfect-information game; runs follow the
    game's edges whose observation matches the letter."""

    def __init__(self, game: ExplicitGame, pairs: Sequence[tuple[int, int]]):
        self.game = game
        self.initial = game.initial
        self.pairs = [(_set_of(e, game.n), _set_of(f, game.n)) for e, f in pairs]
        self._cache: dict = {}

    def post(self, s, letter):
        key = (s, letter)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        g = self.game
        o, ob = letter
        if g.obs[s] != o:
            res = ()
        elif isinstance(ob, tuple) and ob and ob[0] == "f":
            t = _fun_target(g, s, ob[1])
            res = () if t is None else (t,)
        else:
            res = tuple(sorted({w for a, w in g.succ[s] if g.action_obs(a) == ob}))
        self._cache[key] = res
        return res


def _set_of(bits: int, n: int) -> frozenset[int]:
    return frozenset(v for v in range(n) if bits >> v & 1)


def build_streett_aut(game: ExplicitGame, pairs: Sequence[tuple[int, int]]) -> GameNSW:
    return GameNSW(game, pairs)


class ObserverNSW(StreettAutomaton):
    """Streett automaton whose states are observer states of an observer
    product: the product state with G-component ``o`` and observer state ``q``
    is recovered from the letter and ``q``.

    A letter may lead to states with different G-components (a function action
    plays different actions at different states).  Such successors carry their
    G-component as a tag for one step, and the next letter must match it.
    Automaton states are ``(q, tag)`` with ``tag`` None when untagged.
    """

    def __init__(self, game: ExplicitGame, pairs: Sequence[tuple[int, int]],
                 split: Callable[[Hashable], tuple[Hashable, Hashable]],
                 join: Callable[[Hashable, Hashable], Hashable]):
        self.game = game
        self.split = split
        self.join = join
        self.initial = (split(game.keys[game.initial])[1], None)
        member: list[dict] = [{} for _ in pairs]
        tags: dict[Hashable, set] = defaultdict(set)
        for v, k in enumerate(game.keys):
            o, q = split(k)
            tags[q].add(o)
            for x, (e, f) in enumerate(pairs):
                val = (bool(e >> v & 1), bool(f >> v & 1))
                if member[x].setdefault(q, val) != val:
                    raise ValueError("pair membership depends on the G-component")
        self.pairs = []
        for m in member:
            sides = []
            for side in (0, 1):
                qs = [q for q, val in m.items() if val[side]]
                sides.append(frozenset([(q, None) for q in qs] + [(q, o) for q in qs for o in tags[q]]))
            self.pairs.append(tuple(sides))
        self._cache: dict = {}

    def post(self, st, letter):
        key = (st, letter)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        q, tag = st
        g = self.game
        o, ob = letter
        v = None if tag is not None and tag != o else g.index.get(self.join(o, q))
        if v is None:
            res = ()
        elif isinstance(ob, tuple) and ob and ob[0] == "f":
            t = _fun_target(g, v, ob[1])
            res = () if t is None else (self._tagged(t, True),)
        else:
            ws = [w for a, w in g.succ[v] if g.action_obs(a) == ob]
            mixed = len({g.obs[w] for w in ws}) > 1
            res = tuple(sorted({self._tagged(w, mixed) for w in ws}, key=repr))
        self._cache[key] = res
        return res

    def _tagged(self, w: int, tag: bool):
        o, q = self.split(self.game.keys[w])
        return (q, o if tag else None)


# -- Streett to Buchi -------------------------------------------------------------

class StreettToBuchi:
    """Phase 1 copies the automaton; on jumping to phase 2 a set ``I`` of pairs
    is guessed whose F-sets are avoided from then on, and a counter cycles
    through the E-sets of the remaining pairs.  A phase-2 state is accepting
    when the counter completes a round."""

    def __init__(self, nsw: StreettAutomaton):
        self.nsw = nsw
        self.m = len(nsw.pairs)
        self.subsets = [frozenset(c) for r in range(self.m + 1)
                        for c in itertools.combinations(range(self.m), r)]
        self.rest = {I: tuple(j for j in range(self.m) if j not in I) for I in self.subsets}

    def _enter(self, s, I, c):
        for j in I:
            if s in self.nsw.pairs[j][1]:
                return None
        L = self.rest[I]
        if c == len(L):
            c = 0
        while c < len(L) and s in self.nsw.pairs[L[c]][0]:
            c += 1
        return ("2", s, I, c)

    def initial_states(self) -> frozenset:
        s0 = self.nsw.initial
        out = {("1", s0)}
        for I in self.subsets:
            st = self._enter(s0, I, len(self.rest[I]))
            if st is not None:
                out.add(st)
        return frozenset(out)

    def post(self, st, letter) -> set:
        out = set()
        if st[0] == "1":
            for t in self.nsw.post(st[1], letter):
                out.add(("1", t))
                for I in self.subsets:
                    x = self._enter(t, I, len(self.rest[I]))
                    if x is not None:
                        out.add(x)
        else:
            _, s, I, c = st
            for t in self.nsw.post(s, letter):
                x = self._enter(t, I, c)
                if x is not None:
                    out.add(x)
        return out

    def accepting(self, st) -> bool:
        return st[0] == "2" and st[3] == len(self.rest[st[2]])


# -- Safra trees -------------------------------------------------------------------

@dataclass
class DetParityAutomaton:
    """Deterministic min-parity automaton built lazily from a Buchi automaton.

    States are integers; ``trees[q]`` is the canonical Safra tree (tuple of
    ``(parent rank, label)`` in age order) and ``prio[q]`` the priority of the
    step that entered ``q``.  With ``complement`` every priority is shifted by
    one, which accepts exactly the words the Buchi automaton rejects.
    """

    nba: StreettToBuchi
    complement: bool = True
    max_states: int | None = None
    trees: list = field(default_factory=list)
    prio: list[int] = field(default_factory=list)
    index: dict = field(default_factory=dict)
    delta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._post: dict = {}
        self.none_prio = NO_EVENT
        root = self.nba.initial_states()
        tree = ((-1, root),) if root else ()
        self.initial = self._intern(tree, self.none_prio if tree else 1)

    @property
    def n(self) -> int:
        return len(self.trees)

    def _intern(self, tree, p) -> int:
        key = (tree, p)
        q = self.index.get(key)
        if q is None:
            if self.max_states is not None and len(self.trees) >= self.max_states:
                raise SizeGuard("parity automaton", self.max_states)
            q = len(self.trees)
            self.index[key] = q
            self.trees.append(tree)
            self.prio.append(p)
        return q

    def priority(self, q: int) -> int:
        p = self.prio[q]
        return p + 1 if self.complement else p

    def _succ_set(self, label, letter):
        out = set()
        for st in label:
            key = (st, letter)
            hit = self._post.get(key)
            if hit is None:
                hit = frozenset(self.nba.post(st, letter))
                self._post[key] = hit
            out |= hit
        return out

    def step(self, q: int, letter) -> int:
        key = (q, letter)
        hit = self.delta.get(key)
        if hit is not None:
            return hit
        tree = self.trees[q]
        if not tree:
            r = q
        else:
            new_tree, p = self._safra(tree, letter)
            r = self._intern(new_tree, p if new_tree else 1)
        self.delta[key] = r
        return r

    def _safra(self, tree, letter):
        parent = [p for p, _ in tree]
        label = [self._succ_set(lab, letter) for _, lab in tree]
        # spawn children holding the accepting states
        for r in range(len(tree)):
            acc = {s for s in label[r] if self.nba.accepting(s)}
            if acc:
                parent.append(r)
                label.append(acc)
        n = len(parent)
        children: list[list[int]] = [[] for _ in range(n)]
        for r in range(1, n):
            children[parent[r]].append(r)
        # horizontal merge: older siblings keep shared states

        def restrict(r, allowed):
            label[r] &= allowed
            taken: set = set()
            for c in children[r]:
                restrict(c, label[r] - taken)
                taken |= label[c]

        restrict(0, set(label[0]))
        alive = [bool(label[r]) for r in range(n)]
        removed = [r for r in range(n) if not alive[r] and r < len(tree)]
        # vertical merge
        green = []
        for r in range(n):
            if not alive[r]:
                continue
            kids = [c for c in children[r] if alive[c]]
            if kids and set().union(*(label[c] for c in kids)) == label[r]:
                green.append(r)
                stack = list(kids)
                while stack:
                    c = stack.pop()
                    if alive[c]:
                        alive[c] = False
                        if c < len(tree):
                            removed.append(c)
                    stack.extend(children[c])
        if not alive[0]:
            return (), 1
        ranks = {}
        out = []
        for r in range(n):
            if alive[r]:
                ranks[r] = len(out)
                out.append((ranks[parent[r]] if r else -1, frozenset(label[r])))
        p = self.none_prio
        for r in removed:
            p = min(p, 2 * r + 1)
        for r in green:
            if alive[r]:
                p = min(p, 2 * ranks[r] + 2)
        return tuple(out), p

    def run_lasso(self, prefix: Sequence, cycle: Sequence) -> bool:
        q = self.initial
        for x in prefix:
            q = self.step(q, x)
        seen: dict[tuple[int, int], int] = {}
        prios: list[int] = []
        k = 0
        while (q, k) not in seen:
            seen[(q, k)] = len(prios)
            q = self.step(q, cycle[k])
            prios.append(self.priority(q))
            k = (k + 1) % len(cycle)
        return min(prios[seen[(q, k)]:]) % 2 == 0

    def dumps(self) -> str:
        return "\n".join(f"{q} {letter!r} {r} {self.priority(r)}"
                         for (q, letter), r in self.delta.items()) + "\n"


def determinize_complement(nsw: StreettAutomaton, max_states: int | None = None) -> DetParityAutomaton:
    return DetParityAutomaton(StreettToBuchi(nsw), True, max_states)


# -- lasso membership oracle ---------------------------------------------------------

def lasso_membership_nsw(nsw: StreettAutomaton, prefix: Sequence, cycle: Sequence) -> bool:
    """Does some run on ``prefix . cycle^omega`` satisfy the Streett condition?"""
    word = list(prefix) + list(cycle)
    n = len(word)
    loop = len(prefix)

    def nxt(k):
        return k + 1 if k + 1 < n else loop

    start = (nsw.initial, 0)
    index = {start: 0}
    nodes = [start]
    adj: list[list[int]] = []
    k = 0
    while k < len(nodes):
        s, pos = nodes[k]
        k += 1
        out = []
        for t in nsw.post(s, word[pos]):
            key = (t, nxt(pos))
            if key not in index:
                index[key] = len(nodes)
                nodes.append(key)
            out.append(index[key])
        adj.append(out)
    state = [s for s, _ in nodes]
    pairs = nsw.pairs

    def good(comp: list[int]) -> bool:
        inside = set(comp)
        sts = {state[v] for v in comp}
        bad = [j for j, (e, f) in enumerate(pairs) if not (sts & e) and (sts & f)]
        if not bad:
            return True
        drop = set().union(*(pairs[j][1] for j in bad))
        rest = [v for v in comp if state[v] not in drop]
        sub = lambda v: [w for w in adj[v] if w in inside]  # noqa: E731
        for c in sccs(rest, sub):
            if is_nontrivial(c, sub) and good(c):
                return True
        return False

    all_adj = adj.__getitem__
    for comp in sccs(range(len(nodes)), all_adj):
        if is_nontrivial(comp, all_adj) and good(comp):
            return True
    return False


# -- knowledge game -----------------------------------------------------------------

@dataclass
class KnowledgeGame:
    game: ExplicitGame
    dpa: DetParityAutomaton
    keys: list[tuple[frozenset[int], int]]
    owner: list[str]
    succ: list[list[tuple[Letter, int]]]
    index: dict

    @property
    def n(self) -> int:
        return len(self.keys)

    def priority(self, v: int) -> int:
        return self.dpa.priority(self.keys[v][1])

    def parity_arena(self) -> ParityArena:
        return ParityArena([0 if o != "C" else 1 for o in self.owner],
                           [[w for _, w in out] for out in self.succ],
                           [self.priority(v) for v in range(self.n)])

    def visibility_report(self) -> dict:
        g = self.game
        mixed_owner = [v for v, (U, _) in enumerate(self.keys) if len({g.owner[u] for u in U}) > 1]
        mixed_obs_p = [v for v, (U, _) in enumerate(self.keys)
                       if self.owner[v] != "C" and len({g.obs[u] for u in U}) > 1]
        mixed_obs_c = [v for v, (U, _) in enumerate(self.keys)
                       if self.owner[v] == "C" and len({g.obs[u] for u in U}) > 1]
        return {"states": self.n, "mixed_owner": mixed_owner,
                "mixed_obs_prover": mixed_obs_p, "mixed_obs_challenger": mixed_obs_c}

    def dumps(self) -> str:
        lines = []
        for v, out in enumerate(self.succ):
            for letter, w in out:
                lines.append(f"{v} {letter!r} {w} {self.priority(w)}")
        return "\n".join(lines) + "\n"


def letters_of(game: ExplicitGame, U: frozenset[int], fun_owner: str = "P2",
               max_letters: int = 100_000,
               fun_domain: Callable[[Hashable], Sequence[int]] | None = None
               ) -> list[tuple[Letter, frozenset[int]]]:
    """Letters available at knowledge set ``U`` with the successor set of each.

    Function actions range over maps on the states of ``U`` with the letter's
    observation; ``fun_domain(o)`` widens the domain to a fixed superset
    (the whole observation class) for the unquotiented semantics.
    """
    owners = {game.owner[u] for u in U}
    if len(owners) != 1:
        raise ValueError(f"knowledge set with mixed owners {sorted(owners)}")
    owner = owners.pop()
    res: list[tuple[Letter, frozenset[int]]] = []
    if owner == fun_owner:
        by_obs: dict[Hashable, list[int]] = defaultdict(list)
        for u in sorted(U):
            by_obs[game.obs[u]].append(u)
        for o in sorted(by_obs, key=repr):
            here = by_obs[o]
            dom = here if fun_domain is None else sorted(fun_domain(o))
            choices = [[a for a, _ in game.succ[u]] for u in dom]
            total = 1
            for c in choices:
                total *= len(c)
            if total > max_letters:
                raise SizeGuard("function actions", max_letters)
            for combo in itertools.product(*choices):
                f = tuple(zip(dom, combo))
                table = dict(f)
                res.append(((o, ("f", f)), frozenset(game.delta(u, table[u]) for u in here)))
        return res
    groups: dict[Letter, set[int]] = defaultdict(set)
    for u in U:
        for a, w in game.succ[u]:
            groups[(game.obs[u], game.action_obs(a))].add(w)
    for letter in sorted(groups, key=repr):
        res.append((letter, frozenset(groups[letter])))
    return res


def build_knowledge_game(game: ExplicitGame, dpa: DetParityAutomaton, max_states: int | None = None,
                         fun_owner: str = "P2", full_functions: bool = False,
                         max_letters: int = 100_000) -> KnowledgeGame:
    fun_domain = None
    if full_functions:
        classes: dict[Hashable, list[int]] = defaultdict(list)
        for v in range(game.n):
            if game.owner[v] == fun_owner:
                classes[game.obs[v]].append(v)
        fun_domain = classes.__getitem__
    start = (frozenset([game.initial]), dpa.initial)
    index = {start: 0}
    keys = [start]
    succ: list[list[tuple[Letter, int]]] = []
    k = 0
    while k < len(keys):
        U, q = keys[k]
        k += 1
        out = []
        for letter, U2 in letters_of(game, U, fun_owner, max_letters, fun_domain):
            key = (U2, dpa.step(q, letter))
            if key not in index:
                if max_states is not None and len(keys) >= max_states:
                    raise SizeGuard("knowledge game", max_states)
                index[key] = len(keys)
                keys.append(key)
            out.append((letter, index[key]))
        succ.append(out)
    owner = []
    for U, _ in keys:
        os_ = {game.owner[u] for u in U}
        owner.append("C" if os_ == {"C"} else ("P" if "C" not in os_ else "mixed"))
    return KnowledgeGame(game, dpa, keys, owner, succ, index)


def knowledge_image(kg: KnowledgeGame, history: Sequence) -> int:
    """Follow ``[s0, a0, s1, ...]`` of the underlying game; return the knowledge state."""
    g = kg.game
    v = 0
    for k in range(0, len(history) - 1, 2):
        s, a, t = history[k], history[k + 1], history[k + 2]
        found = None
        for letter, w in kg.succ[v]:
            o, ob = letter
            if o != g.obs[s]:
                continue
            if isinstance(ob, tuple) and ob and ob[0] == "f":
                if (s, a) in ob[1] and t in kg.keys[w][0]:
                    found = w
                    break
            elif ob == g.action_obs(a) and t in kg.keys[w][0]:
                found = w
                break
        if found is None:
            raise ValueError(f"history leaves the knowledge game at step {k // 2}")
        v = found
    return v


# -- a plain imperfect-information game -------------------------------------------

def imperfect_game(states: Sequence[tuple[str, str, str]], edges: Sequence[tuple[str, str, str]],
                   initial: str, hidden: Iterable[str] = ()) -> ExplicitGame:
    """Explicit game from ``(name, owner, observation)`` triples and named edges;
    actions listed in ``hidden`` are observed as ``HIDDEN``."""
    hidden = set(hidden)
    names = [s for s, _, _ in states]
    pos = {s: k for k, s in enumerate(names)}
    order = [pos[initial]] + [k for k in range(len(names)) if k != pos[initial]]
    ren = {old: new for new, old in enumerate(order)}
    keys = [names[k] for k in order]
    succ: list[list[tuple[Hashable, int]]] = [[] for _ in keys]
    for s, a, t in edges:
        succ[ren[pos[s]]].append((a, ren[pos[t]]))
    return ExplicitGame(keys, [states[k][1] for k in order], succ, [states[k][2] for k in order],
                        lambda a: HIDDEN if a in hidden else a, {k: i for i, k in enumerate(keys)})


def lasso_word(game: ExplicitGame, lasso: LassoPlay) -> tuple[list, list]:
    """Observation letters of a lasso over a game (plain actions only)."""
    f = lambda st: (game.obs[st[0]], game.action_obs(st[1]))  # noqa: E731
    return [f(x) for x in lasso.prefix], [f(x) for x in lasso.cycle]
