"""Small graph helpers shared by the oracles and automata code."""
from __future__ import annotations

from typing import Callable, Iterable, Sequence


def sccs(nodes: Iterable[int], adj: Callable[[int], Iterable[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative; only edges between listed nodes count."""
    nodes = list(nodes)
    inside = set(nodes)
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter([w for w in adj(root) if w in inside]))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter([x for x in adj(w) if x in inside])))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def is_nontrivial(comp: Sequence[int], adj: Callable[[int], Iterable[int]]) -> bool:
    if len(comp) > 1:
        return True
    v = comp[0]
    return v in set(adj(v))


def backward_reach(targets: Iterable[int], pred: Callable[[int], Iterable[int]]) -> set[int]:
    seen = set(targets)
    stack = list(seen)
    while stack:
        w = stack.pop()
        for v in pred(w):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return seen


def forward_reach(sources: Iterable[int], succ: Callable[[int], Iterable[int]]) -> set[int]:
    return backward_reach(sources, succ)


def good_cycle_nodes(nodes: Sequence[int], adj: Callable[[int], Iterable[int]],
                     priority: Callable[[int], int], parity: int) -> set[int]:
    """Nodes lying on some cycle whose least priority has the given parity."""
    good: set[int] = set()
    prios = sorted({priority(v) for v in nodes if priority(v) % 2 == parity})
    for p in prios:
        sub = [v for v in nodes if priority(v) >= p]
        for comp in sccs(sub, adj):
            if any(priority(v) == p for v in comp) and is_nontrivial(comp, adj):
                good.update(comp)
    return good
