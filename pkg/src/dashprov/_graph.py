"""Directed-graph helpers shared by layering, validation and queries."""

from __future__ import annotations

from collections import deque
from typing import Hashable, Iterable, TypeVar

N = TypeVar("N", bound=Hashable)


def adjacency(edges: Iterable[tuple[N, N]]) -> dict[N, list[N]]:
    adj: dict[N, list[N]] = {}
    for s, o in edges:
        adj.setdefault(s, []).append(o)
        adj.setdefault(o, [])
    return adj


def cyclic_components(adj: dict[N, list[N]]) -> list[list[N]]:
    """Strongly connected components that contain a cycle (Tarjan, iterative).

    Each component is sorted by ``str``; the list is sorted by first member.
    """
    index: dict[N, int] = {}
    low: dict[N, int] = {}
    on_stack: set[N] = set()
    stack: list[N] = []
    found: list[list[N]] = []
    counter = 0

    for start in adj:
        if start in index:
            continue
        work = [(start, iter(adj[start]))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            node, children = work[-1]
            advanced = False
            for child in children:
                if child not in index:
                    index[child] = low[child] = counter
                    counter += 1
                    stack.append(child)
                    on_stack.add(child)
                    work.append((child, iter(adj.get(child, ()))))
                    advanced = True
                    break
                if child in on_stack:
                    low[node] = min(low[node], index[child])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.append(member)
                    if member == node:
                        break
                if len(comp) > 1 or node in adj.get(node, ()):
                    found.append(sorted(comp, key=str))
    return sorted(found, key=lambda c: str(c[0]))


def bfs_levels(adj: dict[N, list[N]], start: N) -> dict[N, int]:
    """Shortest hop count from ``start``; neighbours are visited in ``str`` order."""
    depth = {start: 0}
    queue = deque([start])
    while queue:
        node = queue.popleft()
        for nxt in sorted(set(adj.get(node, ())), key=str):
            if nxt not in depth:
                depth[nxt] = depth[node] + 1
                queue.append(nxt)
    return depth
