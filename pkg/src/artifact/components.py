"""Connected components of a small edge multiset via union-find."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable


class UnionFind:
    """Disjoint sets with path halving and union by size.

    >>> uf = UnionFind()
    >>> uf.union("a", "b"); uf.union("c", "d"); uf.union("b", "c")
    >>> uf.find("a") == uf.find("d")
    True
    """

    def __init__(self):
        self.parent: dict = {}
        self.size: dict = {}

    def add(self, x) -> None:
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, a, b) -> None:
        self.add(a)
        self.add(b)
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]

    def groups(self) -> dict:
        out: dict = {}
        for x in self.parent:
            out.setdefault(self.find(x), []).append(x)
        return out


@dataclass(frozen=True)
class Component:
    id: Hashable
    nodes: tuple
    edge_count: int

    @property
    def size(self) -> int:
        return len(self.nodes)


class ComponentSet(tuple):
    """Components ordered by id; ids are the smallest member node."""

    def node_sets(self) -> list[frozenset]:
        return [frozenset(c.nodes) for c in self]

    def at_least(self, h: int) -> "ComponentSet":
        return ComponentSet(c for c in self if c.size >= h)

    def nodes(self) -> set:
        out: set = set()
        for c in self:
            out.update(c.nodes)
        return out


def recompute_components(edges: Iterable[tuple]) -> ComponentSet:
    """Exact components of the graph spanned by ``edges``.

    Parallel edges collapse; ``edge_count`` counts distinct undirected edges.
    Self-loops are ignored.
    """
    distinct = set()
    for u, v in edges:
        if u == v:
            continue
        distinct.add((u, v) if u <= v else (v, u))
    if not distinct:
        return ComponentSet()
    # union-find inlined: this runs every few edges on the window sample
    parent: dict = {}
    for u, v in distinct:
        if u not in parent:
            parent[u] = u
        if v not in parent:
            parent[v] = v
        while parent[u] != u:
            parent[u] = parent[parent[u]]
            u = parent[u]
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        if u != v:
            if v < u:
                u, v = v, u
            parent[v] = u
    members: dict = {}
    for x in parent:
        r = x
        while parent[r] != r:
            r = parent[r]
        members.setdefault(r, []).append(x)
    counts: dict = {}
    for u, _ in distinct:
        r = u
        while parent[r] != r:
            r = parent[r]
        counts[r] = counts.get(r, 0) + 1
    comps = []
    for root, nodes in members.items():
        nodes.sort()
        comps.append(Component(nodes[0], tuple(nodes), counts[root]))
    comps.sort(key=lambda c: c.id)
    return ComponentSet(comps)
