"""Simple undirected graphs with stable integer vertex ids.

Graphs are immutable: every surgery returns a new value, so a solution
computed on a subgraph can be reused verbatim on the parent graph.
"""

from __future__ import annotations

from collections import deque
from typing import Iterable, Iterator


class Graph:
    """An immutable simple undirected graph.

    Vertices are arbitrary integers. No self-loops, no parallel edges.
    """

    __slots__ = ("_adj", "_m", "_sorted")

    def __init__(self, vertices: Iterable[int] = (), edges: Iterable[tuple[int, int]] = ()):
        adj: dict[int, set[int]] = {int(v): set() for v in vertices}
        for u, v in edges:
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if u not in adj or v not in adj:
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside the vertex set")
            adj[u].add(v)
            adj[v].add(u)
        self._adj: dict[int, frozenset[int]] = {v: frozenset(ns) for v, ns in adj.items()}
        self._m = sum(len(ns) for ns in self._adj.values()) // 2
        self._sorted = tuple(sorted(self._adj))

    @classmethod
    def _from_adj(cls, adj: dict[int, frozenset[int]]) -> "Graph":
        g = cls.__new__(cls)
        g._adj = adj
        g._m = sum(len(ns) for ns in adj.values()) // 2
        g._sorted = tuple(sorted(adj))
        return g

    @classmethod
    def from_edge_list(cls, edges: Iterable[tuple[int, int]]) -> "Graph":
        """Build a graph whose vertex set is exactly the edge endpoints."""
        edges = list(edges)
        verts = {u for e in edges for u in e}
        return cls(verts, edges)

    # -- basic queries ------------------------------------------------

    @property
    def n(self) -> int:
        return len(self._adj)

    @property
    def m(self) -> int:
        return self._m

    @property
    def vertices(self) -> tuple[int, ...]:
        """Vertices in sorted order (deterministic iteration)."""
        return self._sorted

    @property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(self._adj)

    def has_vertex(self, v: int) -> bool:
        return v in self._adj

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._adj.get(u, ())

    def neighbors(self, v: int) -> frozenset[int]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return len(self._adj[v])

    def edges(self) -> Iterator[tuple[int, int]]:
        """All edges as (u, v) with u < v, in sorted order."""
        for u in self._sorted:
            for v in sorted(self._adj[u]):
                if u < v:
                    yield (u, v)

    def __eq__(self, other: object):
        if isinstance(other, Graph):
            return self._adj == other._adj
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def _require_vertices(self, s: Iterable[int]) -> frozenset[int]:
        s = frozenset(s)
        missing = s - self._adj.keys()
        if missing:
            raise ValueError(f"unknown vertices: {sorted(missing)}")
        return s

    # -- surgeries -----------------------------------------------------

    def induced_subgraph(self, s: Iterable[int]) -> "Graph":
        """The subgraph induced by the vertex set ``s``."""
        s = self._require_vertices(s)
        return Graph._from_adj({v: self._adj[v] & s for v in s})

    def remove_vertices(self, x: Iterable[int]) -> "Graph":
        """Delete the vertices in ``x`` together with their incident edges."""
        x = self._require_vertices(x)
        return self.induced_subgraph(self._adj.keys() - x)

    def delete_edges_within(self, x: Iterable[int]) -> "Graph":
        """Delete every edge with both endpoints in ``x``; vertices stay."""
        x = self._require_vertices(x)
        adj = {v: (ns - x if v in x else ns) for v, ns in self._adj.items()}
        return Graph._from_adj(adj)

    def identify_vertices(self, x: Iterable[int], z: int) -> "Graph":
        """Collapse the vertex set ``x`` into the single new vertex ``z``.

        Self-loops vanish and parallel edges merge, so the result stays
        simple. ``z`` must not collide with a surviving vertex.
        """
        x = self._require_vertices(x)
        if not x:
            raise ValueError("cannot identify an empty vertex set")
        survivors = self._adj.keys() - x
        if z in survivors:
            raise ValueError(f"replacement vertex {z} collides with a surviving vertex")
        z_nbrs = frozenset().union(*(self._adj[u] for u in x)) - x
        adj: dict[int, frozenset[int]] = {z: z_nbrs}
        for v in survivors:
            ns = self._adj[v]
            if ns & x:
                adj[v] = (ns - x) | {z}
            else:
                adj[v] = ns
        return Graph._from_adj(adj)

    # -- connectivity ---------------------------------------------------

    def connected_components(self) -> list[frozenset[int]]:
        """Maximal connected vertex sets, ordered by smallest member."""
        seen: set[int] = set()
        out: list[frozenset[int]] = []
        for start in self._sorted:
            if start in seen:
                continue
            comp = {start}
            queue = deque([start])
            while queue:
                u = queue.popleft()
                for w in self._adj[u]:
                    if w not in comp:
                        comp.add(w)
                        queue.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        start = self._sorted[0]
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in self._adj[u]:
                if w not in comp:
                    comp.add(w)
                    queue.append(w)
        return len(comp) == self.n

    def component_of(self, v: int, within: frozenset[int] | None = None) -> frozenset[int]:
        """Connected component of ``v`` in the subgraph induced by ``within``."""
        allowed = self._adj.keys() if within is None else within
        if v not in allowed:
            raise ValueError(f"vertex {v} not in the restriction set")
        comp = {v}
        queue = deque([v])
        while queue:
            u = queue.popleft()
            for w in self._adj[u]:
                if w in allowed and w not in comp:
                    comp.add(w)
                    queue.append(w)
        return frozenset(comp)
