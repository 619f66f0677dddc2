"""Shared graph factories and seeded random instances for the tests."""

from __future__ import annotations

import random
from itertools import combinations

from atk.graph import Graph


def path_graph(n: int, start: int = 1) -> Graph:
    vs = list(range(start, start + n))
    return Graph(vs, [(vs[i], vs[i + 1]) for i in range(n - 1)])


def cycle_graph(n: int, start: int = 1) -> Graph:
    vs = list(range(start, start + n))
    edges = [(vs[i], vs[(i + 1) % n]) for i in range(n)]
    return Graph(vs, edges)


def complete_graph(n: int, start: int = 1) -> Graph:
    vs = list(range(start, start + n))
    return Graph(vs, list(combinations(vs, 2)))


def star_graph(leaves: int, center: int = 0) -> Graph:
    vs = [center] + list(range(center + 1, center + leaves + 1))
    return Graph(vs, [(center, v) for v in vs[1:]])


def edgeless_graph(n: int, start: int = 1) -> Graph:
    return Graph(range(start, start + n))


def gnp_graph(rng: random.Random, n: int, p: float) -> Graph:
    edges = [(u, v) for u, v in combinations(range(1, n + 1), 2) if rng.random() < p]
    return Graph(range(1, n + 1), edges)


def connected_gnp_graph(rng: random.Random, n: int, p: float) -> Graph:
    """G(n, p) plus a random spanning tree, so it is always connected."""
    edges = {(u, v) for u, v in combinations(range(1, n + 1), 2) if rng.random() < p}
    order = list(range(1, n + 1))
    rng.shuffle(order)
    for i in range(1, n):
        a = order[rng.randrange(i)]
        b = order[i]
        edges.add((min(a, b), max(a, b)))
    return Graph(range(1, n + 1), sorted(edges))


def triangle_chain(count: int) -> Graph:
    """Edge-disjoint triangles sharing one vertex with the next."""
    edges = []
    vs = set()
    for i in range(count):
        a, b, c = 2 * i + 1, 2 * i + 2, 2 * i + 3
        edges += [(a, b), (b, c), (a, c)]
        vs |= {a, b, c}
    return Graph(sorted(vs), edges)
