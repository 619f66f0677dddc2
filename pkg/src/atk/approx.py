"""Polynomial-time approximation and reduction subroutines.

These are the helpers the Turing kernels call internally: 2-approximations,
the half-integral LP reduction for vertex cover, greedy packings,
connectification for connected vertex cover, and the generic
reduce-and-lift kernel contract with its built-in instances.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Iterable, Iterator

from .errors import KernelRefusal
from .graph import Graph
from .oracles import Oracle
from .problems import CVC, ETP, VC, Solution, contains_pattern, is_feasible
from .treedecomp import TreeDecomposition

H_PACKING_PATTERN_CAP = 4


# ---------------------------------------------------------------------------
# Matchings and matching-based 2-approximations
# ---------------------------------------------------------------------------


def greedy_matching(
    g: Graph,
    within: frozenset[int] | None = None,
    stop_above: float | None = None,
) -> tuple[int, frozenset[int] | None, list[frozenset[int]] | None]:
    """Greedy maximal matching on g (restricted to ``within`` if given).

    Returns (cover_value, cover, matched_edges) where cover takes both
    endpoints of every matched edge. With ``stop_above`` set, the scan
    aborts once the cover provably exceeds it and returns (value, None,
    None); the partial value is then only a certificate of excess.
    """
    matched: set[int] = set()
    edges: list[frozenset[int]] = []
    verts = g.vertices if within is None else sorted(within)
    for u in verts:
        if u in matched:
            continue
        for v in sorted(g.neighbors(u)):
            if v in matched:
                continue
            if within is not None and v not in within:
                continue
            matched.add(u)
            matched.add(v)
            edges.append(frozenset((u, v)))
            break
        if stop_above is not None and 2 * len(edges) > stop_above:
            return 2 * len(edges), None, None
    return 2 * len(edges), frozenset(matched), edges


def vc_2approx(g: Graph) -> Solution:
    """Both endpoints of a greedy maximal matching: a 2-approximate cover."""
    _, cover, _ = greedy_matching(g)
    return Solution.of_vertices(cover)


def eds_2approx(g: Graph) -> Solution:
    """A maximal matching, which edge-dominates every edge (ratio 2)."""
    _, _, edges = greedy_matching(g)
    return Solution.of_edges(edges)


# ---------------------------------------------------------------------------
# Half-integral vertex-cover LP via the bipartite double cover
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NTPartition:
    """The {0, 1/2, 1} vertex classification of an optimal half-integral
    vertex-cover LP solution."""

    v0: frozenset[int]
    vhalf: frozenset[int]
    v1: frozenset[int]
    lp_value: Fraction


def _double_cover_matching(g: Graph) -> tuple[dict[int, int], dict[int, int]]:
    """Maximum matching of the bipartite double cover (left/right vertex copies)."""
    match_l: dict[int, int] = {}
    match_r: dict[int, int] = {}
    for u0 in g.vertices:
        visited: set[int] = set()
        parent: dict[int, int] = {}
        frames = [(u0, iter(sorted(g.neighbors(u0))))]
        end = None
        while frames:
            u, it = frames[-1]
            advanced = False
            for w in it:
                if w in visited:
                    continue
                visited.add(w)
                parent[w] = u
                nxt = match_r.get(w)
                if nxt is None:
                    end = w
                    frames.clear()
                    advanced = True
                    break
                frames.append((nxt, iter(sorted(g.neighbors(nxt)))))
                advanced = True
                break
            if not advanced:
                frames.pop()
        while end is not None:
            u = parent[end]
            prev = match_l.get(u)
            match_l[u] = end
            match_r[end] = u
            end = prev
    return match_l, match_r


def nt_reduce(g: Graph) -> NTPartition:
    """Solve the vertex-cover LP exactly over half-integral assignments.

    Koenig's theorem on the bipartite double cover yields an optimal
    half-integral solution without a numeric LP solver: a vertex scores
    half for each of its two copies inside the minimum bipartite cover.
    """
    match_l, match_r = _double_cover_matching(g)
    # Alternating reachability from unmatched left copies.
    z_left = {u for u in g.vertices if u not in match_l}
    z_right: set[int] = set()
    queue = list(sorted(z_left))
    while queue:
        u = queue.pop()
        for w in g.neighbors(u):
            if w not in z_right:
                z_right.add(w)
                owner = match_r.get(w)
                if owner is not None and owner not in z_left:
                    z_left.add(owner)
                    queue.append(owner)
    cover_left = g.vertex_set - z_left
    cover_right = frozenset(z_right)
    counts = {v: (v in cover_left) + (v in cover_right) for v in g.vertices}
    return NTPartition(
        v0=frozenset(v for v, c in counts.items() if c == 0),
        vhalf=frozenset(v for v, c in counts.items() if c == 1),
        v1=frozenset(v for v, c in counts.items() if c == 2),
        lp_value=Fraction(len(cover_left) + len(cover_right), 2),
    )


def solve_vc_small(g: Graph, oracle: Oracle, td: TreeDecomposition | None = None) -> Solution:
    """Cover g by reducing to the half-integral core and querying the oracle.

    The query graph has at most 2*OPT vertices; the answer plus the
    LP-forced vertices is a cover within the oracle's ratio of optimal.
    """
    nt = nt_reduce(g)
    sub = g.induced_subgraph(nt.vhalf)
    if sub.m == 0:
        inner: frozenset[int] = frozenset()
    else:
        sol = oracle.solve(VC, sub, td.restrict(nt.vhalf) if td is not None else None)
        if not is_feasible(VC, sub, sol):
            raise ValueError("oracle returned an infeasible vertex cover")
        inner = sol.payload
    return Solution.of_vertices(inner | nt.v1)


# ---------------------------------------------------------------------------
# Degeneracy-greedy independent set
# ---------------------------------------------------------------------------


def _degeneracy_order(g: Graph, within: frozenset[int] | None = None) -> tuple[list[int], int]:
    """Min-degree elimination order and the degeneracy of g[within]."""
    verts = g.vertices if within is None else tuple(sorted(within))
    allowed = frozenset(verts)
    deg = {v: len(g.neighbors(v) & allowed) for v in verts}
    buckets: list[set[int]] = [set() for _ in range(len(verts) + 1)]
    for v in verts:
        buckets[deg[v]].add(v)
    order: list[int] = []
    gone: set[int] = set()
    degeneracy = 0
    cursor = 0
    while len(order) < len(verts):
        while cursor < len(buckets) and not buckets[cursor]:
            cursor += 1
        v = min(buckets[cursor])
        buckets[cursor].discard(v)
        degeneracy = max(degeneracy, cursor)
        order.append(v)
        gone.add(v)
        for w in g.neighbors(v):
            if w in allowed and w not in gone:
                buckets[deg[w]].discard(w)
                deg[w] -= 1
                buckets[deg[w]].add(w)
        cursor = max(0, cursor - 1)
    return order, degeneracy


def degeneracy_is(g: Graph, within: frozenset[int] | None = None) -> Solution:
    """Greedy independent set along a degeneracy order.

    For degeneracy d the result has at least |V|/(d+1) vertices: each pick
    discards at most d still-available neighbors.
    """
    order, _ = _degeneracy_order(g, within)
    allowed = frozenset(order)
    removed: set[int] = set()
    picked: list[int] = []
    for v in order:
        if v in removed:
            continue
        picked.append(v)
        removed.add(v)
        removed |= g.neighbors(v) & allowed
    return Solution.of_vertices(picked)


# ---------------------------------------------------------------------------
# Triangle packing
# ---------------------------------------------------------------------------


def _triangles(g: Graph) -> Iterator[tuple[int, int, int]]:
    for u, v in g.edges():
        for w in sorted(g.neighbors(u) & g.neighbors(v)):
            if w > v:
                yield (u, v, w)


def greedy_triangle_packing(g: Graph) -> Solution:
    """A maximal edge-disjoint triangle packing (ratio 3)."""
    used: set[frozenset[int]] = set()
    fam: list[frozenset[int]] = []
    for a, b, c in _triangles(g):
        e1, e2, e3 = frozenset((a, b)), frozenset((a, c)), frozenset((b, c))
        if e1 in used or e2 in used or e3 in used:
            continue
        used.update((e1, e2, e3))
        fam.append(frozenset((a, b, c)))
    return Solution.of_family(fam)


def augment_triangle_packing(g: Graph, start: Solution) -> Solution:
    """Grow a packing to a fixpoint of two augmentation rules.

    Rule 1 adds any triangle whose edges are all free. Rule 2 trades one
    packed triangle for two: if uncovered vertices x != y span two of its
    edges, replace {u,v,w} by {x,u,v} and {y,v,w}. Both rules gain one
    triangle, so the loop ends within |E| iterations.
    """
    if not is_feasible(ETP, g, start):
        raise ValueError("starting family is not an edge-disjoint triangle packing")
    packing: set[frozenset[int]] = set(start.payload)
    while True:
        used_edges = {
            frozenset(p) for tri in packing for p in combinations(sorted(tri), 2)
        }
        covered = {v for tri in packing for v in tri}
        grown = False
        for a, b, c in _triangles(g):
            e1, e2, e3 = frozenset((a, b)), frozenset((a, c)), frozenset((b, c))
            if e1 not in used_edges and e2 not in used_edges and e3 not in used_edges:
                packing.add(frozenset((a, b, c)))
                grown = True
                break
        if grown:
            continue
        for tri in sorted(packing, key=lambda t: tuple(sorted(t))):
            for v_mid in sorted(tri):
                u, w = sorted(tri - {v_mid})
                xs = sorted(
                    x
                    for x in (g.neighbors(u) & g.neighbors(v_mid))
                    if x not in covered
                )
                ys = sorted(
                    y
                    for y in (g.neighbors(v_mid) & g.neighbors(w))
                    if y not in covered
                )
                pick = next(
                    ((x, y) for x in xs for y in ys if x != y), None
                )
                if pick is not None:
                    x, y = pick
                    packing.discard(tri)
                    packing.add(frozenset((x, u, v_mid)))
                    packing.add(frozenset((y, v_mid, w)))
                    grown = True
                    break
            if grown:
                break
        if not grown:
            return Solution.of_family(packing)


# ---------------------------------------------------------------------------
# Connected vertex cover helpers
# ---------------------------------------------------------------------------


def cvc_2approx(g: Graph) -> Solution:
    """Internal vertices of a DFS tree: a connected 2-approximate cover."""
    if g.m == 0:
        raise ValueError("cvc_2approx needs at least one edge")
    if not g.is_connected():
        raise ValueError("cvc_2approx needs a connected graph")
    root = g.vertices[0]
    parent: dict[int, int | None] = {root: None}
    has_child: set[int] = set()
    frames = [(root, iter(sorted(g.neighbors(root))))]
    while frames:
        u, it = frames[-1]
        advanced = False
        for w in it:
            if w not in parent:
                parent[w] = u
                has_child.add(u)
                frames.append((w, iter(sorted(g.neighbors(w)))))
                advanced = True
                break
        if not advanced:
            frames.pop()
    return Solution.of_vertices(has_child)


def connectify_vertex_cover(g: Graph, x: Iterable[int], s: Solution) -> Solution:
    """Lift a connected cover of the X-contracted graph back to g.

    Starting from (s minus the contraction vertex) plus X, repeatedly add
    the one vertex that merges two components along a shortest path. The
    result is a connected cover of size at most |s| + 2|X| containing X.
    """
    x = frozenset(x)
    if not x or not (x <= g.vertex_set):
        raise ValueError("X must be a nonempty subset of the vertices")
    if not g.is_connected():
        raise ValueError("connectify requires a connected graph")
    extra = s.payload - g.vertex_set
    if len(extra) > 1:
        raise ValueError("solution uses more than one vertex outside the graph")
    z = next(iter(extra)) if extra else max((*g.vertices, 0)) + 1
    gx = g.identify_vertices(x, z)
    if not is_feasible(CVC, gx, Solution.of_vertices(s.payload)):
        raise ValueError("not a connected vertex cover of the contracted graph")
    cover: set[int] = set(s.payload - {z}) | set(x)
    while True:
        comps = sorted(
            g.induced_subgraph(cover).connected_components(), key=min
        )
        if len(comps) <= 1:
            break
        a, b = min(comps[0]), min(comps[1])
        comp_a = comps[0]
        path = _shortest_path(g, a, b)
        for i in range(1, len(path)):
            if path[i] in cover and path[i] not in comp_a:
                cover.add(path[i - 1])
                break
    return Solution.of_vertices(cover)


def _shortest_path(g: Graph, a: int, b: int) -> list[int]:
    prev: dict[int, int | None] = {a: None}
    queue = [a]
    while queue:
        nxt: list[int] = []
        for u in queue:
            for w in sorted(g.neighbors(u)):
                if w not in prev:
                    prev[w] = u
                    if w == b:
                        path = [b]
                        while prev[path[-1]] is not None:
                            path.append(prev[path[-1]])
                        return path[::-1]
                    nxt.append(w)
        queue = nxt
    raise ValueError(f"no path between {a} and {b}")


# ---------------------------------------------------------------------------
# Feedback vertex set (local-ratio) and remaining phi-approximations
# ---------------------------------------------------------------------------


def fvs_2approx(g: Graph) -> Solution:
    """Local-ratio feedback vertex set: subtract degree-weighted layers,
    collect zero-weight vertices, then minimalize in reverse order."""
    adj: dict[int, set[int]] = {v: set(g.neighbors(v)) for v in g.vertices}
    weight: dict[int, Fraction] = {v: Fraction(1) for v in g.vertices}

    def clean() -> None:
        low = [v for v in adj if len(adj[v]) <= 1]
        while low:
            v = low.pop()
            if v not in adj or len(adj[v]) > 1:
                continue
            for w in adj[v]:
                adj[w].discard(v)
                if len(adj[w]) <= 1:
                    low.append(w)
            del adj[v]

    clean()
    picked_order: list[int] = []
    while adj:
        gamma = min(weight[v] / len(adj[v]) for v in adj)
        zeros: list[int] = []
        for v in sorted(adj):
            weight[v] -= gamma * len(adj[v])
            if weight[v] == 0:
                zeros.append(v)
        for v in zeros:
            for w in adj[v]:
                adj[w].discard(v)
            del adj[v]
        picked_order.extend(zeros)
        clean()
    chosen = set(picked_order)
    for v in reversed(picked_order):
        if _acyclic_without(g, frozenset(chosen - {v})):
            chosen.discard(v)
    return Solution.of_vertices(chosen)


def _acyclic_without(g: Graph, removed: frozenset[int]) -> bool:
    sub = g.remove_vertices(removed)
    return sub.m == sub.n - len(sub.connected_components())


def maximal_h_packing(g: Graph, h: Graph) -> Solution:
    """Greedy maximal family of vertex-disjoint copies of a small pattern.

    Copies are found by exhaustive subgraph-isomorphism over vertex tuples;
    the pattern is capped at 4 vertices and must be connected.
    """
    if h.n == 0 or h.n > H_PACKING_PATTERN_CAP:
        raise ValueError(f"pattern must have 1..{H_PACKING_PATTERN_CAP} vertices")
    if not h.is_connected():
        raise ValueError("pattern must be connected")
    used: set[int] = set()
    fam: list[frozenset[int]] = []
    for combo in combinations(g.vertices, h.n):
        cs = frozenset(combo)
        if cs & used:
            continue
        if contains_pattern(g, cs, h):
            fam.append(cs)
            used |= cs
    return Solution.of_family(fam)


def clique_cover_trivial(g: Graph) -> Solution:
    """The singleton cover; within factor (width+1) of optimal."""
    return Solution.of_family(frozenset([v]) for v in g.vertices)


# ---------------------------------------------------------------------------
# The reduce-and-lift kernel contract
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReducedInstance:
    graph: Graph
    budget: float
    lift: Callable[[Solution], Solution]


@dataclass(frozen=True)
class ApproximateKernel:
    """A reduction/solution-lifting pair with ratio alpha and size bound h.

    ``size_fn(delta, budget)`` bounds the reduced vertex count. Kernels may
    refuse over-cap inputs; refusal is a first-class signal the caller
    handles, not an error in the instance.
    """

    name: str
    ratio: float
    size_fn: Callable[[float, float], float]
    reducer: Callable[[Graph, float], ReducedInstance]

    def reduce(self, g: Graph, budget: float) -> ReducedInstance:
        return self.reducer(g, budget)


def passthrough_kernel(cap: float) -> ApproximateKernel:
    """Identity reduction guarded by a size cap (the fallback PSAKS slot)."""

    def reducer(g: Graph, budget: float) -> ReducedInstance:
        if g.n > cap:
            raise KernelRefusal(f"passthrough kernel cap {cap} exceeded by n={g.n}")
        return ReducedInstance(g, budget, lambda s: s)

    return ApproximateKernel("passthrough", 1.0, lambda d, m: cap, reducer)


def vc_nt_kernel() -> ApproximateKernel:
    """Vertex cover kernel with 2k vertices via the half-integral LP core."""

    def reducer(g: Graph, budget: float) -> ReducedInstance:
        nt = nt_reduce(g)
        if nt.lp_value > budget:
            # Optimum certified above budget: any over-budget answer is fine.
            stub = Graph([0, 1], [(0, 1)])
            full = Solution.of_vertices(g.vertex_set)
            return ReducedInstance(stub, 0, lambda s: full)
        return ReducedInstance(
            g.induced_subgraph(nt.vhalf),
            budget - len(nt.v1),
            lambda s: Solution.of_vertices(s.payload | nt.v1),
        )

    return ApproximateKernel("vc-nt", 1.0, lambda d, k: 2 * k, reducer)


def is_degeneracy_kernel() -> ApproximateKernel:
    """Independent set kernel with (m+1)^2 vertices, budget m = value + width.

    Larger graphs are guaranteed to hold an independent set of size m+1,
    which the lift finds greedily, ignoring the oracle's answer.
    """

    def reducer(g: Graph, budget: float) -> ReducedInstance:
        size = int(budget) + 1
        if g.n > (budget + 1) ** 2:
            sol = degeneracy_is(g)
            if sol.value >= size:
                stub = Graph(range(size))
                return ReducedInstance(stub, budget, lambda s: sol)
        return ReducedInstance(g, budget, lambda s: s)

    return ApproximateKernel("is-degeneracy", 1.0, lambda d, m: (m + 1) ** 2, reducer)


def clique_cover_kernel() -> ApproximateKernel:
    """Clique cover kernel with m(m+1) vertices, budget m = value + width."""

    def reducer(g: Graph, budget: float) -> ReducedInstance:
        if g.n > budget * (budget + 1):
            stub = Graph(range(int(budget) + 1))
            singletons = clique_cover_trivial(g)
            return ReducedInstance(stub, budget, lambda s: singletons)
        return ReducedInstance(g, budget, lambda s: s)

    return ApproximateKernel("cc-trivial", 1.0, lambda d, m: m * (m + 1), reducer)
