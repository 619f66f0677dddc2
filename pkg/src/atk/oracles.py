"""Pluggable approximate solvers with ratio declarations and query auditing.

An oracle answers (kind, graph, optional decomposition) with a feasible
solution whose value is within its declared ratio of optimal. Exact
reference oracles (exhaustive search; treewidth DP for VC/IS) and a
lossiness injector live here, together with the per-run audit that makes
query-size discipline observable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from .errors import OracleRefused
from .graph import Graph
from .problems import (
    ProblemKind,
    Solution,
    contains_pattern,
    is_minimization,
)
from .treedecomp import (
    FORGET,
    INTRODUCE,
    LEAF,
    NiceTreeDecomposition,
    TreeDecomposition,
    heuristic_td,
    make_nice,
    validate,
)

BRUTE_VERTEX_CAP = 18
BRUTE_EDGE_CAP = 30


# ---------------------------------------------------------------------------
# Oracle plumbing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QueryRecord:
    problem: str
    n: int
    m: int


class OracleAudit:
    """Per-run log of every oracle query and the largest query seen."""

    def __init__(self):
        self.calls: list[QueryRecord] = []

    @property
    def call_count(self) -> int:
        return len(self.calls)

    @property
    def max_query_vertices(self) -> int:
        return max((r.n for r in self.calls), default=0)

    def reset(self) -> None:
        self.calls.clear()

    def snapshot(self) -> dict:
        return {
            "call_count": self.call_count,
            "max_query_vertices": self.max_query_vertices,
        }


class Oracle:
    """A named solver with a declared approximation ratio and size cap."""

    def __init__(self, name: str, declared_ratio: float, size_cap: float,
                 fn: Callable[[ProblemKind, Graph, object], Solution]):
        self.name = name
        self.declared_ratio = declared_ratio
        self.size_cap = size_cap
        self._fn = fn

    def solve(self, kind: ProblemKind, g: Graph, td=None) -> Solution:
        return self._fn(kind, g, td)

    def __repr__(self) -> str:
        return f"Oracle({self.name!r}, c={self.declared_ratio})"


def audited(inner: Oracle) -> tuple[Oracle, OracleAudit]:
    """Forwarding wrapper that logs every call; payloads pass through untouched."""
    audit = OracleAudit()

    def fn(kind, g, td):
        audit.calls.append(QueryRecord(kind.name, g.n, g.m))
        return inner.solve(kind, g, td)

    return Oracle(f"audited({inner.name})", inner.declared_ratio, inner.size_cap, fn), audit


# ---------------------------------------------------------------------------
# Exhaustive exact solvers
# ---------------------------------------------------------------------------


def _bit_adjacency(g: Graph) -> tuple[tuple[int, ...], dict[int, int], list[int]]:
    verts = g.vertices
    pos = {v: i for i, v in enumerate(verts)}
    nbr = [0] * len(verts)
    for u, v in g.edges():
        nbr[pos[u]] |= 1 << pos[v]
        nbr[pos[v]] |= 1 << pos[u]
    return verts, pos, nbr


def _max_independent_set(g: Graph) -> frozenset[int]:
    verts, _pos, nbr = _bit_adjacency(g)
    n = len(verts)
    best_mask = 0
    best_size = 0

    def rec(avail: int, cur_mask: int, cur_size: int) -> None:
        nonlocal best_mask, best_size
        if cur_size + avail.bit_count() <= best_size:
            return
        if avail == 0:
            best_mask, best_size = cur_mask, cur_size
            return
        # Degree-<=1 closure: remaining graph is a partial matching.
        max_v, max_deg = -1, -1
        bits = avail
        while bits:
            b = bits & -bits
            i = b.bit_length() - 1
            bits ^= b
            d = (nbr[i] & avail).bit_count()
            if d > max_deg:
                max_v, max_deg = i, d
        if max_deg <= 1:
            mask, size, rest = cur_mask, cur_size, avail
            while rest:
                b = rest & -rest
                i = b.bit_length() - 1
                mask |= b
                size += 1
                rest &= ~(b | (nbr[i] & avail))
            if size > best_size:
                best_mask, best_size = mask, size
            return
        v_bit = 1 << max_v
        rec(avail & ~(v_bit | nbr[max_v]), cur_mask | v_bit, cur_size + 1)
        rec(avail & ~v_bit, cur_mask, cur_size)

    rec((1 << n) - 1, 0, 0)
    return frozenset(verts[i] for i in range(n) if best_mask >> i & 1)


def _min_connected_vertex_cover(g: Graph) -> Solution:
    if len(g.connected_components()) > 1:
        return Solution.no_solution()
    if g.m == 0:
        return Solution.of_vertices(())
    verts, _pos, nbr = _bit_adjacency(g)
    n = len(verts)
    full = (1 << n) - 1
    best: list = [None, n + 1]

    def connected(mask: int) -> bool:
        start = mask & -mask
        seen = start
        frontier = start
        while frontier:
            grow = 0
            bits = frontier
            while bits:
                b = bits & -bits
                bits ^= b
                grow |= nbr[b.bit_length() - 1]
            frontier = grow & mask & ~seen
            seen |= frontier
        return seen == mask

    def rec(avail: int, picked: int, picked_count: int) -> None:
        cover_floor = n - picked_count - avail.bit_count()
        if cover_floor >= best[1]:
            return
        if avail == 0:
            cover = full & ~picked
            if cover.bit_count() < best[1] and connected(cover):
                best[0], best[1] = cover, cover.bit_count()
            return
        b = avail & -avail
        i = b.bit_length() - 1
        rec(avail & ~(b | nbr[i]), picked | b, picked_count + 1)
        rec(avail & ~b, picked, picked_count)

    rec(full, 0, 0)
    if best[0] is None:
        return Solution.no_solution()
    return Solution.of_vertices(verts[i] for i in range(n) if best[0] >> i & 1)


def _find_cycle(adj: dict[int, set[int]]) -> list[int] | None:
    """Some cycle's vertex list, or None. Undirected DFS: any non-parent edge
    back to a discovered vertex closes a cycle through ancestors."""
    visited: set[int] = set()
    for start in sorted(adj):
        if start in visited:
            continue
        parent: dict[int, int | None] = {start: None}
        visited.add(start)
        frames = [(start, iter(sorted(adj[start])))]
        while frames:
            u, it = frames[-1]
            advanced = False
            for w in it:
                if w == parent[u]:
                    continue
                if w in parent:
                    cyc = [u]
                    x = u
                    while x != w:
                        x = parent[x]
                        cyc.append(x)
                    return cyc
                parent[w] = u
                visited.add(w)
                frames.append((w, iter(sorted(adj[w]))))
                advanced = True
                break
            if not advanced:
                frames.pop()
    return None


def _min_fvs(g: Graph) -> frozenset[int]:
    best: list = [None, g.n + 1]
    adj0 = {v: set(g.neighbors(v)) for v in g.vertices}

    def rec(adj: dict[int, set[int]], removed: frozenset[int]) -> None:
        if len(removed) >= best[1]:
            return
        cyc = _find_cycle(adj)
        if cyc is None:
            best[0], best[1] = removed, len(removed)
            return
        for v in sorted(cyc):
            adj2 = {u: ns - {v} for u, ns in adj.items() if u != v}
            rec(adj2, removed | {v})

    rec(adj0, frozenset())
    return best[0]


def _min_eds(g: Graph) -> frozenset[frozenset[int]]:
    edges = [frozenset(e) for e in g.edges()]
    if not edges:
        return frozenset()
    greedy: list[frozenset[int]] = []
    used: set[int] = set()
    for e in edges:
        if not (e & used):
            greedy.append(e)
            used |= e
    best: list = [frozenset(greedy), len(greedy)]
    incident = {v: [e for e in edges if v in e] for v in g.vertices}

    def rec(chosen: list[frozenset[int]]) -> None:
        if len(chosen) >= best[1]:
            return
        covered = {v for e in chosen for v in e}
        target = None
        for e in edges:
            if not (e & covered):
                target = e
                break
        if target is None:
            best[0], best[1] = frozenset(chosen), len(chosen)
            return
        cands: list[frozenset[int]] = []
        for v in sorted(target):
            for f in incident[v]:
                if f not in cands:
                    cands.append(f)
        for f in cands:
            chosen.append(f)
            rec(chosen)
            chosen.pop()

    rec([])
    return best[0]


def _maximal_cliques(g: Graph) -> list[frozenset[int]]:
    out: list[frozenset[int]] = []

    def bk(r: set[int], p: set[int], x: set[int]) -> None:
        if not p and not x:
            out.append(frozenset(r))
            return
        pivot_pool = p | x
        pivot = max(sorted(pivot_pool), key=lambda u: len(g.neighbors(u) & p))
        for v in sorted(p - g.neighbors(pivot)):
            bk(r | {v}, p & g.neighbors(v), x & g.neighbors(v))
            p.discard(v)
            x.add(v)

    bk(set(), set(g.vertices), set())
    return sorted(out, key=lambda c: tuple(sorted(c)))


def _min_ecc(g: Graph) -> frozenset[frozenset[int]]:
    edges = [frozenset(e) for e in g.edges()]
    if not edges:
        return frozenset()
    cliques = [c for c in _maximal_cliques(g) if len(c) >= 2]
    clique_edges = {
        c: frozenset(frozenset(p) for p in combinations(sorted(c), 2)) for c in cliques
    }
    best: list = [frozenset(edges), len(edges)]

    def rec(covered: frozenset[frozenset[int]], chosen: list[frozenset[int]]) -> None:
        if len(chosen) >= best[1]:
            return
        target = None
        for e in edges:
            if e not in covered:
                target = e
                break
        if target is None:
            best[0], best[1] = frozenset(chosen), len(chosen)
            return
        for c in cliques:
            if target <= c:
                chosen.append(c)
                rec(covered | clique_edges[c], chosen)
                chosen.pop()

    rec(frozenset(), [])
    return best[0]


def _min_clique_cover(g: Graph) -> frozenset[frozenset[int]]:
    if g.n == 0:
        return frozenset()
    cliques = _maximal_cliques(g)
    best: list = [frozenset(frozenset([v]) for v in g.vertices), g.n]

    def rec(covered: frozenset[int], chosen: list[frozenset[int]]) -> None:
        if len(chosen) >= best[1]:
            return
        rest = g.vertex_set - covered
        if not rest:
            best[0], best[1] = frozenset(chosen), len(chosen)
            return
        v = min(rest)
        for c in cliques:
            if v in c:
                chosen.append(c)
                rec(covered | c, chosen)
                chosen.pop()

    rec(frozenset(), [])
    return best[0]


def _all_triangles(g: Graph) -> list[tuple[int, int, int]]:
    out = []
    for u, v in g.edges():
        for w in sorted(g.neighbors(u) & g.neighbors(v)):
            if w > v:
                out.append((u, v, w))
    return out


def _max_etp(g: Graph) -> frozenset[frozenset[int]]:
    tris = _all_triangles(g)
    tri_edges = [
        (frozenset((a, b)), frozenset((a, c)), frozenset((b, c))) for a, b, c in tris
    ]
    best: list = [frozenset(), 0]

    def rec(idx: int, used: frozenset[frozenset[int]], chosen: list[int]) -> None:
        if len(chosen) + (len(tris) - idx) <= best[1]:
            return
        if idx == len(tris):
            if len(chosen) > best[1]:
                best[0] = frozenset(frozenset(tris[i]) for i in chosen)
                best[1] = len(chosen)
            return
        e1, e2, e3 = tri_edges[idx]
        if e1 not in used and e2 not in used and e3 not in used:
            chosen.append(idx)
            rec(idx + 1, used | {e1, e2, e3}, chosen)
            chosen.pop()
        rec(idx + 1, used, chosen)

    rec(0, frozenset(), [])
    return best[0]


def _max_hpacking(g: Graph, pattern: Graph) -> frozenset[frozenset[int]]:
    k = pattern.n
    copies = [
        frozenset(c)
        for c in combinations(g.vertices, k)
        if contains_pattern(g, frozenset(c), pattern)
    ]
    by_vertex: dict[int, list[frozenset[int]]] = {v: [] for v in g.vertices}
    for c in copies:
        for v in c:
            by_vertex[v].append(c)
    order = g.vertices
    best: list = [frozenset(), 0]

    def rec(pos: int, used: frozenset[int], chosen: list[frozenset[int]]) -> None:
        free_after = sum(1 for v in order[pos:] if v not in used)
        if len(chosen) + free_after // k <= best[1]:
            return
        i = pos
        while i < len(order) and order[i] in used:
            i += 1
        if i == len(order):
            if len(chosen) > best[1]:
                best[0], best[1] = frozenset(chosen), len(chosen)
            return
        v = order[i]
        for c in by_vertex[v]:
            if not (c & used):
                chosen.append(c)
                rec(i + 1, used | c, chosen)
                chosen.pop()
        rec(i + 1, used | {v}, chosen)

    rec(0, frozenset(), [])
    return best[0]


def brute_force_solve(
    kind: ProblemKind,
    g: Graph,
    vertex_cap: int = BRUTE_VERTEX_CAP,
    edge_cap: int = BRUTE_EDGE_CAP,
) -> Solution:
    """Exact optimum by exhaustive search, refusing over-cap instances.

    A refusal signals that the calling Turing kernel violated its own size
    discipline. ETP and ECC instances are capped by edge count instead of
    vertex count.
    """
    name = kind.name
    if name in ("etp", "ecc"):
        if g.m > edge_cap:
            raise OracleRefused(f"{name} query with {g.m} edges exceeds cap {edge_cap}")
    elif g.n > vertex_cap:
        raise OracleRefused(f"{name} query with {g.n} vertices exceeds cap {vertex_cap}")
    if name == "vc":
        return Solution.of_vertices(g.vertex_set - _max_independent_set(g))
    if name == "is":
        return Solution.of_vertices(_max_independent_set(g))
    if name == "cvc":
        return _min_connected_vertex_cover(g)
    if name == "fvs":
        return Solution.of_vertices(_min_fvs(g))
    if name == "eds":
        return Solution.of_edges(_min_eds(g))
    if name == "ecc":
        return Solution.of_family(_min_ecc(g))
    if name == "cc":
        return Solution.of_family(_min_clique_cover(g))
    if name == "etp":
        return Solution.of_family(_max_etp(g))
    if name == "hpack":
        return Solution.of_family(_max_hpacking(g, kind.pattern))
    raise ValueError(f"unknown problem kind {name}")


# ---------------------------------------------------------------------------
# Treewidth dynamic programming (exact VC / IS)
# ---------------------------------------------------------------------------


def td_dp_solve(kind: ProblemKind, g: Graph, ntd: NiceTreeDecomposition) -> Solution:
    """Exact VC/IS via dynamic programming over bag subsets.

    Runtime is exponential only in the decomposition width, which makes
    exact optima reachable at full-scale thresholds in tests.
    """
    if kind.name not in ("vc", "is"):
        raise ValueError("treewidth DP supports vc and is only")
    bad = ntd.nice_violations()
    if bad:
        raise ValueError("not a nice tree decomposition: " + "; ".join(bad))
    report = validate(g, ntd.as_td())
    if not report.valid:
        raise ValueError("invalid tree decomposition: " + "; ".join(report.violations()))
    maximize = kind.name == "is"
    better = max if maximize else min
    tables: list[dict[frozenset[int], int]] = [dict() for _ in range(ntd.n_nodes)]
    forget_choice: list[dict[frozenset[int], frozenset[int]]] = [dict() for _ in range(ntd.n_nodes)]
    for t in ntd.postorder():
        node_kind = ntd.kinds[t]
        if node_kind == LEAF:
            tables[t] = {frozenset(): 0}
        elif node_kind == INTRODUCE:
            c = ntd.children[t][0]
            v = ntd.pivots[t]
            nv = g.neighbors(v) & ntd.bags[c]
            tab: dict[frozenset[int], int] = {}
            for mask, val in tables[c].items():
                # v excluded: fine for IS; for VC its bag edges need cover.
                if maximize or nv <= mask:
                    tab[mask] = val
                # v included: fine for VC; for IS no chosen neighbor allowed.
                if not maximize or not (nv & mask):
                    tab[mask | {v}] = val + 1
            tables[t] = tab
            tables[c] = None  # free
        elif node_kind == FORGET:
            c = ntd.children[t][0]
            v = ntd.pivots[t]
            tab = {}
            choice = {}
            for mask, val in tables[c].items():
                key = mask - {v}
                cur = tab.get(key)
                if cur is None or (better(cur, val) == val and cur != val):
                    tab[key] = val
                    choice[key] = mask
            tables[t] = tab
            forget_choice[t] = choice
            tables[c] = None
        else:  # JOIN
            c1, c2 = ntd.children[t]
            tab = {}
            t2 = tables[c2]
            for mask, val in tables[c1].items():
                other = t2.get(mask)
                if other is not None:
                    tab[mask] = val + other - len(mask)
            tables[t] = tab
    root_table = tables[ntd.root]
    value = root_table[frozenset()]
    # Traceback: the union of chosen bag subsets along consistent masks.
    picked: set[int] = set()
    stack: list[tuple[int, frozenset[int]]] = [(ntd.root, frozenset())]
    while stack:
        t, mask = stack.pop()
        picked |= mask
        node_kind = ntd.kinds[t]
        if node_kind == LEAF:
            continue
        if node_kind == INTRODUCE:
            v = ntd.pivots[t]
            stack.append((ntd.children[t][0], mask - {v}))
        elif node_kind == FORGET:
            stack.append((ntd.children[t][0], forget_choice[t][mask]))
        else:
            c1, c2 = ntd.children[t]
            stack.append((c1, mask))
            stack.append((c2, mask))
    sol = Solution.of_vertices(picked)
    if sol.value != value:
        raise AssertionError("DP traceback value mismatch")
    return sol


# ---------------------------------------------------------------------------
# Lossiness injection
# ---------------------------------------------------------------------------


def lossy_wrap(inner: Oracle, target_c: float) -> Oracle:
    """Degrade an oracle to ratio ``target_c`` while staying feasible.

    Minimization solutions are padded with feasibility-preserving extras up
    to floor(target_c * value); maximization solutions are truncated to
    ceil(value / target_c).
    """
    if target_c < 1:
        raise ValueError("target ratio must be at least 1")
    if target_c < inner.declared_ratio:
        raise ValueError("cannot tighten an oracle's declared ratio")

    def fn(kind, g, td):
        sol = inner.solve(kind, g, td)
        if sol.infeasible:
            return sol
        if is_minimization(kind):
            return _pad_min(kind, g, sol, target_c)
        target = math.ceil(sol.value / target_c)
        kept = sorted(sol.payload, key=_canon)[:target]
        return Solution(frozenset(kept), len(kept))

    return Oracle(f"lossy({target_c}, {inner.name})", target_c, inner.size_cap, fn)


def _canon(item):
    if isinstance(item, frozenset):
        return tuple(sorted(item))
    return (item,)


def _pad_min(kind: ProblemKind, g: Graph, sol: Solution, c: float) -> Solution:
    target = math.floor(c * sol.value)
    payload = set(sol.payload)
    name = kind.name
    while len(payload) < target:
        added = False
        if name in ("vc", "fvs"):
            for v in g.vertices:
                if v not in payload:
                    payload.add(v)
                    added = True
                    break
        elif name == "cvc":
            if not payload:
                if g.n:
                    payload.add(g.vertices[0])
                    added = True
            else:
                for v in g.vertices:
                    if v not in payload and (g.neighbors(v) & payload):
                        payload.add(v)
                        added = True
                        break
        elif name == "eds":
            for e in g.edges():
                fe = frozenset(e)
                if fe not in payload:
                    payload.add(fe)
                    added = True
                    break
        elif name in ("ecc", "cc"):
            for v in g.vertices:
                s = frozenset([v])
                if s not in payload:
                    payload.add(s)
                    added = True
                    break
        if not added:
            break
    return Solution(frozenset(payload), len(payload))


# ---------------------------------------------------------------------------
# Named oracle constructors
# ---------------------------------------------------------------------------


def exact_brute_oracle(vertex_cap: int = BRUTE_VERTEX_CAP, edge_cap: int = BRUTE_EDGE_CAP) -> Oracle:
    def fn(kind, g, td):
        return brute_force_solve(kind, g, vertex_cap=vertex_cap, edge_cap=edge_cap)

    return Oracle("exact-bf", 1.0, vertex_cap, fn)


def exact_dp_oracle() -> Oracle:
    def fn(kind, g, td):
        if kind.name not in ("vc", "is"):
            raise ValueError("exact-dp supports vc and is only")
        if isinstance(td, NiceTreeDecomposition):
            ntd = td
        elif isinstance(td, TreeDecomposition):
            ntd = make_nice(g, td)
        else:
            ntd = make_nice(g, heuristic_td(g))
        return td_dp_solve(kind, g, ntd)

    return Oracle("exact-dp", 1.0, math.inf, fn)


def trianglefree_ecc_oracle() -> Oracle:
    """Exact ECC for triangle-free graphs: every edge is its own clique."""

    def fn(kind, g, td):
        if kind.name != "ecc":
            raise ValueError("this oracle answers ecc only")
        for u, v in g.edges():
            if g.neighbors(u) & g.neighbors(v):
                raise OracleRefused("query graph contains a triangle")
        return Solution.of_family(frozenset((u, v)) for u, v in g.edges())

    return Oracle("exact-tf-ecc", 1.0, math.inf, fn)
