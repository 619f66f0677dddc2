"""Tree decompositions: validation, nice form, subconnected form, node search.

A tree decomposition is a tree of bags covering the graph; the nice form is
rooted with empty root/leaf bags and only join/introduce/forget nodes. The
subconnected form additionally makes every subtree's vertex set induce a
connected subgraph, with a bounded number of children per node.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable

from .errors import InternalInvariantViolation
from .graph import Graph


class TreeDecomposition:
    """A tree of bags. Nodes are integers; the tree may carry a root."""

    def __init__(
        self,
        bags: dict[int, Iterable[int]],
        tree_edges: Iterable[tuple[int, int]] = (),
        root: int | None = None,
    ):
        self.bags: dict[int, frozenset[int]] = {int(t): frozenset(b) for t, b in bags.items()}
        if not self.bags:
            raise ValueError("a tree decomposition needs at least one node")
        adj: dict[int, set[int]] = {t: set() for t in self.bags}
        edges = []
        for a, b in tree_edges:
            if a == b or a not in adj or b not in adj:
                raise ValueError(f"bad tree edge ({a}, {b})")
            if b in adj[a]:
                raise ValueError(f"duplicate tree edge ({a}, {b})")
            adj[a].add(b)
            adj[b].add(a)
            edges.append((a, b))
        if len(edges) != len(self.bags) - 1 or not _tree_connected(adj):
            raise ValueError("tree edges do not form a tree")
        self.tree_adj: dict[int, tuple[int, ...]] = {t: tuple(sorted(ns)) for t, ns in adj.items()}
        self.tree_edges: tuple[tuple[int, int], ...] = tuple(sorted((min(a, b), max(a, b)) for a, b in edges))
        if root is not None and root not in self.bags:
            raise ValueError(f"root {root} is not a node")
        self.root = root

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(sorted(self.bags))

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags.values()) - 1

    def rooted_children(self, root: int | None = None) -> tuple[int, dict[int, tuple[int, ...]], dict[int, int | None]]:
        """Orient the tree from ``root``; returns (root, children, parent)."""
        r = root if root is not None else self.root
        if r is None:
            r = self.nodes[0]
        parent: dict[int, int | None] = {r: None}
        children: dict[int, list[int]] = {t: [] for t in self.bags}
        queue = deque([r])
        while queue:
            t = queue.popleft()
            for s in self.tree_adj[t]:
                if s not in parent:
                    parent[s] = t
                    children[t].append(s)
                    queue.append(s)
        return r, {t: tuple(sorted(c)) for t, c in children.items()}, parent

    def restrict(self, keep: frozenset[int]) -> "TreeDecomposition":
        """Restrict every bag to ``keep`` (valid for the induced subgraph)."""
        return TreeDecomposition(
            {t: b & keep for t, b in self.bags.items()}, self.tree_edges, root=self.root
        )

    def contract_bag_vertices(self, old: frozenset[int], z: int) -> "TreeDecomposition":
        """Replace any occurrence of a vertex from ``old`` by ``z`` in all bags."""
        bags = {
            t: ((b - old) | {z}) if b & old else b for t, b in self.bags.items()
        }
        return TreeDecomposition(bags, self.tree_edges, root=self.root)


def _tree_connected(adj: dict[int, set[int]]) -> bool:
    start = next(iter(adj))
    seen = {start}
    queue = deque([start])
    while queue:
        t = queue.popleft()
        for s in adj[t]:
            if s not in seen:
                seen.add(s)
                queue.append(s)
    return len(seen) == len(adj)


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValidationReport:
    """Every violated decomposition condition, or a clean bill of health."""

    uncovered_vertices: tuple[int, ...]
    uncovered_edges: tuple[tuple[int, int], ...]
    broken_traces: tuple[int, ...]
    foreign_bag_vertices: tuple[int, ...]
    width: int

    @property
    def valid(self) -> bool:
        return not (
            self.uncovered_vertices
            or self.uncovered_edges
            or self.broken_traces
            or self.foreign_bag_vertices
        )

    def violations(self) -> list[str]:
        out = []
        if self.foreign_bag_vertices:
            out.append(f"bag vertices outside the graph: {list(self.foreign_bag_vertices)}")
        if self.uncovered_vertices:
            out.append(f"vertices in no bag: {list(self.uncovered_vertices)}")
        if self.uncovered_edges:
            out.append(f"edges in no bag: {list(self.uncovered_edges)}")
        if self.broken_traces:
            out.append(f"vertices with disconnected bag traces: {list(self.broken_traces)}")
        return out


def validate(g: Graph, td: TreeDecomposition) -> ValidationReport:
    """Check the three decomposition conditions; violations are data."""
    occurs: dict[int, list[int]] = {}
    foreign: set[int] = set()
    for t in td.nodes:
        for v in td.bags[t]:
            if not g.has_vertex(v):
                foreign.add(v)
            occurs.setdefault(v, []).append(t)
    uncovered_vertices = tuple(v for v in g.vertices if v not in occurs)
    uncovered_edges = tuple(
        (u, v)
        for u, v in g.edges()
        if u in occurs and v in occurs and not (set(occurs[u]) & set(occurs[v]))
    ) + tuple((u, v) for u, v in g.edges() if u not in occurs or v not in occurs)
    broken = []
    for v in sorted(occurs):
        nodes = set(occurs[v])
        start = occurs[v][0]
        seen = {start}
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for s in td.tree_adj[t]:
                if s in nodes and s not in seen:
                    seen.add(s)
                    queue.append(s)
        if len(seen) != len(nodes):
            broken.append(v)
    return ValidationReport(
        uncovered_vertices=uncovered_vertices,
        uncovered_edges=tuple(sorted(set(uncovered_edges))),
        broken_traces=tuple(broken),
        foreign_bag_vertices=tuple(sorted(foreign)),
        width=td.width,
    )


# ---------------------------------------------------------------------------
# Nice tree decompositions
# ---------------------------------------------------------------------------

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


class NiceTreeDecomposition:
    """Rooted decomposition with typed nodes and empty root/leaf bags."""

    def __init__(
        self,
        bags: list[frozenset[int]],
        kinds: list[str],
        pivots: list[int | None],
        children: list[tuple[int, ...]],
        root: int,
    ):
        self.bags = bags
        self.kinds = kinds
        self.pivots = pivots
        self.children = children
        self.root = root
        self.parent: list[int | None] = [None] * len(bags)
        for t, kids in enumerate(children):
            for c in kids:
                self.parent[c] = t

    @property
    def n_nodes(self) -> int:
        return len(self.bags)

    @property
    def width(self) -> int:
        return max(len(b) for b in self.bags) - 1

    def postorder(self) -> list[int]:
        """Children-before-parent node order (iterative; trees can be deep)."""
        out: list[int] = []
        stack = [self.root]
        while stack:
            t = stack.pop()
            out.append(t)
            stack.extend(self.children[t])
        out.reverse()
        return out

    def subtree_nodes(self, t: int) -> list[int]:
        out = []
        stack = [t]
        while stack:
            s = stack.pop()
            out.append(s)
            stack.extend(self.children[s])
        return out

    def as_td(self) -> TreeDecomposition:
        edges = [(t, c) for t in range(self.n_nodes) for c in self.children[t]]
        return TreeDecomposition(
            {t: self.bags[t] for t in range(self.n_nodes)}, edges, root=self.root
        )

    def nice_violations(self) -> list[str]:
        out = []
        if self.bags[self.root]:
            out.append("root bag not empty")
        for t in range(self.n_nodes):
            kids = self.children[t]
            kind = self.kinds[t]
            if kind == LEAF:
                if kids:
                    out.append(f"leaf {t} has children")
                if self.bags[t]:
                    out.append(f"leaf {t} has a non-empty bag")
            elif kind == JOIN:
                if len(kids) != 2 or any(self.bags[c] != self.bags[t] for c in kids):
                    out.append(f"join {t} lacks two equal-bag children")
            elif kind == INTRODUCE:
                if len(kids) != 1 or self.bags[t] != self.bags[kids[0]] | {self.pivots[t]}:
                    out.append(f"introduce {t} inconsistent")
            elif kind == FORGET:
                if len(kids) != 1 or self.bags[kids[0]] != self.bags[t] | {self.pivots[t]}:
                    out.append(f"forget {t} inconsistent")
            else:
                out.append(f"unknown kind at {t}")
        return out


class _NiceBuilder:
    def __init__(self):
        self.bags: list[frozenset[int]] = []
        self.kinds: list[str] = []
        self.pivots: list[int | None] = []
        self.children: list[tuple[int, ...]] = []

    def add(self, bag: frozenset[int], kind: str, pivot: int | None = None,
            children: tuple[int, ...] = ()) -> int:
        self.bags.append(bag)
        self.kinds.append(kind)
        self.pivots.append(pivot)
        self.children.append(children)
        return len(self.bags) - 1

    def chain_up(self, node: int, target: frozenset[int]) -> int:
        """Grow a node chain from ``node`` upward until its bag equals ``target``."""
        cur = node
        bag = self.bags[cur]
        for v in sorted(bag - target):
            cur = self.add(bag - {v}, FORGET, v, (cur,))
            bag = self.bags[cur]
        for v in sorted(target - bag):
            cur = self.add(bag | {v}, INTRODUCE, v, (cur,))
            bag = self.bags[cur]
        return cur

    def leaf_chain(self, target: frozenset[int]) -> int:
        cur = self.add(frozenset(), LEAF)
        return self.chain_up(cur, target)


def _shrink(td: TreeDecomposition) -> tuple[dict[int, frozenset[int]], dict[int, set[int]]]:
    """Contract tree edges whose bags are nested; at most one node per vertex left."""
    bags = dict(td.bags)
    adj: dict[int, set[int]] = {t: set(ns) for t, ns in td.tree_adj.items()}
    pending = [tuple(e) for e in td.tree_edges]
    while pending:
        a, b = pending.pop()
        if a not in bags or b not in bags or b not in adj[a]:
            continue
        if bags[a] <= bags[b]:
            a, b = b, a  # keep a, absorb b
        elif not bags[b] <= bags[a]:
            continue
        adj[a].discard(b)
        adj[b].discard(a)
        for x in adj[b]:
            adj[x].discard(b)
            adj[x].add(a)
            adj[a].add(x)
            pending.append((a, x))
        del bags[b], adj[b]
    return bags, adj


def make_nice(g: Graph, td: TreeDecomposition) -> NiceTreeDecomposition:
    """Convert a valid decomposition to nice form; width is preserved.

    Node count is O(width * |V(g)|): nested adjacent bags are contracted
    first, then joins are binarized and bag transitions are padded with
    single-vertex introduce/forget steps.
    """
    report = validate(g, td)
    if not report.valid:
        raise ValueError("invalid tree decomposition: " + "; ".join(report.violations()))
    bags, adj = _shrink(td)
    order = sorted(bags)
    root = order[0]
    builder = _NiceBuilder()

    # Iterative post-order over the shrunk tree.
    parent: dict[int, int | None] = {root: None}
    dfs_order = [root]
    stack = [root]
    while stack:
        t = stack.pop()
        for s in sorted(adj[t], reverse=True):
            if s != parent[t]:
                parent[s] = t
                dfs_order.append(s)
                stack.append(s)
    tops: dict[int, int] = {}
    for t in reversed(dfs_order):
        kids = sorted(s for s in adj[t] if s != parent[t])
        bag = bags[t]
        if not kids:
            tops[t] = builder.leaf_chain(bag)
            continue
        lifted = [builder.chain_up(tops[c], bag) for c in kids]
        while len(lifted) > 1:
            right = lifted.pop()
            left = lifted.pop()
            lifted.append(builder.add(bag, JOIN, None, (left, right)))
        tops[t] = lifted[0]
    top = builder.chain_up(tops[root], frozenset())
    return NiceTreeDecomposition(builder.bags, builder.kinds, builder.pivots, builder.children, top)


# ---------------------------------------------------------------------------
# Subtree vertex sets and the size-window node search
# ---------------------------------------------------------------------------


class SubtreeIndex:
    """Per-node subtree vertex sets V_t of a nice decomposition.

    Local sizes |V_t \\ X_t| are precomputed bottom-up in O(nodes); the sets
    themselves are materialized on demand.
    """

    def __init__(self, ntd: NiceTreeDecomposition):
        self.ntd = ntd
        size: list[int] = [0] * ntd.n_nodes
        for t in ntd.postorder():
            kind = ntd.kinds[t]
            if kind == LEAF:
                size[t] = 0
            elif kind == INTRODUCE:
                size[t] = size[ntd.children[t][0]]
            elif kind == FORGET:
                size[t] = size[ntd.children[t][0]] + 1
            else:
                c1, c2 = ntd.children[t]
                size[t] = size[c1] + size[c2]
        self.local_size = size
        self._vset_cache: dict[int, frozenset[int]] = {}

    def v_set(self, t: int) -> frozenset[int]:
        """V_t: every vertex in a bag of the subtree rooted at ``t``."""
        cached = self._vset_cache.get(t)
        if cached is not None:
            return cached
        acc: set[int] = set()
        for s in self.ntd.subtree_nodes(t):
            acc |= self.ntd.bags[s]
        out = frozenset(acc)
        self._vset_cache[t] = out
        return out

    def local_vertices(self, t: int) -> frozenset[int]:
        return self.v_set(t) - self.ntd.bags[t]

    def as_dict(self) -> dict[int, frozenset[int]]:
        return {t: self.v_set(t) for t in range(self.ntd.n_nodes)}


def find_node_by_local_size(
    ntd: NiceTreeDecomposition, index: SubtreeIndex, lo: float, hi: float
) -> int:
    """Find a node t with lo <= |V_t \\ X_t| <= hi (requires hi >= 2*lo).

    Descends from the root: a one-child step drops the local size by at
    most one, and at a join the larger child keeps at least half.
    """
    if lo < 1:
        raise ValueError("lower window bound must be at least 1")
    if hi < 2 * lo:
        raise ValueError("window requires hi >= 2*lo")
    size = index.local_size
    if size[ntd.root] < lo:
        raise ValueError("graph smaller than the requested window")
    t = ntd.root
    while size[t] > hi:
        kids = ntd.children[t]
        if not kids:
            raise InternalInvariantViolation("leaf with positive local size")
        t = min(kids, key=lambda c: (-size[c], c))
    return t


# ---------------------------------------------------------------------------
# Subconnected form
# ---------------------------------------------------------------------------


def make_subconnected(g: Graph, ntd: NiceTreeDecomposition) -> TreeDecomposition:
    """Regroup subtrees so G[V_t] is connected at every node.

    Bottom-up: a node whose accumulated vertex set splits into p components
    becomes p sibling nodes, each keeping the bag restricted to its
    component. For connected g every component of G[V_t] meets X_t, which
    bounds the children of any output node by 2*width+2.
    """
    if not g.is_connected():
        raise ValueError("make_subconnected requires a connected graph")
    new_bags: dict[int, frozenset[int]] = {}
    new_children: dict[int, list[int]] = {}
    counter = 0
    pieces: dict[int, list[tuple[int, frozenset[int]]]] = {}
    for t in ntd.postorder():
        child_pieces = [p for c in ntd.children[t] for p in pieces[c]]
        bag = ntd.bags[t]
        vertex_pool = set(bag)
        for _, comp in child_pieces:
            vertex_pool |= comp
        if not vertex_pool:
            pieces[t] = []
            continue
        comps = _components_within(g, vertex_pool)
        out: list[tuple[int, frozenset[int]]] = []
        for comp in comps:
            nid = counter
            counter += 1
            new_bags[nid] = bag & comp
            new_children[nid] = [pid for pid, pcomp in child_pieces if next(iter(pcomp)) in comp]
            if len(comps) > 1 and not (bag & comp):
                raise InternalInvariantViolation(
                    "component without a bag vertex in a connected graph"
                )
            out.append((nid, comp))
        pieces[t] = out
    root_pieces = pieces[ntd.root]
    if len(root_pieces) != 1:
        raise InternalInvariantViolation("connected graph produced multiple root pieces")
    root_id = root_pieces[0][0]
    edges = [(t, c) for t, kids in new_children.items() for c in kids]
    return TreeDecomposition(new_bags, edges, root=root_id)


def _components_within(g: Graph, pool: set[int]) -> list[frozenset[int]]:
    seen: set[int] = set()
    comps = []
    for start in sorted(pool):
        if start in seen:
            continue
        comp = {start}
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for w in g.neighbors(u):
                if w in pool and w not in comp:
                    comp.add(w)
                    queue.append(w)
        seen |= comp
        comps.append(frozenset(comp))
    return comps


def rooted_subtree_vertices(td: TreeDecomposition) -> tuple[dict[int, tuple[int, ...]], dict[int, frozenset[int]]]:
    """Children map and V_t sets for a rooted (not necessarily nice) decomposition."""
    root, children, _parent = td.rooted_children()
    vsets: dict[int, frozenset[int]] = {}
    order = []
    stack = [root]
    while stack:
        t = stack.pop()
        order.append(t)
        stack.extend(children[t])
    for t in reversed(order):
        acc = set(td.bags[t])
        for c in children[t]:
            acc |= vsets[c]
        vsets[t] = frozenset(acc)
    return children, vsets


# ---------------------------------------------------------------------------
# Pruning helpers used by the recursive kernels
# ---------------------------------------------------------------------------


def prune_subtree(
    ntd: NiceTreeDecomposition,
    t: int,
    keep_t: bool,
    drop_from_bags: frozenset[int] = frozenset(),
) -> TreeDecomposition:
    """Remove the subtree rooted at ``t`` (optionally keeping ``t`` itself)
    and delete ``drop_from_bags`` from every remaining bag."""
    if t == ntd.root:
        raise ValueError("cannot prune the whole decomposition")
    doomed = set(ntd.subtree_nodes(t))
    if keep_t:
        doomed.discard(t)
    bags = {
        s: (ntd.bags[s] - drop_from_bags)
        for s in range(ntd.n_nodes)
        if s not in doomed
    }
    edges = [
        (s, c)
        for s in bags
        for c in ntd.children[s]
        if c in bags
    ]
    return TreeDecomposition(bags, edges, root=ntd.root)


# ---------------------------------------------------------------------------
# Greedy min-fill heuristic decomposer
# ---------------------------------------------------------------------------


def heuristic_td(g: Graph) -> TreeDecomposition:
    """Greedy min-fill elimination ordering; no width optimality guarantee."""
    if g.n == 0:
        return TreeDecomposition({0: frozenset()})
    work: dict[int, set[int]] = {v: set(g.neighbors(v)) for v in g.vertices}
    elim_order: list[int] = []
    elim_bags: list[frozenset[int]] = []
    while work:
        best_v, best_fill = None, None
        for v in sorted(work):
            ns = work[v]
            fill = 0
            for x in ns:
                fill += len(ns - work[x]) - 1  # pairs (x, y) with y not adjacent to x
            fill //= 2
            if best_fill is None or fill < best_fill:
                best_v, best_fill = v, fill
                if fill == 0:
                    break
        v = best_v
        ns = sorted(work[v])
        elim_order.append(v)
        elim_bags.append(frozenset([v, *ns]))
        for x in ns:
            work[x].discard(v)
            work[x].update(set(ns) - {x})
        del work[v]
    pos = {v: i for i, v in enumerate(elim_order)}
    bags = {i: b for i, b in enumerate(elim_bags)}
    edges = []
    for i, b in enumerate(elim_bags[:-1]):
        later = [pos[v] for v in b if pos[v] > i]
        edges.append((i, min(later) if later else i + 1))
    return TreeDecomposition(bags, edges, root=len(elim_bags) - 1)
