"""The problem-specific approximate Turing kernels.

Each engine walks a (nice) tree decomposition to a node whose local
optimum sits in a bounded window, solves that piece through the oracle
(possibly behind a reduce-and-lift kernel), recurses on the remainder,
and assembles the answer. With threshold_scale = 1 every internal
threshold equals its analysis-given formula, which is what the query-size
audit is checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

from .approx import (
    ApproximateKernel,
    connectify_vertex_cover,
    cvc_2approx,
    greedy_matching,
    greedy_triangle_packing,
    passthrough_kernel,
    solve_vc_small,
)
from .errors import InternalInvariantViolation, KernelRefusal
from .graph import Graph
from .oracles import Oracle, audited
from .problems import CVC, ECC, ETP, IS, VC, Solution, is_feasible
from .treedecomp import (
    FORGET,
    NiceTreeDecomposition,
    SubtreeIndex,
    TreeDecomposition,
    find_node_by_local_size,
    make_nice,
    make_subconnected,
    prune_subtree,
    rooted_subtree_vertices,
    validate,
)


class KernelConfig:
    """Per-run configuration: epsilon, threshold scaling, oracle and audit.

    threshold_scale exists so tests can trigger the descent paths on
    desk-scale graphs; the approximation guarantee is only claimed at
    scale 1 and runs at other scales are flagged.
    """

    def __init__(
        self,
        epsilon: float,
        oracle: Oracle,
        threshold_scale: float = 1.0,
        kernel: ApproximateKernel | None = None,
    ):
        if not 0 < epsilon <= 1:
            raise ValueError("epsilon must be in (0, 1]")
        if threshold_scale <= 0:
            raise ValueError("threshold_scale must be positive")
        self.epsilon = epsilon
        self.threshold_scale = threshold_scale
        self.raw_oracle = oracle
        self.oracle, self.audit = audited(oracle)
        self.kernel = kernel

    def psaks_slot(self) -> ApproximateKernel:
        if self.kernel is not None:
            return self.kernel
        return passthrough_kernel(self.raw_oracle.size_cap)


@dataclass
class RunReport:
    """Outcome of one engine run plus its audit snapshot."""

    problem: str
    epsilon: float
    threshold_scale: float
    width: int
    solution: Solution
    recursion_depth: int
    oracle_calls: int
    max_query_vertices: int
    declared_query_bound: float | None
    thresholds: dict[str, float]
    flags: tuple[str, ...]

    def to_dict(self) -> dict:
        payload = sorted(
            self.solution.payload,
            key=lambda x: tuple(sorted(x)) if isinstance(x, frozenset) else (x,),
        )
        return {
            "problem": self.problem,
            "epsilon": self.epsilon,
            "threshold_scale": self.threshold_scale,
            "width": self.width,
            "value": self.solution.value,
            "solution": [sorted(x) if isinstance(x, frozenset) else x for x in payload],
            "recursion_depth": self.recursion_depth,
            "oracle_calls": self.oracle_calls,
            "max_query_vertices": self.max_query_vertices,
            "declared_query_bound": self.declared_query_bound,
            "thresholds": self.thresholds,
            "flags": list(self.flags),
        }


def vc_query_bound(width: int, eps: float) -> float:
    return 16.0 * (width + 1) / eps


def is_query_bound(width: int, eps: float) -> float:
    return 10.0 * (width + 1) ** 2 / eps


def ecc_query_bound(width: int, eps: float) -> float:
    return 4.0 * (1 + eps) / eps * (width + 1) ** 4 + (width + 1)


def _check_valid(g: Graph, td: TreeDecomposition) -> None:
    report = validate(g, td)
    if not report.valid:
        raise ValueError("invalid tree decomposition: " + "; ".join(report.violations()))


def _assert_feasible(kind, g: Graph, sol: Solution, context: str) -> None:
    if not is_feasible(kind, g, sol):
        raise InternalInvariantViolation(f"{context}: infeasible solution produced")


class _Descender:
    """Maintains the local vertex set V_t \\ X_t along a downward walk."""

    def __init__(self, g: Graph, ntd: NiceTreeDecomposition):
        self.g = g
        self.ntd = ntd
        self.node = ntd.root
        self.local: set[int] = set(g.vertex_set)

    def children(self) -> tuple[int, ...]:
        return self.ntd.children[self.node]

    def descend_unary(self) -> None:
        t = self.node
        child = self.ntd.children[t][0]
        if self.ntd.kinds[t] == FORGET:
            self.local.discard(self.ntd.pivots[t])
        self.node = child

    def join_split(self) -> tuple[frozenset[int], frozenset[int]]:
        c1, _c2 = self.ntd.children[self.node]
        acc: set[int] = set()
        for s in self.ntd.subtree_nodes(c1):
            acc |= self.ntd.bags[s]
        s1 = frozenset(acc - self.ntd.bags[c1])
        return s1, frozenset(self.local - s1)

    def descend_join(self, index: int, child_local: frozenset[int]) -> None:
        self.node = self.ntd.children[self.node][index]
        self.local = set(child_local)


# ---------------------------------------------------------------------------
# Vertex Cover
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VcSplitChoice:
    """A node whose local cover sits inside the target window, with the
    2-approximate cover observed there as locality evidence."""

    node: int
    local_vertices: frozenset[int]
    cover_value: int
    cover: frozenset[int]


def find_vc_split_node(
    g: Graph, ntd: NiceTreeDecomposition, eps: float, threshold_scale: float = 1.0
) -> VcSplitChoice:
    """Descend to a node t whose local 2-approximation is small enough.

    Stops at the first node where the greedy cover of G[V_t \\ X_t] is at
    most 8(width+1)/eps; one-child steps go down unconditionally, and a
    join follows the child with the larger measured cover.
    """
    thr = 8.0 * (ntd.width + 1) / eps * threshold_scale
    walk = _Descender(g, ntd)
    pending: tuple[int, frozenset[int] | None] | None = None
    while True:
        within = frozenset(walk.local)
        if pending is None:
            value, cover, _ = greedy_matching(g, within, stop_above=thr)
        else:
            value, cover = pending
            pending = None
        if cover is not None and value <= thr:
            return VcSplitChoice(walk.node, within, value, cover)
        kids = walk.children()
        if not kids:
            raise InternalInvariantViolation("leaf reached with an uncovered window")
        if len(kids) == 1:
            walk.descend_unary()
            continue
        s1, s2 = walk.join_split()
        v1, c1, _ = greedy_matching(g, s1)
        v2, c2, _ = greedy_matching(g, s2)
        if (v1, -kids[0]) >= (v2, -kids[1]):
            pending = (v1, c1)
            walk.descend_join(0, s1)
        else:
            pending = (v2, c2)
            walk.descend_join(1, s2)


def approx_vc_turing(g: Graph, td: TreeDecomposition, cfg: KernelConfig) -> RunReport:
    """(1+eps)-approximate Turing kernel for vertex cover.

    Queries go through the half-integral LP reduction, so each oracle call
    has at most 16(width+1)/eps vertices at threshold_scale 1.
    """
    _check_valid(g, td)
    cfg.audit.reset()
    eps, scale = cfg.epsilon, cfg.threshold_scale
    flags: set[str] = set()
    if scale != 1.0:
        flags.add("threshold-scale-override")
    cover: set[int] = set()
    depth = 0
    top_width = td.width
    cur_g, cur_td = g, td
    while True:
        ntd = make_nice(cur_g, cur_td)
        thr = 8.0 * (ntd.width + 1) / eps * scale
        value, _, _ = greedy_matching(cur_g, stop_above=thr)
        if value <= thr:
            sol = solve_vc_small(cur_g, cfg.oracle, ntd.as_td())
            cover |= sol.payload
            break
        choice = find_vc_split_node(cur_g, ntd, eps, scale)
        sub = cur_g.induced_subgraph(choice.local_vertices)
        sol_t = solve_vc_small(sub, cfg.oracle, ntd.as_td().restrict(choice.local_vertices))
        x_t = ntd.bags[choice.node]
        cover |= sol_t.payload | x_t
        cur_g = cur_g.remove_vertices(choice.local_vertices | x_t)
        cur_td = prune_subtree(ntd, choice.node, keep_t=False, drop_from_bags=x_t)
        depth += 1
    solution = Solution.of_vertices(cover)
    _assert_feasible(VC, g, solution, "vc turing kernel")
    return RunReport(
        problem="vc",
        epsilon=eps,
        threshold_scale=scale,
        width=top_width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=cfg.audit.call_count,
        max_query_vertices=cfg.audit.max_query_vertices,
        declared_query_bound=vc_query_bound(top_width, eps),
        thresholds={"easy_guard": 8.0 * (top_width + 1) / eps * scale},
        flags=tuple(sorted(flags)),
    )


# ---------------------------------------------------------------------------
# Independent Set (direct window-by-size kernel)
# ---------------------------------------------------------------------------


def approx_is_turing(g: Graph, td: TreeDecomposition, cfg: KernelConfig) -> RunReport:
    """(1+eps)-approximate Turing kernel for independent set.

    Pieces are chosen purely by their vertex count: a window of
    [(width+1)^2/eps, 10(width+1)^2/eps] local vertices loses at most a
    (width+1)-fraction of the optimum at the separator.
    """
    _check_valid(g, td)
    cfg.audit.reset()
    eps, scale = cfg.epsilon, cfg.threshold_scale
    flags: set[str] = set()
    if scale != 1.0:
        flags.add("threshold-scale-override")
    picked: set[int] = set()
    depth = 0
    top_width = td.width
    cur_g, cur_td = g, td
    while True:
        ntd = make_nice(cur_g, cur_td)
        lo = (ntd.width + 1) ** 2 / eps * scale
        hi = 10.0 * lo
        if cur_g.n <= hi:
            if cur_g.n > 0:
                sol = cfg.oracle.solve(IS, cur_g, ntd.as_td())
                _assert_feasible(IS, cur_g, sol, "is oracle answer")
                picked |= sol.payload
            break
        lo_eff = max(lo, 1.0)
        hi_eff = max(hi, 2.0 * lo_eff)
        if lo_eff != lo or hi_eff != hi:
            flags.add("window-clamped")
        idx = SubtreeIndex(ntd)
        t = find_node_by_local_size(ntd, idx, lo_eff, hi_eff)
        local = idx.local_vertices(t)
        sub = cur_g.induced_subgraph(local)
        sol_t = cfg.oracle.solve(IS, sub, ntd.as_td().restrict(local))
        _assert_feasible(IS, sub, sol_t, "is oracle answer")
        picked |= sol_t.payload
        cur_g = cur_g.remove_vertices(idx.v_set(t))
        cur_td = prune_subtree(ntd, t, keep_t=False, drop_from_bags=ntd.bags[t])
        depth += 1
    solution = Solution.of_vertices(picked)
    _assert_feasible(IS, g, solution, "is turing kernel")
    return RunReport(
        problem="is",
        epsilon=eps,
        threshold_scale=scale,
        width=top_width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=cfg.audit.call_count,
        max_query_vertices=cfg.audit.max_query_vertices,
        declared_query_bound=is_query_bound(top_width, eps),
        thresholds={
            "window_lo": (top_width + 1) ** 2 / eps * scale,
            "window_hi": 10.0 * (top_width + 1) ** 2 / eps * scale,
        },
        flags=tuple(sorted(flags)),
    )


# ---------------------------------------------------------------------------
# Edge Clique Cover
# ---------------------------------------------------------------------------


def approx_ecc_turing(g: Graph, td: TreeDecomposition, cfg: KernelConfig) -> RunReport:
    """(1+eps)-approximate Turing kernel for edge clique cover.

    Components are handled independently; the split keeps the separator on
    both sides (the oracle sees G[V_t], the remainder keeps X_t), so
    queries have at most 4(1+eps)/eps*(width+1)^4 + width+1 vertices.
    """
    _check_valid(g, td)
    cfg.audit.reset()
    eps, scale = cfg.epsilon, cfg.threshold_scale
    flags: set[str] = set()
    if scale != 1.0:
        flags.add("threshold-scale-override")
    family: set[frozenset[int]] = set()
    depth = 0
    top_width = td.width
    work: list[tuple[Graph, TreeDecomposition]] = [(g, td)]
    while work:
        cur_g, cur_td = work.pop()
        if cur_g.m == 0:
            continue  # isolated vertices carry no edges to cover
        comps = cur_g.connected_components()
        if len(comps) > 1:
            for comp in reversed(comps):
                work.append((cur_g.induced_subgraph(comp), cur_td.restrict(comp)))
            continue
        ntd = make_nice(cur_g, cur_td)
        base = 2.0 * (1 + eps) / eps * (ntd.width + 1) ** 4 * scale
        if cur_g.n <= base:
            sol = cfg.oracle.solve(ECC, cur_g, ntd.as_td())
            _assert_feasible(ECC, cur_g, sol, "ecc oracle answer")
            family |= sol.payload
            continue
        lo = max(base, 1.0)
        idx = SubtreeIndex(ntd)
        t = find_node_by_local_size(ntd, idx, lo, 2.0 * lo)
        v_t = idx.v_set(t)
        x_t = ntd.bags[t]
        sub = cur_g.induced_subgraph(v_t)
        sol_t = cfg.oracle.solve(ECC, sub, ntd.as_td().restrict(v_t))
        _assert_feasible(ECC, sub, sol_t, "ecc oracle answer")
        family |= sol_t.payload
        depth += 1
        if t == ntd.root:
            continue  # the window covered the whole graph; nothing remains
        rest = cur_g.remove_vertices(v_t - x_t)
        work.append((rest, prune_subtree(ntd, t, keep_t=True)))
    solution = Solution.of_family(family)
    _assert_feasible(ECC, g, solution, "ecc turing kernel")
    return RunReport(
        problem="ecc",
        epsilon=eps,
        threshold_scale=scale,
        width=top_width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=cfg.audit.call_count,
        max_query_vertices=cfg.audit.max_query_vertices,
        declared_query_bound=ecc_query_bound(top_width, eps),
        thresholds={
            "base_case": 2.0 * (1 + eps) / eps * (top_width + 1) ** 4 * scale,
            "window_hi": 4.0 * (1 + eps) / eps * (top_width + 1) ** 4 * scale,
        },
        flags=tuple(sorted(flags)),
    )


# ---------------------------------------------------------------------------
# Edge-Disjoint Triangle Packing
# ---------------------------------------------------------------------------


def solve_etp_small(
    g: Graph,
    k: float,
    kernel: ApproximateKernel,
    oracle: Oracle,
    td: TreeDecomposition | None = None,
) -> tuple[Solution, tuple[str, ...]]:
    """Pack triangles in a graph whose optimum is certified at most ``k``.

    A fresh 3-approximation bounds the kernel budget; if the kernel slot
    refuses, the 3-approximation itself is returned with a degraded-ratio
    flag instead of failing the run.
    """
    s3 = greedy_triangle_packing(g)
    try:
        red = kernel.reduce(g, 3 * s3.value)
    except KernelRefusal:
        return s3, ("etp-kernel-refusal-3approx-fallback",)
    raw = oracle.solve(ETP, red.graph, td if red.graph is g else None)
    lifted = red.lift(raw)
    if not is_feasible(ETP, g, lifted):
        raise InternalInvariantViolation("oracle/lift produced an infeasible packing")
    best = lifted if lifted.value >= s3.value else s3
    return best, ()


def _local_triangle_graph(g: Graph, local: frozenset[int], bag: frozenset[int]) -> Graph:
    return g.induced_subgraph(local | bag).delete_edges_within(bag)


def _greedy_complete_packing(g: Graph, packing: set[frozenset[int]]) -> set[frozenset[int]]:
    """Add every triangle whose edges are still free (restores maximality)."""
    used = {frozenset(p) for tri in packing for p in _tri_pairs(tri)}
    for u, v in g.edges():
        for w in sorted(g.neighbors(u) & g.neighbors(v)):
            if w <= v:
                continue
            e1, e2, e3 = frozenset((u, v)), frozenset((u, w)), frozenset((v, w))
            if e1 not in used and e2 not in used and e3 not in used:
                packing.add(frozenset((u, v, w)))
                used.update((e1, e2, e3))
    return packing


def _tri_pairs(tri: frozenset[int]):
    a, b, c = sorted(tri)
    return ((a, b), (a, c), (b, c))


def approx_etp_turing(g: Graph, td: TreeDecomposition, cfg: KernelConfig) -> RunReport:
    """(1+eps)-approximate Turing kernel for edge-disjoint triangle packing.

    The local graph at node t is G[V_t] with the edges inside the bag
    deleted, so the pieces used at different steps are edge-disjoint and
    their packings combine freely. Splitting sacrifices triangles that
    straddle a bag's internal edges; a final greedy completion packs any
    such triangle whose edges all stayed free, so the output is maximal.
    """
    _check_valid(g, td)
    cfg.audit.reset()
    eps, scale = cfg.epsilon, cfg.threshold_scale
    kernel = cfg.psaks_slot()
    flags: set[str] = set()
    if scale != 1.0:
        flags.add("threshold-scale-override")
    packing: set[frozenset[int]] = set()
    depth = 0
    top_width = td.width
    cur_g, cur_td = g, td
    while True:
        ntd = make_nice(cur_g, cur_td)
        unit = (ntd.width + 1) ** 2 / eps * scale
        s3 = greedy_triangle_packing(cur_g)
        if s3.value <= 18.0 * unit:
            sol, fl = solve_etp_small(cur_g, 3 * s3.value, kernel, cfg.oracle, ntd.as_td())
            flags |= set(fl)
            packing |= sol.payload
            break
        node, local, sol_t, fl = _find_etp_split(cur_g, ntd, unit, kernel, cfg.oracle)
        flags |= set(fl)
        if not local:
            sol, fl2 = solve_etp_small(cur_g, 3 * s3.value, kernel, cfg.oracle, ntd.as_td())
            flags |= set(fl2) | {"etp-empty-split-fallback"}
            packing |= sol.payload
            break
        packing |= sol_t.payload
        cur_g = cur_g.remove_vertices(local)
        cur_td = prune_subtree(ntd, node, keep_t=True)
        depth += 1
    solution = Solution.of_family(_greedy_complete_packing(g, packing))
    _assert_feasible(ETP, g, solution, "etp turing kernel")
    return RunReport(
        problem="etp",
        epsilon=eps,
        threshold_scale=scale,
        width=top_width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=cfg.audit.call_count,
        max_query_vertices=cfg.audit.max_query_vertices,
        declared_query_bound=None,  # depends on the plugged kernel slot
        thresholds={
            "easy_guard": 18.0 * (top_width + 1) ** 2 / eps * scale,
            "local_guard": 6.0 * (top_width + 1) ** 2 / eps * scale,
        },
        flags=tuple(sorted(flags)),
    )


def _find_etp_split(
    g: Graph,
    ntd: NiceTreeDecomposition,
    unit: float,
    kernel: ApproximateKernel,
    oracle: Oracle,
) -> tuple[int, frozenset[int], Solution, tuple[str, ...]]:
    """Descend to a node whose local packing graph has a small 3-approximation.

    One-child steps lose at most width+1 packed triangles; at a join the
    local graphs split edge-disjointly, so the larger child's measured
    packing stays above the lower window bound.
    """
    walk = _Descender(g, ntd)
    pending: Solution | None = None
    while True:
        bag = ntd.bags[walk.node]
        local = frozenset(walk.local)
        gt = _local_triangle_graph(g, local, bag)
        s3 = greedy_triangle_packing(gt) if pending is None else pending
        pending = None
        if s3.value <= 6.0 * unit:
            sol, fl = solve_etp_small(gt, 3 * s3.value, kernel, oracle)
            return walk.node, local, sol, fl
        kids = walk.children()
        if not kids:
            raise InternalInvariantViolation("leaf reached with packed triangles")
        if len(kids) == 1:
            walk.descend_unary()
            continue
        s1, s2 = walk.join_split()
        g1 = _local_triangle_graph(g, s1, ntd.bags[kids[0]])
        g2 = _local_triangle_graph(g, s2, ntd.bags[kids[1]])
        p1 = greedy_triangle_packing(g1)
        p2 = greedy_triangle_packing(g2)
        if (p1.value, -kids[0]) >= (p2.value, -kids[1]):
            chosen, child_local = 0, s1
            pending = p1
        else:
            chosen, child_local = 1, s2
            pending = p2
        if pending.value < unit:
            raise InternalInvariantViolation(
                "join split lost the triangle window (both children too small)"
            )
        walk.descend_join(chosen, child_local)


# ---------------------------------------------------------------------------
# Connected Vertex Cover
# ---------------------------------------------------------------------------


class _TooBig:
    """Certificate that the optimum exceeds the descent guard."""

    def __repr__(self) -> str:
        return "TOO_BIG"


TOO_BIG = _TooBig()


def cvc_obtain_approx(
    g: Graph,
    td: TreeDecomposition | None,
    delta: float,
    kernel: ApproximateKernel,
    oracle: Oracle,
    *,
    width: int,
    threshold_scale: float = 1.0,
):
    """A min(c(1+delta), 2)-approximate connected cover, or TOO_BIG.

    TOO_BIG certifies the optimum exceeds 100*width^2/delta (scaled). A
    kernel refusal on a graph the oracle can still take falls back to a
    direct query, which is flagged.
    """
    if g.m == 0:
        return Solution.of_vertices(()), ()
    s2 = cvc_2approx(g)
    if s2.value > 200.0 * width * width / delta * threshold_scale:
        return TOO_BIG, ()
    flags: tuple[str, ...] = ()
    try:
        red = kernel.reduce(g, s2.value)
    except KernelRefusal:
        if g.n <= oracle.size_cap:
            lifted = oracle.solve(CVC, g, td)
            flags = ("cvc-kernel-refusal-direct-oracle",)
        else:
            raise
    else:
        raw = oracle.solve(CVC, red.graph, td if red.graph is g else None)
        lifted = red.lift(raw)
    if not is_feasible(CVC, g, lifted):
        raise InternalInvariantViolation("cvc oracle/lift produced an infeasible cover")
    best = lifted if lifted.value <= s2.value else s2
    return best, flags


def _contract_local(
    g: Graph,
    sc: TreeDecomposition,
    node: int,
    children: dict[int, tuple[int, ...]],
    v_set: frozenset[int],
) -> tuple[Graph, TreeDecomposition]:
    """G_t: G[V_t] with the bag contracted to one vertex, plus a matching
    decomposition of the subtree."""
    x_t = sc.bags[node]
    sub = g.induced_subgraph(v_set)
    nodes = []
    stack = [node]
    while stack:
        s = stack.pop()
        nodes.append(s)
        stack.extend(children[s])
    if not x_t:
        bags = {s: sc.bags[s] for s in nodes}
        edges = [(s, c) for s in nodes for c in children[s]]
        return sub, TreeDecomposition(bags, edges, root=node)
    z = max(g.vertices) + 1
    gc = sub.identify_vertices(x_t, z)
    bags = {
        s: ((sc.bags[s] - x_t) | {z}) if sc.bags[s] & x_t else sc.bags[s] for s in nodes
    }
    edges = [(s, c) for s in nodes for c in children[s]]
    return gc, TreeDecomposition(bags, edges, root=node)


def find_cvc_split_node(
    g: Graph,
    sc: TreeDecomposition,
    delta: float,
    kernel: ApproximateKernel,
    oracle: Oracle,
    *,
    width: int,
    threshold_scale: float = 1.0,
) -> tuple[int, Solution, tuple[str, ...]]:
    """Descend the subconnected decomposition to a child whose contracted
    local instance yields an approximate cover of size >= 10*width/delta.

    Recurses into any child whose optimum is still certified too big; if
    every child answers small, the analysis is contradicted, which is an
    internal invariant violation at scale 1 and a flagged union fallback
    otherwise.
    """
    children, vsets = rooted_subtree_vertices(sc)
    root = sc.root if sc.root is not None else sc.nodes[0]
    t = root
    flags: set[str] = set()
    min_size = 10.0 * width / delta * threshold_scale
    while True:
        kids = children[t]
        results: list[tuple[int, Solution]] = []
        too_big_child = None
        for c in kids:
            gc, tdc = _contract_local(g, sc, c, children, vsets[c])
            res, fl = cvc_obtain_approx(
                gc, tdc, delta, kernel, oracle, width=width, threshold_scale=threshold_scale
            )
            flags |= set(fl)
            if res is TOO_BIG:
                too_big_child = c
                break
            results.append((c, res))
        if too_big_child is not None:
            t = too_big_child
            continue
        qualifying = [(c, sol) for c, sol in results if sol.value >= min_size]
        if qualifying:
            c, sol = max(qualifying, key=lambda p: (p[1].value, -p[0]))
            return c, sol, tuple(sorted(flags))
        if threshold_scale == 1.0:
            raise InternalInvariantViolation(
                "cvc descent exhausted: every child answered below the size window"
            )
        # Scaled runs may legitimately exhaust; assemble the union cover of G_t.
        assembled: set[int] = set()
        for c, sol in results:
            local = g.induced_subgraph(vsets[c])
            if sc.bags[c]:
                lifted = connectify_vertex_cover(local, sc.bags[c], sol)
            else:
                lifted = sol
            assembled |= lifted.payload
        x_t = sc.bags[t]
        z = max(g.vertices) + 1  # same fresh id _contract_local picks
        payload = (assembled - x_t) | ({z} if x_t else set())
        fallback = Solution.of_vertices(payload)
        gc, _tdc = _contract_local(g, sc, t, children, vsets[t])
        if not is_feasible(CVC, gc, fallback):
            raise InternalInvariantViolation("cvc fallback union cover infeasible")
        flags.add("cvc-descent-exhausted-fallback")
        return t, fallback, tuple(sorted(flags))


def approx_cvc_turing(g: Graph, td: TreeDecomposition, cfg: KernelConfig) -> RunReport:
    """(1+eps)-approximate Turing kernel for connected vertex cover.

    Works over a subconnected decomposition; found pieces are solved with
    the bag contracted to one vertex, reconnected via connectify, and the
    remainder recurses with the bag contracted in both graph and
    decomposition (re-validated each level).
    """
    if not g.is_connected():
        raise ValueError("connected vertex cover needs a connected graph")
    _check_valid(g, td)
    cfg.audit.reset()
    eps, scale = cfg.epsilon, cfg.threshold_scale
    delta = eps / 3.0
    kernel = cfg.psaks_slot()
    flags: set[str] = set()
    if scale != 1.0:
        flags.add("threshold-scale-override")
    total: set[int] = set()
    contraction_ids: set[int] = set()
    depth = 0
    top_width = td.width
    cur_g, cur_td = g, td
    next_z = (max(g.vertices) + 1) if g.n else 0
    while True:
        if cur_g.m == 0:
            break
        if not cur_g.is_connected():
            raise InternalInvariantViolation("cvc recursion lost connectivity")
        ntd = make_nice(cur_g, cur_td)
        ell = ntd.width
        res, fl = cvc_obtain_approx(
            cur_g, ntd.as_td(), delta, kernel, cfg.oracle, width=ell, threshold_scale=scale
        )
        flags |= set(fl)
        if res is not TOO_BIG:
            total |= res.payload
            break
        sc = make_subconnected(cur_g, ntd)
        t, s_t, fl2 = find_cvc_split_node(
            cur_g, sc, delta, kernel, cfg.oracle, width=ell, threshold_scale=scale
        )
        flags |= set(fl2)
        children, vsets = rooted_subtree_vertices(sc)
        v_t = vsets[t]
        x_t = sc.bags[t]
        sub = cur_g.induced_subgraph(v_t)
        if x_t:
            s_t_prime = connectify_vertex_cover(sub, x_t, s_t)
        else:
            s_t_prime = s_t
        total |= s_t_prime.payload
        depth += 1
        if not x_t:
            # the piece was the whole remaining graph
            break
        z = next_z
        next_z += 1
        contraction_ids.add(z)
        cur_g = cur_g.remove_vertices(v_t - x_t).identify_vertices(x_t, z)
        pruned = _prune_rooted(sc, t, children)
        cur_td = pruned.contract_bag_vertices(x_t, z)
        rep = validate(cur_g, cur_td)
        if not rep.valid:
            raise InternalInvariantViolation(
                "contracted decomposition invalid: " + "; ".join(rep.violations())
            )
    solution = Solution.of_vertices(frozenset(total) - contraction_ids)
    _assert_feasible(CVC, g, solution, "cvc turing kernel")
    return RunReport(
        problem="cvc",
        epsilon=eps,
        threshold_scale=scale,
        width=top_width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=cfg.audit.call_count,
        max_query_vertices=cfg.audit.max_query_vertices,
        declared_query_bound=None,  # exponent depends on the external PSAKS slot
        thresholds={
            "too_big_guard": 200.0 * top_width * top_width / delta * scale,
            "piece_min_size": 10.0 * top_width / delta * scale,
        },
        flags=tuple(sorted(flags)),
    )


def _prune_rooted(sc: TreeDecomposition, t: int, children: dict[int, tuple[int, ...]]) -> TreeDecomposition:
    """Drop the strict subtree below ``t`` from a rooted decomposition."""
    doomed: set[int] = set()
    stack = list(children[t])
    while stack:
        s = stack.pop()
        doomed.add(s)
        stack.extend(children[s])
    bags = {s: b for s, b in sc.bags.items() if s not in doomed}
    edges = [(a, b) for a, b in sc.tree_edges if a not in doomed and b not in doomed]
    return TreeDecomposition(bags, edges, root=sc.root)
