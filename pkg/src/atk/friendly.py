"""The friendly-problem meta-framework.

A friendly problem bundles the four ingredients that make the generic
separator-splitting Turing kernel work: disjoint-union additivity with
split/merge, a bounded deletion effect f with an extend algorithm, a
reduce-and-lift kernel with size function h, and a phi-approximation.
Six built-in instances are provided; the engine itself is problem-blind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .approx import (
    ApproximateKernel,
    clique_cover_kernel,
    clique_cover_trivial,
    degeneracy_is,
    eds_2approx,
    fvs_2approx,
    is_degeneracy_kernel,
    maximal_h_packing,
    passthrough_kernel,
    vc_2approx,
    vc_nt_kernel,
)
from .errors import InternalInvariantViolation, KernelRefusal
from .graph import Graph
from .kernels import RunReport
from .oracles import Oracle, audited
from .problems import (
    CLIQUE_COVER,
    EDS,
    FVS,
    IS,
    VC,
    ProblemKind,
    Solution,
    evaluate,
    h_packing,
    is_feasible,
)
from .treedecomp import (
    NiceTreeDecomposition,
    SubtreeIndex,
    TreeDecomposition,
    make_nice,
    prune_subtree,
    validate,
)


@dataclass(frozen=True)
class FriendlyProblem:
    """A problem descriptor satisfying the four friendliness conditions."""

    name: str
    kind: ProblemKind
    direction: str  # "min" | "max"
    f: Callable[[float], float]
    phi: Callable[[float, int], float]
    phi_approx: Callable[[Graph], Solution]
    psaks: ApproximateKernel
    psaks_real: bool
    extend: Callable[[Graph, frozenset, Solution], Solution]

    def feasible(self, g: Graph, sol: Solution) -> bool:
        return is_feasible(self.kind, g, sol)

    def evaluate(self, g: Graph, sol: Solution) -> float:
        return evaluate(self.kind, g, sol.payload)

    def restrict_payload(self, payload: frozenset, keep: frozenset[int]) -> frozenset:
        if self.kind.name in ("vc", "is", "fvs"):
            return frozenset(v for v in payload if v in keep)
        return frozenset(c for c in payload if c <= keep)

    def split(
        self, g: Graph, g1: Graph, g2: Graph, sol: Solution
    ) -> tuple[Solution, Solution]:
        p1 = self.restrict_payload(sol.payload, g1.vertex_set)
        p2 = self.restrict_payload(sol.payload, g2.vertex_set)
        return Solution(p1, len(p1)), Solution(p2, len(p2))

    def merge(self, s1: Solution, s2: Solution) -> Solution:
        payload = s1.payload | s2.payload
        return Solution(payload, len(payload))


def _extend_add_vertices(g: Graph, x: frozenset, sol: Solution) -> Solution:
    return Solution.of_vertices(sol.payload | x)


def _extend_identity(g: Graph, x: frozenset, sol: Solution) -> Solution:
    return sol


def _extend_singletons(g: Graph, x: frozenset, sol: Solution) -> Solution:
    return Solution.of_family(set(sol.payload) | {frozenset([v]) for v in x})


def _extend_incident_edges(g: Graph, x: frozenset, sol: Solution) -> Solution:
    added = set(sol.payload)
    for v in sorted(x):
        nbrs = g.neighbors(v)
        if nbrs:
            added.add(frozenset((v, min(nbrs))))
    return Solution.of_edges(added)


def builtin_instances() -> dict[str, FriendlyProblem]:
    """The six built-in friendly problems.

    The registry records which kernel slots are real (vc, is, cc) and which
    are guarded pass-throughs standing in for external constructions
    (H-packing, fvs, eds).
    """
    k2 = Graph([0, 1], [(0, 1)])
    k3 = Graph([0, 1, 2], [(0, 1), (0, 2), (1, 2)])
    p3 = Graph([0, 1, 2], [(0, 1), (1, 2)])
    reg = {
        "vc": FriendlyProblem(
            name="vc",
            kind=VC,
            direction="min",
            f=lambda x: x,
            phi=lambda s, l: 2.0 * s,
            phi_approx=vc_2approx,
            psaks=vc_nt_kernel(),
            psaks_real=True,
            extend=_extend_add_vertices,
        ),
        "is": FriendlyProblem(
            name="is",
            kind=IS,
            direction="max",
            f=lambda x: x,
            phi=lambda s, l: (l + 1.0) * s,
            phi_approx=degeneracy_is,
            psaks=is_degeneracy_kernel(),
            psaks_real=True,
            extend=_extend_identity,
        ),
        "cc": FriendlyProblem(
            name="cc",
            kind=CLIQUE_COVER,
            direction="min",
            f=lambda x: x,
            phi=lambda s, l: (l + 1.0) * s,
            phi_approx=clique_cover_trivial,
            psaks=clique_cover_kernel(),
            psaks_real=True,
            extend=_extend_singletons,
        ),
        "fvs": FriendlyProblem(
            name="fvs",
            kind=FVS,
            direction="min",
            f=lambda x: x,
            phi=lambda s, l: 2.0 * s,
            phi_approx=fvs_2approx,
            psaks=passthrough_kernel(math.inf),
            psaks_real=False,
            extend=_extend_add_vertices,
        ),
        "eds": FriendlyProblem(
            name="eds",
            kind=EDS,
            direction="min",
            f=lambda x: x,
            phi=lambda s, l: 2.0 * s,
            phi_approx=eds_2approx,
            psaks=passthrough_kernel(math.inf),
            psaks_real=False,
            extend=_extend_incident_edges,
        ),
    }
    for label, pattern in (("k2", k2), ("k3", k3), ("p3", p3)):
        kind = h_packing(pattern)
        reg[f"hpack:{label}"] = FriendlyProblem(
            name=f"hpack:{label}",
            kind=kind,
            direction="max",
            f=lambda x: x,
            phi=(lambda n_h: lambda s, l: n_h * s)(pattern.n),
            phi_approx=(lambda pat: lambda g: maximal_h_packing(g, pat))(pattern),
            psaks=passthrough_kernel(math.inf),
            psaks_real=False,
            extend=_extend_identity,
        )
    return reg


# ---------------------------------------------------------------------------
# The find-a-split-node subroutine, minimization and maximization forms
# ---------------------------------------------------------------------------


@dataclass
class SplitOutcome:
    direct: Solution | None
    node: int | None
    solution: Solution | None
    v_set: frozenset | None
    bag: frozenset | None
    flags: tuple[str, ...]


class _PhiCache:
    """Lazy per-node phi-approximations on G[V_t \\ X_t]."""

    def __init__(self, g: Graph, ntd: NiceTreeDecomposition, problem: FriendlyProblem):
        self.g = g
        self.ntd = ntd
        self.problem = problem
        self.idx = SubtreeIndex(ntd)
        self._sol: dict[int, Solution] = {}

    def local_graph(self, t: int) -> Graph:
        return self.g.induced_subgraph(self.idx.local_vertices(t))

    def solution(self, t: int) -> Solution:
        cached = self._sol.get(t)
        if cached is None:
            cached = self.problem.phi_approx(self.local_graph(t))
            self._sol[t] = cached
        return cached

    def value(self, t: int) -> float:
        return self.solution(t).value


def _psaks_solve(
    problem: FriendlyProblem,
    slot: ApproximateKernel,
    sub_g: Graph,
    budget: float,
    oracle: Oracle,
    td: TreeDecomposition | None,
) -> tuple[Solution, tuple[str, ...]]:
    """Reduce, query the oracle, lift; kernel refusal within the oracle's
    reach degrades to a flagged direct query."""
    try:
        red = slot.reduce(sub_g, budget)
    except KernelRefusal:
        if sub_g.n <= oracle.size_cap:
            sol = oracle.solve(problem.kind, sub_g, td)
            if not problem.feasible(sub_g, sol):
                raise InternalInvariantViolation("oracle answer infeasible")
            return sol, ("kernel-refusal-direct-oracle",)
        raise
    raw = oracle.solve(problem.kind, red.graph, td if red.graph is sub_g else None)
    lifted = red.lift(raw)
    if not problem.feasible(sub_g, lifted):
        raise InternalInvariantViolation("lifted oracle answer infeasible")
    return lifted, ()


def _best(problem: FriendlyProblem, a: Solution, b: Solution) -> Solution:
    if problem.direction == "min":
        return a if a.value <= b.value else b
    return a if a.value >= b.value else b


def find_split_node(
    g: Graph,
    ntd: NiceTreeDecomposition,
    delta: float,
    problem: FriendlyProblem,
    oracle: Oracle,
    threshold_scale: float = 1.0,
) -> SplitOutcome:
    """Either solve g outright through the kernel slot, or find a node t
    whose local optimum is at least f(width+1)/delta along with a
    c(1+delta)-approximate local solution.

    The descent walks to a node whose phi-value exceeds the budget
    threshold while all its children sit below it, then applies the
    one-child / join case analysis.
    """
    ell = ntd.width
    ff = problem.f
    k = (2.0 * ff(ell + 1) / delta + ff(1)) * threshold_scale
    phi_k = problem.phi(k, ell)
    budget = phi_k + ell
    maximize = problem.direction == "max"
    threshold = k if maximize else phi_k
    slot = problem.psaks if problem.psaks_real else passthrough_kernel(oracle.size_cap)
    cache = _PhiCache(g, ntd, problem)
    flags: set[str] = set()
    root_sol = cache.solution(ntd.root)
    if root_sol.value <= threshold:
        sol, fl = _psaks_solve(problem, slot, g, budget, oracle, ntd.as_td())
        flags |= set(fl)
        if not maximize:
            sol = _best(problem, sol, root_sol)
        return SplitOutcome(sol, None, None, None, None, tuple(sorted(flags)))
    p = ntd.root
    while True:
        kids = ntd.children[p]
        over = [c for c in kids if cache.value(c) > threshold]
        if not over:
            break
        p = max(over, key=lambda c: (cache.value(c), -c))
    kids = ntd.children[p]
    if not kids:
        raise InternalInvariantViolation("leaf with positive phi-value")
    hint: Solution | None = None
    if len(kids) == 1:
        t = kids[0]
        hint = cache.solution(t)
    elif maximize:
        gp = cache.local_graph(p)
        g1 = cache.local_graph(kids[0])
        g2 = cache.local_graph(kids[1])
        s1, s2 = problem.split(gp, g1, g2, cache.solution(p))
        t = kids[0] if (s1.value, -kids[0]) >= (s2.value, -kids[1]) else kids[1]
    else:
        v1, v2 = cache.value(kids[0]), cache.value(kids[1])
        if v1 <= phi_k / 2 and v2 <= phi_k / 2:
            t = p
            hint = problem.merge(cache.solution(kids[0]), cache.solution(kids[1]))
        else:
            t = kids[0] if (v1, -kids[0]) >= (v2, -kids[1]) else kids[1]
            hint = cache.solution(t)
    local = cache.idx.local_vertices(t)
    sub = g.induced_subgraph(local)
    sol, fl = _psaks_solve(problem, slot, sub, budget, oracle, ntd.as_td().restrict(local))
    flags |= set(fl)
    if not maximize and hint is not None:
        sol = _best(problem, sol, hint)
    return SplitOutcome(
        None, t, sol, cache.idx.v_set(t), ntd.bags[t], tuple(sorted(flags))
    )


# ---------------------------------------------------------------------------
# The generic Turing kernel
# ---------------------------------------------------------------------------


def approx_friendly_turing(
    g: Graph,
    td: TreeDecomposition,
    eps: float,
    problem: FriendlyProblem,
    oracle: Oracle,
    threshold_scale: float = 1.0,
) -> RunReport:
    """(1+eps)-approximate Turing kernel for any friendly problem.

    Splits at the node the find-node subroutine returns, recurses on G - V_t,
    and reassembles with the problem's extend algorithm (minimization) or
    plain union (maximization).
    """
    if not 0 < eps <= 1:
        raise ValueError("epsilon must be in (0, 1]")
    report = validate(g, td)
    if not report.valid:
        raise ValueError("invalid tree decomposition: " + "; ".join(report.violations()))
    wrapped, audit = audited(oracle)
    delta = eps / 3.0
    flags: set[str] = set()
    if threshold_scale != 1.0:
        flags.add("threshold-scale-override")
    depth = 0

    def recurse(cur_g: Graph, cur_td: TreeDecomposition) -> Solution:
        nonlocal depth
        ntd = make_nice(cur_g, cur_td)
        outcome = find_split_node(cur_g, ntd, delta, problem, wrapped, threshold_scale)
        flags.update(outcome.flags)
        if outcome.direct is not None:
            return outcome.direct
        depth += 1
        rest_g = cur_g.remove_vertices(outcome.v_set)
        rest_td = prune_subtree(ntd, outcome.node, keep_t=False, drop_from_bags=outcome.bag)
        rest_sol = recurse(rest_g, rest_td)
        merged = problem.merge(rest_sol, outcome.solution)
        if problem.direction == "min":
            return problem.extend(cur_g, outcome.bag, merged)
        return merged

    solution = recurse(g, td)
    if not problem.feasible(g, solution):
        raise InternalInvariantViolation("friendly kernel produced an infeasible solution")
    width = td.width
    declared = None
    if problem.psaks_real:
        k0 = 6.0 * problem.f(width + 1) / eps + problem.f(1)
        declared = problem.psaks.size_fn(delta, problem.phi(k0, width) + width)
    return RunReport(
        problem=problem.name,
        epsilon=eps,
        threshold_scale=threshold_scale,
        width=width,
        solution=solution,
        recursion_depth=depth,
        oracle_calls=audit.call_count,
        max_query_vertices=audit.max_query_vertices,
        declared_query_bound=declared,
        thresholds={
            "budget_k": (2.0 * problem.f(width + 1) / delta + problem.f(1)) * threshold_scale,
        },
        flags=tuple(sorted(flags)),
    )
