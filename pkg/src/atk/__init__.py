"""Approximate Turing kernelization for graph problems parameterized by treewidth."""

from .errors import InternalInvariantViolation, KernelRefusal, OracleRefused
from .graph import Graph
from .problems import (
    CLIQUE_COVER,
    CVC,
    ECC,
    EDS,
    ETP,
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
    ValidationReport,
    find_node_by_local_size,
    heuristic_td,
    make_nice,
    make_subconnected,
    validate,
)
from .oracles import (
    Oracle,
    OracleAudit,
    audited,
    brute_force_solve,
    exact_brute_oracle,
    exact_dp_oracle,
    lossy_wrap,
    td_dp_solve,
    trianglefree_ecc_oracle,
)
from .approx import (
    ApproximateKernel,
    NTPartition,
    augment_triangle_packing,
    clique_cover_trivial,
    connectify_vertex_cover,
    cvc_2approx,
    degeneracy_is,
    eds_2approx,
    fvs_2approx,
    greedy_triangle_packing,
    maximal_h_packing,
    nt_reduce,
    passthrough_kernel,
    solve_vc_small,
    vc_2approx,
    vc_nt_kernel,
)
from .kernels import (
    KernelConfig,
    RunReport,
    approx_cvc_turing,
    approx_ecc_turing,
    approx_etp_turing,
    approx_is_turing,
    approx_vc_turing,
    find_vc_split_node,
    solve_etp_small,
)
from .friendly import (
    FriendlyProblem,
    approx_friendly_turing,
    builtin_instances,
    find_split_node,
)
from .generate import gen_connected_partial_ktree, gen_partial_ktree
from .pace import ParseError, parse_gr, parse_td, write_gr, write_td

__version__ = "0.1.0"
