"""Differentially private synthetic graphs that preserve all cut values."""

from .graph import (
    WeightedGraph,
    InducedSubgraph,
    GraphInputError,
    EdgeListParseError,
    OracleTooLargeError,
    PrivacyGuardError,
    cut_weight,
    cut_weight_pairs,
    graph_sparsity,
    is_neighboring,
    gnp,
    complete,
    planted_two_expanders,
    star,
    d_regular_random,
    generate,
    load_edge_list,
    save_edge_list,
)
from .privacy import PrivacyBudget, BudgetLedger, BudgetError, NoiseSource, compose, audit_scalar_mechanism
from .dense import dense_synth, dense_error_bound, laplace_baseline
from .cutnorm import cut_norm_exact, cut_norm_heuristic
from .sparse import sparse_synth, sparse_synth_base, boost_median, sparse_error_bound
from .expander import (
    OracleConfig,
    most_balanced_sparse_cut,
    dp_most_balanced_sparse_cut,
    build_schedule,
    expander_decompose,
    psi_floor,
)
from .sparsify import er_sparsify, effective_resistances
from .pipeline import PipelineConstants, SynthReport, dp_cut_synth, dp_sparse_pipeline, delta_budget
from .applications import (
    CutSolution,
    private_max_cut,
    private_max_bisection,
    private_max_k_cut,
    private_min_bisection,
)

__version__ = "0.1.0"
