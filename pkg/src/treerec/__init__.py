"""Training-free recommender for tree-structured multi-task CNN architectures.

Pipeline: detect branching points in a backbone graph, enumerate every
tree-structured layout of the tasks over those points, estimate each
layout's task performance from measured two-task results, account compute
costs, and answer budget-constrained top-k queries from a persisted table.
"""

from .costmodel import CostProfile, independent_cost, layout_cost, models_equivalent, relative_reduction
from .enumerator import (
    count_layouts_oracle,
    enumerate_layouts,
    oracle_chain_keys,
    two_task_space_size,
)
from .estimator import (
    Metric,
    MetricSpec,
    TaskWeights,
    TwoTaskTable,
    estimate_task_scores,
    normalize_weights,
    overall_relative_performance,
    ranking_score,
    relative_performance,
    svde,
    task_weights,
)
from .graphdetect import (
    CandidateBlock,
    ComputationBlock,
    ComputationGraph,
    GraphNode,
    KindTable,
    coarsen_blocks,
    detect_blocks,
    find_cut_tensors,
    merge_unparameterized,
    parse_graph,
    segment_candidate_blocks,
)
from .layout import (
    CutSpec,
    Layout,
    apply_cut,
    available_cuts,
    branch_depth,
    canonicalize,
    initial_layout,
    is_valid,
)
from .recommender import (
    Budget,
    PerformanceRecord,
    PerformanceTable,
    Recommendation,
    RankingReport,
    build_table,
    evaluate_ranking,
    pearson,
    rank_vector,
    recommend,
)

__all__ = [
    "Budget",
    "CandidateBlock",
    "ComputationBlock",
    "ComputationGraph",
    "CostProfile",
    "CutSpec",
    "GraphNode",
    "KindTable",
    "Layout",
    "Metric",
    "MetricSpec",
    "PerformanceRecord",
    "PerformanceTable",
    "RankingReport",
    "Recommendation",
    "TaskWeights",
    "TwoTaskTable",
    "apply_cut",
    "available_cuts",
    "branch_depth",
    "build_table",
    "canonicalize",
    "coarsen_blocks",
    "count_layouts_oracle",
    "detect_blocks",
    "enumerate_layouts",
    "estimate_task_scores",
    "evaluate_ranking",
    "find_cut_tensors",
    "independent_cost",
    "initial_layout",
    "is_valid",
    "layout_cost",
    "merge_unparameterized",
    "models_equivalent",
    "normalize_weights",
    "oracle_chain_keys",
    "overall_relative_performance",
    "parse_graph",
    "pearson",
    "rank_vector",
    "ranking_score",
    "recommend",
    "relative_performance",
    "relative_reduction",
    "segment_candidate_blocks",
    "svde",
    "task_weights",
    "two_task_space_size",
]
