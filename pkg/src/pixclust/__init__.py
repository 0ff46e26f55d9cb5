"""Hierarchical pixel clustering for piecewise-constant image approximation.

Builds hierarchical sequences of grayscale image approximations that
minimize total squared error, with exact increment formulas for cluster
merging, splitting and correction, an exact optimal-clustering oracle, and
segment-count reduction for connected-segment output.
"""

from ._backend import COMPILED
from .clustering import (
    ApproximationSequence,
    ApproxRecord,
    Dendrogram,
    best_binary_split,
    build_compact_representation,
    build_histogram,
    cut_dendrogram,
    expand_to_sequence,
    greedy_merge_adjacent_bins,
    greedy_merge_all_pairs,
)
from .core import (
    ClusterStats,
    Partition,
    brute_force_e,
    delta_e_correct,
    delta_e_merge,
    delta_e_split,
    merge_stats,
    remove_stats,
    stats_from_pixels,
)
from .correction import correct_partition, enumerate_candidates, kmeans_step
from .histogram import Histogram
from .image import Image
from .imgio import read_pgm, render_partition, write_curve_csv, write_pgm
from .optimal import ThresholdSet, exhaustive_optimal, optimal_partition, optimal_sequence
from .segments import (
    SegmentMap,
    StoppingCondition,
    label_segments,
    merge_connected_segments,
    reduce_segments,
    reduced_sequence,
)

__version__ = "0.1.0"

__all__ = [
    "COMPILED",
    "ApproximationSequence",
    "ApproxRecord",
    "ClusterStats",
    "Dendrogram",
    "Histogram",
    "Image",
    "Partition",
    "SegmentMap",
    "StoppingCondition",
    "ThresholdSet",
    "best_binary_split",
    "brute_force_e",
    "build_compact_representation",
    "build_histogram",
    "correct_partition",
    "cut_dendrogram",
    "delta_e_correct",
    "delta_e_merge",
    "delta_e_split",
    "enumerate_candidates",
    "exhaustive_optimal",
    "expand_to_sequence",
    "greedy_merge_adjacent_bins",
    "greedy_merge_all_pairs",
    "kmeans_step",
    "label_segments",
    "merge_connected_segments",
    "merge_stats",
    "optimal_partition",
    "optimal_sequence",
    "read_pgm",
    "reduce_segments",
    "reduced_sequence",
    "remove_stats",
    "render_partition",
    "stats_from_pixels",
    "write_curve_csv",
    "write_pgm",
]
