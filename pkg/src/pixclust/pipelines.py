"""Shared pipeline orchestration for the CLI, the verifier and the tests.

Every pipeline turns an image and a g range into curve records; ``compare``
runs the full reproducible curve family with one tag per pipeline.
"""

from __future__ import annotations

import warnings

import numpy as np

from .clustering import (
    ApproximationSequence,
    build_compact_representation,
    expand_to_sequence,
    merge_dendrogram_from_image,
)
from .core import Partition
from .correction import correct_partition, iterate_kmeans
from .histogram import build_histogram
from .image import Image
from .imgio import CurveRecord
from .optimal import optimal_sequence
from .segments import StoppingCondition, merge_connected_segments, reduced_sequence

PIPELINES = (
    "split",
    "merge-all",
    "merge-adjacent",
    "optimal",
    "kmeans",
    "correct",
    "reduce",
    "ms-merge",
)

COMPARE_TAGS = (
    "optimal",
    "split",
    "merge-all",
    "merge-adjacent",
    "reduce-one-segment",
    "reduce-unique-means",
    "ms-merge",
)


def _records(tag: str, seq: ApproximationSequence, g_lo: int, g_hi: int) -> list[CurveRecord]:
    return [
        CurveRecord(tag, r.g, r.e, r.sigma, r.segment_count)
        for r in seq
        if g_lo <= r.g <= g_hi
    ]


def split_sequence(image: Image, g_max: int) -> tuple[ApproximationSequence, list[Partition]]:
    """Top-down expansion with its nested partitions."""
    d = build_compact_representation(image)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return expand_to_sequence(d, g_max, with_partitions=True)


def _quiet_expand(d, g_max: int) -> ApproximationSequence:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        seq, _ = expand_to_sequence(d, g_max, with_partitions=False)
    return seq


def curve(
    image: Image,
    pipeline: str,
    g_lo: int,
    g_hi: int,
    stop: StoppingCondition | None = None,
    tag: str | None = None,
) -> list[CurveRecord]:
    """Curve records of one pipeline over the inclusive g range."""
    if pipeline not in PIPELINES:
        raise ValueError(f"unknown pipeline {pipeline!r}; options: {', '.join(PIPELINES)}")
    if not 1 <= g_lo <= g_hi:
        raise ValueError(f"invalid g range {g_lo}..{g_hi}")
    tag = tag or pipeline
    if pipeline == "optimal":
        h = build_histogram(image)
        seq = optimal_sequence(h, min(g_hi, h.populated_count))
        return _records(tag, seq, g_lo, g_hi)
    if pipeline == "split":
        d = build_compact_representation(image)
        return _records(tag, _quiet_expand(d, g_hi), g_lo, g_hi)
    if pipeline in ("merge-all", "merge-adjacent"):
        d = merge_dendrogram_from_image(image, adjacent=pipeline == "merge-adjacent")
        return _records(tag, _quiet_expand(d, g_hi), g_lo, g_hi)
    if pipeline == "reduce":
        stop = stop or StoppingCondition.one_segment_per_cluster()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            seq = reduced_sequence(image, g_hi, stop)
        return _records(tag, seq, g_lo, g_hi)
    if pipeline == "ms-merge":
        seq = merge_connected_segments(image, 1)
        return _records(tag, seq, g_lo, g_hi)
    # kmeans / correct: refine each split partition at fixed g
    _, parts = split_sequence(image, g_hi)
    h = build_histogram(image)
    out = []
    for part in parts:
        if part.g < g_lo:
            continue
        refined = iterate_kmeans(part, h) if pipeline == "kmeans" else correct_partition(part, h)
        out.append(
            CurveRecord(tag, part.g, refined.e_total, (refined.e_total / image.n) ** 0.5)
        )
    return out


def partition_for(
    image: Image, pipeline: str, g: int, stop: StoppingCondition | None = None
) -> Partition:
    """The g-cluster partition a pipeline would record (for rendering)."""
    if pipeline == "optimal":
        from .optimal import optimal_partition

        h = build_histogram(image)
        ts = optimal_partition(h, g)
        return Partition.from_value_map(
            image, np.where(np.asarray(h.counts) > 0, ts.labels_for_values(image.levels), -1)
        )
    if pipeline in ("split", "merge-all", "merge-adjacent"):
        if pipeline == "split":
            d = build_compact_representation(image)
        else:
            d = merge_dendrogram_from_image(image, adjacent=pipeline == "merge-adjacent")
        from .clustering import cut_dendrogram

        return cut_dendrogram(d, g)
    if pipeline in ("kmeans", "correct"):
        _, parts = split_sequence(image, g)
        part = parts[-1]
        if part.g != g:
            raise ValueError(f"g={g} unreachable for pipeline {pipeline}")
        h = build_histogram(image)
        return iterate_kmeans(part, h) if pipeline == "kmeans" else correct_partition(part, h)
    if pipeline == "reduce":
        stop = stop or StoppingCondition.one_segment_per_cluster()
        _, parts = split_sequence(image, g)
        part = parts[-1]
        if part.g != g:
            raise ValueError(f"g={g} unreachable for pipeline {pipeline}")
        from .segments import reduce_segments

        reduced, _ = reduce_segments(part, image, stop)
        return reduced
    raise ValueError(f"pipeline {pipeline!r} cannot render a fixed-g partition")


def compare_curves(image: Image, g_lo: int, g_hi: int) -> list[CurveRecord]:
    """All reproducible curves, one pipeline tag per family."""
    out = []
    out += curve(image, "optimal", g_lo, g_hi)
    out += curve(image, "split", g_lo, g_hi)
    out += curve(image, "merge-all", g_lo, g_hi)
    out += curve(image, "merge-adjacent", g_lo, g_hi)
    out += curve(
        image, "reduce", g_lo, g_hi, StoppingCondition.one_segment_per_cluster(),
        tag="reduce-one-segment",
    )
    out += curve(
        image, "reduce", g_lo, g_hi, StoppingCondition.unique_segment_means(),
        tag="reduce-unique-means",
    )
    out += curve(image, "ms-merge", g_lo, g_hi)
    return out
