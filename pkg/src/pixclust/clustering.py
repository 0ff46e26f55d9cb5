"""Hierarchical quasioptimal approximation sequences.

Top-down dichotomous splitting of intensity clusters (histogram-driven Otsu
splits), bottom-up greedy merging (all-pairs and adjacent-bins variants), and
the expansion of the resulting binary hierarchy into a sequence of partitions
with one more cluster per step, each step taking the available split with the
largest error decrease.

Elementary clusters are populated intensity values: pixels of one intensity
are indivisible, so every structure here lives on the histogram and is
independent of image size once the histogram is built.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    ClusterStats,
    Partition,
    delta_e_merge,
    merge_delta_frac,
    merge_stats,
    stats_of_value,
)
from .histogram import Histogram, build_histogram
from .image import Image

__all__ = [
    "ApproximationSequence",
    "ApproxRecord",
    "Dendrogram",
    "DendroNode",
    "UniformClusterError",
    "best_binary_split",
    "build_compact_representation",
    "build_histogram",
    "cut_dendrogram",
    "expand_to_sequence",
    "greedy_merge_adjacent_bins",
    "greedy_merge_all_pairs",
    "merge_dendrogram_from_image",
]


class UniformClusterError(ValueError):
    """Raised when asked to split a cluster with a single populated intensity."""


@dataclass(frozen=True)
class ApproxRecord:
    """One point of an approximation-quality curve."""

    g: int
    e: float
    sigma: float
    segment_count: int | None = None


class ApproximationSequence:
    """Ordered records (g, E, sigma[, segment_count]); g strictly increasing."""

    def __init__(self, records: list[ApproxRecord]):
        for prev, cur in zip(records, records[1:]):
            if cur.g <= prev.g:
                raise ValueError("cluster counts must be strictly increasing")
        self.records = list(records)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, i):
        return self.records[i]

    def e_by_g(self) -> dict[int, float]:
        return {r.g: r.e for r in self.records}

    def is_e_nonincreasing(self, rel_tol: float = 0.0) -> bool:
        for prev, cur in zip(self.records, self.records[1:]):
            if cur.e > prev.e + rel_tol * max(abs(prev.e), 1.0):
                return False
        return True


@dataclass
class DendroNode:
    """One node of the merge/split hierarchy.

    ``values`` are the populated intensities the node covers (ascending);
    ``delta`` is the split increment relating the node to its children
    (<= 0; the merge increment is its negation).  Leaves have no children.
    """

    id: int
    stats: ClusterStats
    values: np.ndarray | None
    lo: int
    left: int = -1
    right: int = -1
    delta: float = 0.0

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass
class Dendrogram:
    """Binary hierarchy over intensity clusters; root covers the whole image."""

    nodes: list[DendroNode]
    root: int
    histogram: Histogram | None = None
    image: Image | None = None
    leaf_count: int = field(default=0)

    def node(self, i: int) -> DendroNode:
        return self.nodes[i]

    def leaves(self) -> list[DendroNode]:
        return [nd for nd in self.nodes if nd.is_leaf]

    def level_slice(self, depth: int) -> list[DendroNode]:
        """Frontier after cutting every split deeper than ``depth`` levels.

        ``depth`` d gives at most 2^d clusters: the compact representation's
        1, 2, 4, 8, ... sequence is ``level_slice(0), level_slice(1), ...``.
        """
        frontier = []
        stack = [(self.root, 0)]
        while stack:
            idx, d = stack.pop()
            nd = self.nodes[idx]
            if nd.is_leaf or d == depth:
                frontier.append(nd)
            else:
                stack.append((nd.right, d + 1))
                stack.append((nd.left, d + 1))
        return frontier


def _split_candidates(h: Histogram, lo: int, hi: int):
    """Thresholds t in (lo, hi) with pixels on both sides of [lo,t) | [t,hi)."""
    values = np.nonzero(h.counts[lo:hi])[0] + lo
    return values[1:]  # split in front of each populated value but the first


def best_binary_split(h: Histogram, lo: int = 0, hi: int | None = None) -> tuple[int, float]:
    """Best single-threshold split of the intensity range ``[lo, hi)``.

    Exhaustive over all thresholds; returns ``(t, delta)`` where the parts
    are ``[lo, t)`` and ``[t, hi)`` and ``delta`` (<= 0) is the resulting
    change of total squared error.  Candidates are compared exactly (integer
    cross-multiplication), ties resolved toward the smallest threshold; on
    the whole histogram this reproduces the classical Otsu threshold, which
    maximizes the between-class variance.
    """
    hi = h.levels if hi is None else hi
    cands = _split_candidates(h, lo, hi)
    if cands.size == 0:
        raise UniformClusterError(f"range [{lo}, {hi}) has a single populated intensity")
    best_t = -1
    best_num = best_den = 0
    for t in cands.tolist():
        left = h.range_stats(lo, t)
        right = h.range_stats(t, hi)
        # |delta_split| == delta_merge(left, right); compare exact fractions
        num, den = merge_delta_frac(left, right)
        if best_t < 0 or num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t, -(best_num / best_den)


def build_compact_representation(image: Image, max_depth: int = 16) -> Dendrogram:
    """Top-down dichotomous splitting into the 1, 2, 4, 8, ... hierarchy.

    Every non-uniform cluster is split independently of the others at its
    own best Otsu threshold; clusters of identical pixels are indivisible
    leaves, and splitting also stops at ``max_depth`` levels.
    """
    if max_depth < 0:
        raise ValueError("max_depth must be >= 0")
    h = build_histogram(image)
    nodes: list[DendroNode] = []

    def grow(lo: int, hi: int, depth: int) -> int:
        values = np.nonzero(h.counts[lo:hi])[0] + lo
        nd = DendroNode(
            id=len(nodes),
            stats=h.range_stats(lo, hi),
            values=values,
            lo=int(values[0]),
        )
        nodes.append(nd)
        if values.size >= 2 and depth < max_depth:
            t, delta = best_binary_split(h, lo, hi)
            nd.left = grow(lo, t, depth + 1)
            nd.right = grow(t, hi, depth + 1)
            nd.delta = delta
        return nd.id

    root = grow(0, h.levels, 0)
    d = Dendrogram(nodes, root, histogram=h, image=image)
    d.leaf_count = len(d.leaves())
    return d


def _expansion_steps(d: Dendrogram):
    """Yield frontiers of the greedy expansion: g = 1, 2, ... node-id lists.

    Each step replaces the frontier node whose pending split has the most
    negative delta (ties: lowest covered intensity, then node id) by its two
    children.
    """
    frontier = {d.root}
    heap: list[tuple[float, int, int]] = []
    nd = d.node(d.root)
    if not nd.is_leaf:
        heapq.heappush(heap, (nd.delta, nd.lo, nd.id))
    yield sorted(frontier)
    while heap:
        _, _, idx = heapq.heappop(heap)
        nd = d.node(idx)
        frontier.discard(idx)
        for child_idx in (nd.left, nd.right):
            child = d.node(child_idx)
            frontier.add(child_idx)
            if not child.is_leaf:
                heapq.heappush(heap, (child.delta, child.lo, child.id))
        yield sorted(frontier)


def _frontier_partition(d: Dendrogram, frontier: list[int]) -> Partition:
    if d.image is None:
        raise ValueError("dendrogram carries no image; cannot materialize a partition")
    nodes = sorted((d.node(i) for i in frontier), key=lambda nd: nd.lo)
    if any(nd.values is None for nd in nodes):
        raise ValueError("dendrogram leaves carry no intensity values")
    vm = np.full(d.image.levels, -1, dtype=np.int32)
    for cid, nd in enumerate(nodes):
        vm[nd.values] = cid
    labels = vm[d.image.pixels]
    clusters = {cid: nd.stats for cid, nd in enumerate(nodes)}
    return Partition(d.image, labels, clusters, Partition.total_error(clusters))


def _frontier_error(d: Dendrogram, frontier: list[int]) -> float:
    nodes = sorted((d.node(i) for i in frontier), key=lambda nd: nd.lo)
    return float(sum(nd.stats.error for nd in nodes))


def expand_to_sequence(
    d: Dendrogram, g_max: int, with_partitions: bool = True
) -> tuple[ApproximationSequence, list[Partition] | None]:
    """Expand a hierarchy into partitions with g = 1 .. g_max clusters.

    Successive partitions are nested (each step splits exactly one cluster).
    If ``g_max`` exceeds the leaf count the sequence is truncated with a
    warning.  Partitions are materialized only when the dendrogram carries
    its source image and ``with_partitions`` is set.
    """
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    n = d.image.n if d.image is not None else (d.histogram.n if d.histogram else 0)
    records: list[ApproxRecord] = []
    partitions: list[Partition] | None = [] if (with_partitions and d.image is not None) else None
    for frontier in _expansion_steps(d):
        g = len(frontier)
        if g > g_max:
            break
        e = _frontier_error(d, frontier)
        sigma = (e / n) ** 0.5 if n else 0.0
        records.append(ApproxRecord(g, e, sigma))
        if partitions is not None:
            partitions.append(_frontier_partition(d, frontier))
    if records[-1].g < g_max:
        warnings.warn(
            f"g_max={g_max} exceeds the {records[-1].g} reachable clusters; truncated",
            stacklevel=2,
        )
    return ApproximationSequence(records), partitions


def cut_dendrogram(d: Dendrogram, g: int) -> Partition:
    """Partition induced by undoing the g-1 best splits from the root."""
    leaf_count = d.leaf_count or len(d.leaves())
    if not 1 <= g <= leaf_count:
        raise ValueError(f"g must be in [1, {leaf_count}], got {g}")
    for frontier in _expansion_steps(d):
        if len(frontier) == g:
            return _frontier_partition(d, frontier)
    raise AssertionError("unreachable: expansion ends at leaf count")


def _finish_merge_tree(
    nodes: list[DendroNode],
    heap_init,
    pairs_for,
    active: dict[int, DendroNode],
) -> int:
    """Greedy merge loop shared by the all-pairs and adjacent variants.

    ``heap_init`` seeds candidate pairs; ``pairs_for`` yields the candidates
    a freshly merged node participates in.  Pair order (delta, min id,
    max id) makes ties deterministic.  Returns the root node id.
    """
    heap: list[tuple[float, int, int]] = list(heap_init)
    heapq.heapify(heap)
    while len(active) > 1:
        delta, i, j = heapq.heappop(heap)
        if i not in active or j not in active:
            continue
        a, b = active.pop(i), active.pop(j)
        values = None
        if a.values is not None and b.values is not None:
            values = np.sort(np.concatenate([a.values, b.values]))
        parent = DendroNode(
            id=len(nodes),
            stats=merge_stats(a.stats, b.stats),
            values=values,
            lo=min(a.lo, b.lo),
            left=a.id,
            right=b.id,
            delta=-delta,
        )
        nodes.append(parent)
        active[parent.id] = parent
        for entry in pairs_for(parent):
            heapq.heappush(heap, entry)
    return next(iter(active))


def greedy_merge_all_pairs(
    elementary: list[ClusterStats], *, values: list[np.ndarray] | None = None
) -> Dendrogram:
    """Bottom-up hierarchy: always merge the globally cheapest pair.

    Candidate pairs are all pairs of current clusters, not only neighbors on
    the intensity axis; delta is the exact merge increment.  Ties go to the
    lexicographically smallest (min id, max id) pair.
    """
    if not elementary:
        raise ValueError("need at least one elementary cluster")
    nodes = [
        DendroNode(
            id=k,
            stats=st,
            values=None if values is None else np.asarray(values[k], dtype=np.int64),
            lo=k if values is None else int(np.min(values[k])),
        )
        for k, st in enumerate(elementary)
    ]
    active = {nd.id: nd for nd in nodes}
    seed = [
        (delta_e_merge(nodes[i].stats, nodes[j].stats), i, j)
        for i in range(len(nodes))
        for j in range(i + 1, len(nodes))
    ]

    def pairs_for(parent: DendroNode):
        return [
            (delta_e_merge(parent.stats, other.stats), min(parent.id, k), max(parent.id, k))
            for k, other in active.items()
            if k != parent.id
        ]

    root = _finish_merge_tree(nodes, seed, pairs_for, active)
    d = Dendrogram(nodes, root)
    d.leaf_count = len(elementary)
    return d


def greedy_merge_adjacent_bins(h: Histogram) -> Dendrogram:
    """Bottom-up hierarchy restricted to intensity-adjacent cluster pairs.

    Clusters start as populated histogram bins; a merge candidate is a pair
    of clusters that are successive runs on the intensity axis, and the pair
    with the smallest merge increment goes first.
    """
    vals = h.populated_values()
    if vals.size == 0:
        raise ValueError("empty histogram")
    nodes = [
        DendroNode(
            id=k,
            stats=stats_of_value(v, h.value_count(v)),
            values=np.array([v], dtype=np.int64),
            lo=int(v),
        )
        for k, v in enumerate(vals.tolist())
    ]
    active = {nd.id: nd for nd in nodes}
    succ = {k: k + 1 for k in range(len(nodes) - 1)}
    pred = {k + 1: k for k in range(len(nodes) - 1)}
    seed = [
        (delta_e_merge(nodes[k].stats, nodes[k + 1].stats), k, k + 1)
        for k in range(len(nodes) - 1)
    ]

    def pairs_for(parent: DendroNode):
        left_id, right_id = parent.left, parent.right
        lo_id = left_id if nodes[left_id].lo < nodes[right_id].lo else right_id
        hi_id = right_id if lo_id == left_id else left_id
        p, s = pred.pop(lo_id, None), succ.pop(hi_id, None)
        succ.pop(lo_id, None)
        pred.pop(hi_id, None)
        out = []
        if p is not None:
            succ[p] = parent.id
            pred[parent.id] = p
            out.append((delta_e_merge(nodes[p].stats, parent.stats), p, parent.id))
        if s is not None:
            pred[s] = parent.id
            succ[parent.id] = s
            out.append((delta_e_merge(parent.stats, nodes[s].stats), s, parent.id))
        return out

    root = _finish_merge_tree(nodes, seed, pairs_for, active)
    d = Dendrogram(nodes, root, histogram=h)
    d.leaf_count = len(vals)
    return d


def merge_dendrogram_from_image(image: Image, adjacent: bool = False) -> Dendrogram:
    """Build a merge hierarchy from an image's histogram bins.

    The returned dendrogram carries the image, so it can be cut and expanded
    into pixel partitions.
    """
    h = build_histogram(image)
    if adjacent:
        d = greedy_merge_adjacent_bins(h)
    else:
        vals = h.populated_values()
        stats = [stats_of_value(v, h.value_count(v)) for v in vals.tolist()]
        d = greedy_merge_all_pairs(stats, values=[np.array([v]) for v in vals.tolist()])
        d.histogram = h
    d.image = image
    return d
