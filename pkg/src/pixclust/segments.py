"""Spatial layer: connected segments of a partition and segment-count control.

A segment is a maximal 4-connected set of pixels sharing one cluster label.
``reduce_segments`` lowers the segment count of a partition by reclassifying
whole segments from their (donor) cluster to a neighboring (acceptor)
cluster, always taking the move with the smallest exact error increment;
``merge_connected_segments`` runs the adjacency-constrained greedy merge of
constant-intensity regions instead.  Cluster count is never changed here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import _backend
from .clustering import (
    ApproximationSequence,
    ApproxRecord,
    UniformClusterError,
    best_binary_split,
    build_compact_representation,
    expand_to_sequence,
)
from .core import (
    ClusterStats,
    Partition,
    _exact_label_stats,
    delta_e_correct,
    delta_e_merge,
    merge_stats,
    remove_stats,
)
from .histogram import Histogram
from .image import Image

__all__ = [
    "MoveRecord",
    "SegmentInfo",
    "SegmentMap",
    "StoppingCondition",
    "label_segments",
    "merge_connected_segments",
    "reduce_segments",
    "reduced_sequence",
]


@dataclass(frozen=True)
class StoppingCondition:
    """When segment reduction stops.

    ``one-segment``: every cluster owns exactly one segment.
    ``unique-means``: no two segments share the same mean rounded to
    intensity resolution.
    ``target``: at most ``target`` segments remain (requires target >= g).
    """

    kind: str
    target: int | None = None

    _KINDS = ("one-segment", "unique-means", "target")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown stopping condition {self.kind!r}")
        if (self.kind == "target") != (self.target is not None):
            raise ValueError("target count required exactly for kind='target'")

    @classmethod
    def one_segment_per_cluster(cls) -> "StoppingCondition":
        return cls("one-segment")

    @classmethod
    def unique_segment_means(cls) -> "StoppingCondition":
        return cls("unique-means")

    @classmethod
    def target_count(cls, m: int) -> "StoppingCondition":
        return cls("target", int(m))

    @classmethod
    def parse(cls, text: str) -> "StoppingCondition":
        if text.startswith("target="):
            return cls.target_count(int(text.split("=", 1)[1]))
        return cls(text)


@dataclass
class SegmentInfo:
    id: int
    stats: ClusterStats
    cluster: int
    neighbors: set[int] = field(default_factory=set)


@dataclass
class SegmentMap:
    """Connected-component labeling of a partition plus region adjacency."""

    seg_labels: np.ndarray
    segments: dict[int, SegmentInfo]

    @property
    def segment_count(self) -> int:
        return len(self.segments)


@dataclass(frozen=True)
class MoveRecord:
    segment: int
    donor: int
    acceptor: int
    pixels: int
    delta: float


def _canonical_components(grid: np.ndarray) -> np.ndarray:
    """Backend labeling relabeled to raster-scan order of first pixel."""
    raw = _backend.label_components(grid).ravel()
    uniq, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(uniq), dtype=np.int32)
    rank[np.argsort(first, kind="stable")] = np.arange(len(uniq), dtype=np.int32)
    return rank[inverse].astype(np.int32)


def _adjacency_pairs(seg_grid: np.ndarray) -> np.ndarray:
    """Unique (lo, hi) pairs of 4-adjacent distinct segment ids."""
    h_a, h_b = seg_grid[:, :-1].ravel(), seg_grid[:, 1:].ravel()
    v_a, v_b = seg_grid[:-1, :].ravel(), seg_grid[1:, :].ravel()
    a = np.concatenate([h_a, v_a]).astype(np.int64)
    b = np.concatenate([h_b, v_b]).astype(np.int64)
    m = a != b
    a, b = a[m], b[m]
    lo, hi = np.minimum(a, b), np.maximum(a, b)
    k = int(max(lo.max(), hi.max())) + 1 if lo.size else 1
    keys = np.unique(lo * k + hi)
    return np.stack([keys // k, keys % k], axis=1)


def _segment_table(
    image: Image, labels: np.ndarray, seg: np.ndarray
) -> dict[int, SegmentInfo]:
    stats = _exact_label_stats(image.pixels, seg)
    _, first = np.unique(seg, return_index=True)
    info = {
        sid: SegmentInfo(sid, st, int(labels[first[sid]]))
        for sid, st in stats.items()
    }
    for lo, hi in _adjacency_pairs(seg.reshape(image.height, image.width)).tolist():
        info[lo].neighbors.add(hi)
        info[hi].neighbors.add(lo)
    return info


def label_segments(p: Partition, image: Image | None = None) -> SegmentMap:
    """4-connected components of the partition's label map.

    Segment ids are deterministic: raster-scan order of each segment's first
    pixel.  Adjacent segments always belong to different clusters.
    """
    image = image or p.image
    seg = _canonical_components(p.labels.reshape(image.height, image.width))
    return SegmentMap(seg, _segment_table(image, p.labels, seg))


def _rounded_mean(st: ClusterStats) -> int:
    return math.floor(st.mean + 0.5)


class _Reducer:
    """Mutable state of one reduction run."""

    def __init__(self, p: Partition, image: Image):
        self.image = image
        self.labels = p.labels.copy()
        self.cstats: dict[int, ClusterStats] = dict(p.clusters)
        smap = label_segments(Partition(image, self.labels, self.cstats), image)
        self.seg = smap.seg_labels.copy()
        self.sinfo = smap.segments
        self.csegs: dict[int, set[int]] = {c: set() for c in self.cstats}
        for sid, info in self.sinfo.items():
            self.csegs[info.cluster].add(sid)

    @property
    def segment_count(self) -> int:
        return len(self.sinfo)

    def eligible(self, stop: StoppingCondition) -> list[int]:
        if stop.kind == "one-segment":
            out: list[int] = []
            for c in sorted(self.csegs):
                segs = self.csegs[c]
                if len(segs) < 2:
                    continue
                exempt = min(segs, key=lambda s: (-self.sinfo[s].stats.n, s))
                out.extend(s for s in segs if s != exempt)
            return sorted(out)
        if stop.kind == "unique-means":
            by_mean: dict[int, list[int]] = {}
            for sid in sorted(self.sinfo):
                by_mean.setdefault(_rounded_mean(self.sinfo[sid].stats), []).append(sid)
            return sorted(s for group in by_mean.values() if len(group) > 1 for s in group)
        if self.segment_count > stop.target:
            return sorted(self.sinfo)
        return []

    def best_move(self, eligible: list[int]) -> tuple[float, int, int] | None:
        best: tuple[float, int, int] | None = None
        for sid in eligible:
            info = self.sinfo[sid]
            donor = self.cstats[info.cluster]
            if info.stats.n >= donor.n:
                continue  # move would empty the donor cluster
            acceptors = sorted({self.sinfo[t].cluster for t in info.neighbors} - {info.cluster})
            for a in acceptors:
                delta = delta_e_correct(donor, info.stats, self.cstats[a])
                key = (delta, sid, a)
                if best is None or key < best:
                    best = key
        return best

    def apply(self, sid: int, acceptor: int) -> None:
        info = self.sinfo[sid]
        donor_cid = info.cluster
        pix = np.nonzero(self.seg == sid)[0]
        self.labels[pix] = acceptor
        self.cstats[donor_cid] = remove_stats(self.cstats[donor_cid], info.stats)
        self.cstats[acceptor] = merge_stats(self.cstats[acceptor], info.stats)

        fused = [t for t in sorted(info.neighbors) if self.sinfo[t].cluster == acceptor]
        members = [sid] + fused
        new_id = min(members)
        mask = np.isin(self.seg, members)
        self.seg[mask] = new_id
        stats = info.stats
        neighbors: set[int] = set(info.neighbors)
        for t in fused:
            stats = merge_stats(stats, self.sinfo[t].stats)
            neighbors |= self.sinfo[t].neighbors
        neighbors -= set(members)
        for gone in members:
            self.csegs[self.sinfo[gone].cluster].discard(gone)
            del self.sinfo[gone]
        merged = SegmentInfo(new_id, stats, acceptor, neighbors)
        self.sinfo[new_id] = merged
        self.csegs[acceptor].add(new_id)
        member_set = set(members)
        for u in neighbors:
            self.sinfo[u].neighbors -= member_set
            self.sinfo[u].neighbors.add(new_id)

    def to_partition(self) -> Partition:
        return Partition(
            self.image, self.labels, dict(self.cstats), Partition.total_error(self.cstats)
        )


def reduce_segments(
    p: Partition,
    image: Image | None = None,
    stop: StoppingCondition = StoppingCondition.one_segment_per_cluster(),
    on_move: Callable[[np.ndarray, MoveRecord], None] | None = None,
) -> tuple[Partition, SegmentMap]:
    """Reduce the segment count of ``p`` until the stopping condition holds.

    Each step moves one whole non-isolated segment to the adjacent cluster
    minimizing the exact error increment (ties: smallest segment id, then
    smallest acceptor id); moves that would empty their donor cluster are
    ineligible, so g is preserved.  The input partition is not modified.
    """
    image = image or p.image
    if stop.kind == "target" and stop.target < p.g:
        raise ValueError(
            f"target segment count {stop.target} is below the cluster count {p.g}"
        )
    r = _Reducer(p, image)
    while True:
        eligible = r.eligible(stop)
        if not eligible:
            break
        best = r.best_move(eligible)
        if best is None:
            warnings.warn(
                f"stopping condition {stop.kind!r} unsatisfiable: "
                f"{len(eligible)} eligible segments have no applicable move",
                stacklevel=2,
            )
            break
        delta, sid, acceptor = best
        rec = MoveRecord(sid, r.sinfo[sid].cluster, acceptor, r.sinfo[sid].stats.n, delta)
        r.apply(sid, acceptor)
        if on_move is not None:
            on_move(r.labels, rec)
    out = r.to_partition()
    return out, label_segments(out, image)


def _cluster_split_candidate(image: Image, labels: np.ndarray, cid: int):
    """Best binary split of one cluster over its own intensity histogram."""
    pix = image.pixels[labels == cid]
    h = Histogram.from_pixels(pix, image.levels)
    try:
        t, delta = best_binary_split(h)
    except UniformClusterError:
        return None
    return delta, int(pix.min()), t


def reduced_sequence(
    image: Image,
    g_max: int,
    stop: StoppingCondition = StoppingCondition.one_segment_per_cluster(),
    post_pass: bool = False,
) -> ApproximationSequence:
    """Splitting interleaved with segment reduction, one record per g.

    Default mode feeds each reduced partition back into the next split (the
    next dichotomy is chosen from the corrected clusters); ``post_pass``
    instead reduces a copy of each partition of the unmodified top-down
    expansion, for comparison.
    """
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    if post_pass:
        d = build_compact_representation(image)
        _, parts = expand_to_sequence(d, g_max, with_partitions=True)
        records = []
        for part in parts:
            reduced, smap = reduce_segments(part, image, stop)
            records.append(
                ApproxRecord(
                    part.g,
                    reduced.e_total,
                    (reduced.e_total / image.n) ** 0.5,
                    smap.segment_count,
                )
            )
        return ApproximationSequence(records)

    labels = np.zeros(image.n, dtype=np.int32)
    part = Partition.from_labels(image, labels)
    records = []
    for g in range(1, g_max + 1):
        if g > 1:
            cands = []
            for cid in sorted(part.clusters):
                cand = _cluster_split_candidate(image, part.labels, cid)
                if cand is not None:
                    delta, lo, t = cand
                    cands.append((delta, lo, cid, t))
            if not cands:
                warnings.warn(f"g_max={g_max} exceeds reachable clusters; truncated at {g - 1}")
                break
            delta, lo, cid, t = min(cands)
            labels = part.labels.copy()
            new_id = max(part.clusters) + 1
            labels[(labels == cid) & (image.pixels >= t)] = new_id
            part = Partition.from_labels(image, labels)
        part, smap = reduce_segments(part, image, stop)
        records.append(
            ApproxRecord(g, part.e_total, (part.e_total / image.n) ** 0.5, smap.segment_count)
        )
    return ApproximationSequence(records)


def merge_connected_segments(image: Image, g_min: int = 1) -> ApproximationSequence:
    """Greedy merging of adjacent constant-intensity regions.

    Starts from the elementary spatial segments of the image itself and
    repeatedly merges the 4-adjacent pair with the smallest merge increment
    until ``g_min`` segments remain, recording (segment count, E, sigma)
    after every merge.  E is non-decreasing along the merging.
    """
    if g_min < 1:
        raise ValueError("g_min must be >= 1")
    seg = _canonical_components(image.grid())
    info = _segment_table(image, seg, seg)  # elementary segments: error 0 each
    stats = {sid: i.stats for sid, i in info.items()}
    nbrs = {sid: set(i.neighbors) for sid, i in info.items()}
    version = {sid: 0 for sid in stats}
    import heapq

    heap = []
    for lo, hi in sorted((min(a, b), max(a, b)) for a in nbrs for b in nbrs[a] if a < b):
        heapq.heappush(heap, (delta_e_merge(stats[lo], stats[hi]), lo, hi, 0, 0))
    count = len(stats)
    e = 0.0
    n = image.n
    records = [ApproxRecord(count, e, (e / n) ** 0.5, count)]
    while count > g_min and heap:
        delta, a, b, va, vb = heapq.heappop(heap)
        if version.get(a) != va or version.get(b) != vb:
            continue
        keep, gone = (a, b) if a < b else (b, a)
        e = e + delta
        count -= 1
        stats[keep] = merge_stats(stats[keep], stats[gone])
        merged_nbrs = (nbrs[keep] | nbrs[gone]) - {keep, gone}
        for u in merged_nbrs:
            nbrs[u].discard(gone)
            nbrs[u].add(keep)
        nbrs[keep] = merged_nbrs
        del stats[gone], nbrs[gone], version[gone]
        version[keep] += 1
        for u in sorted(merged_nbrs):
            lo, hi = (keep, u) if keep < u else (u, keep)
            heapq.heappush(
                heap,
                (delta_e_merge(stats[lo], stats[hi]), lo, hi, version[lo], version[hi]),
            )
        records.append(ApproxRecord(count, e, (e / n) ** 0.5, count))
    records.reverse()
    return ApproximationSequence(records)
