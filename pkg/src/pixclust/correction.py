"""Partition refinement at fixed cluster count.

A correction move takes all pixels of one intensity value out of their
cluster and gives them to another cluster; its exact error increment is the
split-then-merge composition.  ``correct_partition`` greedily applies the
best strictly improving move until none remains.  Simplifying the move
criterion to nearest-mean reassignment yields one Lloyd step of K-means,
provided here for comparison.

Both operations require a histogram-consistent partition: every cluster is a
union of whole intensity values, so pixels of one value always share a label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    ClusterStats,
    Partition,
    delta_e_correct,
    delta_e_merge,
    delta_e_split,
    merge_stats,
    remove_stats,
    stats_of_value,
)
from .histogram import Histogram, build_histogram

# A move must improve E by more than this to be applied; zero-delta moves are
# skipped so the greedy loop terminates and stays deterministic.
IMPROVEMENT_TOL = 1e-12


@dataclass(frozen=True)
class MoveCandidate:
    """Moving all ``count`` donor pixels of intensity ``value`` to ``acceptor``."""

    donor: int
    acceptor: int
    value: int
    count: int
    delta: float

    @property
    def group(self) -> ClusterStats:
        return stats_of_value(self.value, self.count)


def value_assignment(p: Partition) -> np.ndarray:
    """Per-intensity cluster ids of a histogram-consistent partition.

    Raises if some intensity value is split across clusters (-1 marks
    unpopulated values).
    """
    levels = p.image.levels
    lo = np.full(levels, np.iinfo(np.int64).max, dtype=np.int64)
    hi = np.full(levels, -1, dtype=np.int64)
    np.minimum.at(lo, p.image.pixels, p.labels)
    np.maximum.at(hi, p.image.pixels, p.labels)
    populated = hi >= 0
    if not np.array_equal(lo[populated], hi[populated]):
        raise ValueError("partition is not histogram-consistent")
    out = np.full(levels, -1, dtype=np.int32)
    out[populated] = hi[populated]
    return out


def enumerate_candidates(p: Partition) -> list[MoveCandidate]:
    """All applicable (donor, intensity group, acceptor) moves, best first.

    The moved group must not exhaust its donor; deltas are exact
    ``delta_e_correct`` values, ordered by (delta, donor, value, acceptor).
    """
    groups = p.value_groups()
    ids = sorted(p.clusters)
    out = []
    for donor in ids:
        donor_stats = p.clusters[donor]
        for value, count in sorted(groups[donor].items()):
            if count >= donor_stats.n:
                continue
            moved = stats_of_value(value, count)
            for acceptor in ids:
                if acceptor == donor:
                    continue
                delta = delta_e_correct(donor_stats, moved, p.clusters[acceptor])
                out.append(MoveCandidate(donor, acceptor, value, count, delta))
    out.sort(key=lambda m: (m.delta, m.donor, m.value, m.acceptor))
    return out


def _rebuild(p: Partition, assign: np.ndarray) -> Partition:
    return Partition.from_labels(p.image, assign[p.image.pixels])


def correct_partition(p: Partition, h: Histogram | None = None) -> Partition:
    """Greedy best-improvement correction at fixed g.

    Repeatedly applies the candidate with the most negative exact increment
    while one improves E by more than ``IMPROVEMENT_TOL``; idempotent once no
    such move exists.  Cluster count and ids are preserved.
    """
    if h is None:
        h = build_histogram(p.image)
    assign = value_assignment(p)
    stats = dict(p.clusters)
    values = [int(v) for v in np.nonzero(h.counts)[0]]
    ids = sorted(stats)
    moved_any = False
    while True:
        best = None
        for v in values:
            donor = int(assign[v])
            k = h.value_count(v)
            if k >= stats[donor].n:
                continue
            moved = stats_of_value(v, k)
            split_term = delta_e_split(stats[donor], moved)
            for a in ids:
                if a == donor:
                    continue
                delta = delta_e_merge(moved, stats[a]) + split_term
                key = (delta, donor, v, a)
                if best is None or key < best:
                    best = key
        if best is None or best[0] >= -IMPROVEMENT_TOL:
            break
        _, donor, v, a = best
        moved = stats_of_value(v, h.value_count(v))
        stats[donor] = remove_stats(stats[donor], moved)
        stats[a] = merge_stats(stats[a], moved)
        assign[v] = a
        moved_any = True
    if not moved_any:
        return p
    return _rebuild(p, assign)


def kmeans_step(p: Partition, h: Histogram | None = None) -> Partition:
    """One Lloyd iteration in intensity space.

    Every intensity group is reassigned to the cluster with the nearest mean
    (ties to the lower mean, then the lower id), then means are recomputed.
    A cluster that would lose all pixels keeps its least-costly group, so g
    is preserved.  E never increases.
    """
    if h is None:
        h = build_histogram(p.image)
    assign = value_assignment(p)
    ids = sorted(p.clusters)
    order = sorted(ids, key=lambda c: (p.clusters[c].mean, c))
    means = np.array([p.clusters[c].mean for c in order])
    values = np.nonzero(h.counts)[0]
    dist = np.abs(values[:, None] - means[None, :])
    nearest = np.argmin(dist, axis=1)
    target = {int(v): order[k] for v, k in zip(values.tolist(), nearest.tolist())}
    best_dist = {
        int(v): float(dist[i, k]) for i, (v, k) in enumerate(zip(values.tolist(), nearest.tolist()))
    }

    # keep-alive: a cluster every group leaves retains its own group that
    # loses the least by staying (smallest weighted gain, then smallest
    # value); pinning may re-empty another cluster, hence the fixpoint loop
    pinned: set[int] = set()
    while True:
        incoming: dict[int, int] = {c: 0 for c in ids}
        for c in target.values():
            incoming[c] += 1
        starved = [c for c in ids if incoming[c] == 0 and c not in pinned]
        if not starved:
            break
        for c in starved:
            own = [int(v) for v in values.tolist() if assign[v] == c]
            mean_c = p.clusters[c].mean
            def sacrifice(v: int) -> float:
                k = h.value_count(v)
                return k * ((v - mean_c) ** 2 - best_dist[v] ** 2)
            keep = min(own, key=lambda v: (sacrifice(v), v))
            target[keep] = c
            pinned.add(c)

    new_assign = np.full(p.image.levels, -1, dtype=np.int32)
    for v in values.tolist():
        new_assign[v] = target[int(v)]
    return _rebuild(p, new_assign)


def iterate_kmeans(p: Partition, h: Histogram | None = None, max_steps: int = 100) -> Partition:
    """Run ``kmeans_step`` until the assignment stops changing."""
    if h is None:
        h = build_histogram(p.image)
    cur = p
    prev = value_assignment(cur)
    for _ in range(max_steps):
        cur = kmeans_step(cur, h)
        nxt = value_assignment(cur)
        if np.array_equal(prev, nxt):
            break
        prev = nxt
    return cur
