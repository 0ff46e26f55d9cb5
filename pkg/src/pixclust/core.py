"""Exact cluster statistics and the squared-error increment formulas.

A cluster is summarized by exact integer accumulators (pixel count ``n``,
intensity sum ``s``, squared-intensity sum ``s2``).  The total squared error
of a cluster is ``E = s2 - s^2/n``; every increment formula below reduces to
a ratio of two exact integers, so each returned float is the correctly
rounded value of the exact result.  This makes merge/split duality bitwise
and keeps every pipeline deterministic across merge orders and platforms.

Sign contracts: ``delta_e_merge >= 0`` and ``delta_e_split <= 0`` hold
exactly (the numerators are perfect squares, the denominators positive).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .image import Image


@dataclass(frozen=True)
class ClusterStats:
    """Exact accumulators for one pixel cluster.

    ``n``, ``s``, ``s2`` are arbitrary-precision integers, so the algebra
    (merge, remove) is exact for any image size the process can hold.
    """

    n: int
    s: int
    s2: int

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "s2", int(self.s2))
        if self.n < 0:
            raise ValueError("negative pixel count")
        if self.n == 0 and (self.s != 0 or self.s2 != 0):
            raise ValueError("empty cluster must have zero sums")

    @property
    def is_empty(self) -> bool:
        return self.n == 0

    @property
    def mean(self) -> float:
        """Average intensity; defined only for nonempty clusters."""
        if self.n == 0:
            raise ValueError("mean of empty cluster")
        return self.s / self.n

    @property
    def error(self) -> float:
        """Within-cluster total squared error ``E = s2 - s^2/n``.

        Evaluated as ``(n*s2 - s*s) / n`` so the numerator is an exact
        nonnegative integer (Cauchy-Schwarz) and the result is a single
        correctly rounded division.
        """
        if self.n == 0:
            return 0.0
        return (self.n * self.s2 - self.s * self.s) / self.n


EMPTY_STATS = ClusterStats(0, 0, 0)


def stats_from_pixels(pixels: Iterable[int]) -> ClusterStats:
    """Accumulate (n, s, s2) over an iterable of intensities."""
    arr = np.asarray(list(pixels) if not isinstance(pixels, np.ndarray) else pixels)
    if arr.size == 0:
        return EMPTY_STATS
    vals = [int(v) for v in arr.ravel()]
    return ClusterStats(len(vals), sum(vals), sum(v * v for v in vals))


def stats_of_value(value: int, count: int) -> ClusterStats:
    """Stats of ``count`` identical pixels at intensity ``value``."""
    value = int(value)
    count = int(count)
    return ClusterStats(count, value * count, value * value * count)


def merge_stats(a: ClusterStats, b: ClusterStats) -> ClusterStats:
    """Componentwise sum; exact."""
    return ClusterStats(a.n + b.n, a.s + b.s, a.s2 + b.s2)


def remove_stats(parent: ClusterStats, part: ClusterStats) -> ClusterStats:
    """Componentwise difference; ``part`` must be contained in ``parent``."""
    n, s, s2 = parent.n - part.n, parent.s - part.s, parent.s2 - part.s2
    if n < 0 or s < 0 or s2 < 0:
        raise ValueError("part is not contained in parent")
    return ClusterStats(n, s, s2)


def merge_delta_frac(a: ClusterStats, b: ClusterStats) -> tuple[int, int]:
    """Exact (numerator, denominator) of the merge increment.

    ``delta = (I_a - I_b)^2 / (1/n_a + 1/n_b)`` rewritten over a common
    denominator: ``(s_a*n_b - s_b*n_a)^2 / (n_a*n_b*(n_a + n_b))``.
    """
    if a.n < 1 or b.n < 1:
        raise ValueError("delta_e_merge requires nonempty clusters")
    d = a.s * b.n - b.s * a.n
    return d * d, a.n * b.n * (a.n + b.n)


def split_delta_frac(parent: ClusterStats, part: ClusterStats) -> tuple[int, int]:
    """Exact (numerator, denominator) of the magnitude of the split increment.

    ``|delta| = (I_part - I_parent)^2 / (1/k - 1/n)`` with ``k = part.n`` and
    ``n = parent.n``, i.e. ``(s_part*n - s_parent*k)^2 / (k*n*(n - k))``.
    """
    k, n = part.n, parent.n
    if k < 1 or k >= n:
        raise ValueError("split requires 1 <= part.n < parent.n")
    d = part.s * n - parent.s * k
    return d * d, k * n * (n - k)


def delta_e_merge(a: ClusterStats, b: ClusterStats) -> float:
    """Increase of total squared error caused by merging two clusters.

    Always >= 0; zero exactly when the means coincide.
    """
    num, den = merge_delta_frac(a, b)
    return num / den


def delta_e_split(parent: ClusterStats, part: ClusterStats) -> float:
    """Change of total squared error when ``part`` leaves ``parent``.

    ``part`` must be a strict nonempty sub-multiset of ``parent`` (caller
    guaranteed).  Always <= 0.
    """
    num, den = split_delta_frac(parent, part)
    return -(num / den)


def delta_e_correct(
    donor: ClusterStats, moved: ClusterStats, acceptor: ClusterStats
) -> float:
    """Change of total squared error when ``moved`` pixels leave ``donor``
    and join ``acceptor``; the cluster count is unchanged.

    Computed as the literal composition split-then-merge, so
    ``delta_e_correct == delta_e_merge(moved, acceptor)
    + delta_e_split(donor, moved)`` bitwise.
    """
    return delta_e_merge(moved, acceptor) + delta_e_split(donor, moved)


def _pixel_values(image) -> np.ndarray:
    pix = getattr(image, "pixels", image)
    return np.asarray(pix).ravel()


def brute_force_e(image, labels) -> float:
    """Testing oracle: total squared error of a labeling by direct summation.

    Two passes over the pixels: cluster means first, then squared deviations.
    Deliberately independent of the incremental stats algebra.
    """
    vals = _pixel_values(image).astype(np.float64)
    lab = np.asarray(labels).ravel()
    if lab.shape != vals.shape:
        raise ValueError("labels must cover all pixels")
    if lab.size and lab.min() < 0:
        raise ValueError("labels must be nonnegative integers")
    counts = np.bincount(lab)
    sums = np.bincount(lab, weights=vals)
    means = np.zeros_like(sums)
    nz = counts > 0
    means[nz] = sums[nz] / counts[nz]
    dev = vals - means[lab]
    return float(np.dot(dev, dev))


def _exact_label_stats(values: np.ndarray, labels: np.ndarray) -> dict[int, ClusterStats]:
    """Per-label exact ClusterStats via int64 scatter-adds.

    int64 is exact here: the squared-sum bound N*(L-1)^2 for any image this
    package accepts in one process stays far below 2^63.
    """
    lab = np.asarray(labels).ravel()
    vals = np.asarray(values).ravel().astype(np.int64)
    k = int(lab.max()) + 1 if lab.size else 0
    c0 = np.bincount(lab, minlength=k).astype(np.int64)
    c1 = np.zeros(k, dtype=np.int64)
    c2 = np.zeros(k, dtype=np.int64)
    np.add.at(c1, lab, vals)
    np.add.at(c2, lab, vals * vals)
    return {
        int(i): ClusterStats(int(c0[i]), int(c1[i]), int(c2[i]))
        for i in np.nonzero(c0)[0]
    }


@dataclass
class Partition:
    """A labeling of an image's pixels into clusters.

    ``labels`` is flat int32 aligned with ``image.pixels``; ``clusters`` maps
    every id present in ``labels`` to its exact stats; ``e_total`` is the sum
    of per-cluster errors taken in ascending id order.
    """

    image: "Image"
    labels: np.ndarray
    clusters: dict[int, ClusterStats]
    e_total: float = field(default=0.0)

    @property
    def g(self) -> int:
        """Number of nonempty clusters."""
        return len(self.clusters)

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @staticmethod
    def total_error(clusters: dict[int, ClusterStats]) -> float:
        return float(sum(clusters[c].error for c in sorted(clusters)))

    @classmethod
    def from_labels(cls, image, labels) -> "Partition":
        lab = np.ascontiguousarray(labels, dtype=np.int32).ravel()
        if lab.size != image.n:
            raise ValueError("labels must cover all pixels")
        if lab.min() < 0:
            raise ValueError("cluster ids must be nonnegative")
        clusters = _exact_label_stats(image.pixels, lab)
        return cls(image, lab, clusters, cls.total_error(clusters))

    @classmethod
    def from_value_map(cls, image, value_map) -> "Partition":
        """Build from a per-intensity cluster assignment (length ``levels``).

        Entries for unpopulated intensities may be -1.
        """
        vm = np.asarray(value_map, dtype=np.int32)
        if vm.size != image.levels:
            raise ValueError("value map must have one entry per intensity level")
        lab = vm[image.pixels]
        if lab.min() < 0:
            raise ValueError("value map leaves populated intensities unassigned")
        return cls.from_labels(image, lab)

    def value_groups(self) -> dict[int, dict[int, int]]:
        """Per-cluster intensity composition: ``{cluster: {value: count}}``."""
        groups: dict[int, dict[int, int]] = {c: {} for c in self.clusters}
        key = self.labels.astype(np.int64) * self.image.levels + self.image.pixels
        uniq, cnt = np.unique(key, return_counts=True)
        for k, c in zip(uniq.tolist(), cnt.tolist()):
            groups[k // self.image.levels][k % self.image.levels] = c
        return groups

    def copy(self) -> "Partition":
        return Partition(self.image, self.labels.copy(), dict(self.clusters), self.e_total)
