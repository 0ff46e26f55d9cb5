"""Intensity histogram with O(1) exact range statistics.

Prefix sums of ``counts``, ``v*counts`` and ``v^2*counts`` give the exact
accumulators of any intensity interval in constant time; interval errors are
correctly rounded floats of exact rationals (see core).
"""

from __future__ import annotations

import itertools

import numpy as np

from .core import ClusterStats
from .image import Image

# Beyond this bound the int64 prefix of v^2*counts could overflow; fall back
# to arbitrary-precision Python integers.
_INT64_SAFE = 2**62


class Histogram:
    """Pixel counts per intensity value plus exact prefix sums."""

    def __init__(self, counts, levels: int):
        c = np.ascontiguousarray(counts, dtype=np.int64)
        if c.size != levels:
            raise ValueError("counts must have one entry per intensity level")
        if c.size and c.min() < 0:
            raise ValueError("negative bin count")
        self.levels = int(levels)
        self.counts = c
        self.n = int(c.sum())
        v = np.arange(levels, dtype=np.int64)
        if self.n * (levels - 1) * (levels - 1) < _INT64_SAFE:
            self._c0 = np.concatenate(([0], np.cumsum(c)))
            self._c1 = np.concatenate(([0], np.cumsum(v * c)))
            self._c2 = np.concatenate(([0], np.cumsum(v * v * c)))
        else:
            ints = [int(x) for x in c]
            self._c0 = list(itertools.accumulate(ints, initial=0))
            self._c1 = list(itertools.accumulate((i * x for i, x in enumerate(ints)), initial=0))
            self._c2 = list(itertools.accumulate((i * i * x for i, x in enumerate(ints)), initial=0))

    @classmethod
    def from_image(cls, image: Image) -> "Histogram":
        return cls(np.bincount(image.pixels, minlength=image.levels), image.levels)

    @classmethod
    def from_pixels(cls, pixels, levels: int) -> "Histogram":
        arr = np.asarray(pixels, dtype=np.int64).ravel()
        return cls(np.bincount(arr, minlength=levels), levels)

    def range_stats(self, a: int, b: int) -> ClusterStats:
        """Exact stats of all pixels with intensity in ``[a, b)``."""
        if not 0 <= a <= b <= self.levels:
            raise ValueError(f"range [{a}, {b}) outside [0, {self.levels})")
        return ClusterStats(
            int(self._c0[b]) - int(self._c0[a]),
            int(self._c1[b]) - int(self._c1[a]),
            int(self._c2[b]) - int(self._c2[a]),
        )

    def range_cost(self, a: int, b: int) -> float:
        """Within-cluster error of the ``[a, b)`` intensity range.

        Correctly rounded float of the exact rational ``(n*s2 - s*s)/n``;
        0.0 for an empty range.
        """
        st = self.range_stats(a, b)
        if st.n == 0:
            return 0.0
        return (st.n * st.s2 - st.s * st.s) / st.n

    def total_stats(self) -> ClusterStats:
        return self.range_stats(0, self.levels)

    def populated_values(self) -> np.ndarray:
        """Ascending intensities with nonzero count."""
        return np.nonzero(self.counts)[0].astype(np.int64)

    @property
    def populated_count(self) -> int:
        return int(np.count_nonzero(self.counts))

    def value_count(self, value: int) -> int:
        return int(self.counts[value])


def build_histogram(image: Image) -> Histogram:
    """Tally every pixel of ``image`` into a Histogram."""
    return Histogram.from_image(image)
