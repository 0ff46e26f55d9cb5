"""Exact optimal g-cluster approximations of the intensity histogram.

Squared-error-optimal 1-D clusterings are interval-structured, so the global
optimum over all pixel clusterings into g clusters is a threshold set; it is
found by dynamic programming over populated bins.  ``exhaustive_optimal``
enumerates every threshold combination with the same interval-cost arithmetic
and must agree with the DP bit for bit; it is the independent oracle guarding
the recurrence.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import _backend
from .clustering import ApproximationSequence, ApproxRecord
from .histogram import Histogram

# Above this many populated bins the exact (B+1)^2 cost matrix is replaced by
# on-the-fly float costs inside the DP kernel.
COST_MATRIX_LIMIT = 2048

_EXHAUSTIVE_MAX_BINS = 20
_EXHAUSTIVE_MAX_G = 5


@dataclass(frozen=True)
class ThresholdSet:
    """Strictly increasing thresholds t_1 < ... < t_{g-1} and the error E.

    Interval k is ``[t_{k-1}, t_k)`` on the intensity axis (with t_0 = 0 and
    t_g = levels); each interval holds at least one pixel.
    """

    thresholds: tuple[int, ...]
    e: float

    @property
    def g(self) -> int:
        return len(self.thresholds) + 1

    def labels_for_values(self, levels: int) -> np.ndarray:
        """Per-intensity class ids (0-based) induced by the thresholds."""
        lab = np.zeros(levels, dtype=np.int32)
        for t in self.thresholds:
            lab[t:] += 1
        return lab


def _populated_prefixes(h: Histogram):
    """Prefix sums of count/sum/sumsq over populated bins only (int64)."""
    vals = h.populated_values()
    c = h.counts[vals]
    v = vals.astype(np.int64)
    c0 = np.concatenate(([0], np.cumsum(c)))
    c1 = np.concatenate(([0], np.cumsum(v * c)))
    c2 = np.concatenate(([0], np.cumsum(v * v * c)))
    return vals, c0, c1, c2


def interval_cost_matrix(h: Histogram) -> tuple[np.ndarray, np.ndarray]:
    """(values, cost) where cost[i, j] is the error of bins i..j-1.

    Every entry is the correctly rounded float of the exact rational
    ``(n*s2 - s*s)/n``; vectorized int64 arithmetic is used only when its
    intermediates provably stay exact, otherwise Python integers take over.
    """
    vals, c0, c1, c2 = _populated_prefixes(h)
    b = len(vals)
    n_tot, s_tot, s2_tot = int(c0[b]), int(c1[b]), int(c2[b])
    cost = np.zeros((b + 1, b + 1), dtype=np.float64)
    int64_exact = n_tot * s2_tot < 2**53 and s_tot * s_tot < 2**53
    if int64_exact:
        n = c0[np.newaxis, :] - c0[:, np.newaxis]
        s = c1[np.newaxis, :] - c1[:, np.newaxis]
        s2 = c2[np.newaxis, :] - c2[:, np.newaxis]
        num = n * s2 - s * s
        np.divide(num, n, out=cost, where=n > 0)
    else:
        p0 = [int(x) for x in c0]
        p1 = [int(x) for x in c1]
        p2 = [int(x) for x in c2]
        for i in range(b):
            for j in range(i + 1, b + 1):
                n = p0[j] - p0[i]
                s = p1[j] - p1[i]
                s2 = p2[j] - p2[i]
                cost[i, j] = (n * s2 - s * s) / n
    return vals, cost


def _best_two_classes(h: Histogram) -> tuple[int, float]:
    """Exact-arithmetic scan for the optimal single threshold (g = 2)."""
    vals, c0, c1, c2 = _populated_prefixes(h)
    b = len(vals)
    n_tot, s_tot = int(c0[b]), int(c1[b])
    best_idx = -1
    best_num = best_den = 0
    for t in range(1, b):
        n0, s0 = int(c0[t]), int(c1[t])
        n1, s1 = n_tot - n0, s_tot - s0
        # minimizing E_left + E_right == maximizing the between-class term
        d = s0 * n1 - s1 * n0
        num, den = d * d, n0 * n1
        if best_idx < 0 or num * best_den > best_num * den:
            best_idx, best_num, best_den = t, num, den
    def seg_cost(i, j):
        n = int(c0[j]) - int(c0[i])
        s = int(c1[j]) - int(c1[i])
        s2 = int(c2[j]) - int(c2[i])
        return (n * s2 - s * s) / n
    e = seg_cost(0, best_idx) + seg_cost(best_idx, b)
    return best_idx, e


class _DpTables:
    """Cached suffix-DP tables for one histogram up to some g."""

    def __init__(self, h: Histogram, g_max: int):
        self.vals, c0, c1, c2 = _populated_prefixes(h)
        b = len(self.vals)
        if b <= COST_MATRIX_LIMIT:
            _, cost = interval_cost_matrix(h)
            self.suf, self.arg = _backend.dp_segment(cost, g_max)
        else:
            self.suf, self.arg = _backend.dp_segment_prefix(c0, c1, c2, g_max)

    def threshold_set(self, g: int) -> ThresholdSet:
        cuts = []
        i = 0
        for j in range(g, 1, -1):
            t = int(self.arg[j, i])
            cuts.append(int(self.vals[t]))
            i = t
        return ThresholdSet(tuple(cuts), float(self.suf[g, 0]))


def optimal_partition(h: Histogram, g: int) -> ThresholdSet:
    """Globally E-minimal division of the histogram into g intensity classes.

    Ties between equal-error threshold sets resolve to the lexicographically
    smallest threshold vector.
    """
    b = h.populated_count
    if not 1 <= g <= b:
        raise ValueError(f"g must be in [1, {b}], got {g}")
    if g == 1:
        return ThresholdSet((), h.range_cost(0, h.levels))
    if g == 2:
        idx, e = _best_two_classes(h)
        return ThresholdSet((int(h.populated_values()[idx]),), e)
    return _DpTables(h, g).threshold_set(g)


def optimal_threshold_sets(h: Histogram, g_max: int) -> list[ThresholdSet]:
    """Optimal threshold sets for g = 1 .. min(g_max, populated bins)."""
    if g_max < 1:
        raise ValueError("g_max must be >= 1")
    b = h.populated_count
    top = min(g_max, b)
    out = [optimal_partition(h, 1)]
    if top >= 2:
        out.append(optimal_partition(h, 2))
    if top >= 3:
        tables = _DpTables(h, top)
        out.extend(tables.threshold_set(g) for g in range(3, top + 1))
    return out

def optimal_sequence(h: Histogram, g_max: int) -> ApproximationSequence:
    """The lower-boundary curve: optimal E for each successive g."""
    sets = optimal_threshold_sets(h, g_max)
    n = h.n
    return ApproximationSequence(
        [ApproxRecord(ts.g, ts.e, (ts.e / n) ** 0.5 if n else 0.0) for ts in sets]
    )


def exhaustive_optimal(h: Histogram, g: int) -> ThresholdSet:
    """Brute-force oracle: try every threshold combination.

    Same interval-cost arithmetic and the same right-associated summation as
    the DP, so the minimal E matches ``optimal_partition`` bitwise.  Guarded
    to small instances.
    """
    b = h.populated_count
    if b > _EXHAUSTIVE_MAX_BINS or g > _EXHAUSTIVE_MAX_G:
        raise ValueError(
            f"exhaustive oracle guarded to <= {_EXHAUSTIVE_MAX_BINS} bins"
            f" and g <= {_EXHAUSTIVE_MAX_G}"
        )
    if not 1 <= g <= b:
        raise ValueError(f"g must be in [1, {b}], got {g}")
    vals, _, _, _ = _populated_prefixes(h)
    costs = {}
    bounds = [int(v) for v in vals] + [h.levels]
    for i in range(b):
        for j in range(i + 1, b + 1):
            costs[i, j] = h.range_cost(bounds[i], bounds[j])
    best_combo = None
    best_e = np.inf
    for combo in itertools.combinations(range(1, b), g - 1):
        edges = (0,) + combo + (b,)
        e = 0.0
        for i, j in reversed(list(zip(edges, edges[1:]))):
            e = costs[i, j] + e
        if e < best_e:
            best_e, best_combo = e, combo
    return ThresholdSet(tuple(int(vals[t]) for t in best_combo), float(best_e))
