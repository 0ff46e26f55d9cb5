"""Pure-Python/NumPy fallback for the compiled kernels.

Same call surface as ``_ckernels``; selected at import time by ``_backend``
when the extension is unavailable.  Every function must produce bit-identical
output to the compiled version: the DP fills use the same IEEE operations in
the same order, and component labels are canonicalized by the shared wrapper.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

COMPILED = False

_FOUR_CONN = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def label_components(grid: np.ndarray) -> np.ndarray:
    """4-connected components of equal-valued cells; arbitrary raw ids."""
    grid = np.ascontiguousarray(grid, dtype=np.int32)
    out = np.zeros(grid.shape, dtype=np.int32)
    base = 0
    for v in np.unique(grid):
        mask = grid == v
        lab, k = ndimage.label(mask, structure=_FOUR_CONN)
        out[mask] = lab[mask] + base - 1
        base += int(k)
    return out


def dp_segment(cost: np.ndarray, g_max: int) -> tuple[np.ndarray, np.ndarray]:
    """Suffix min-plus fill over a precomputed (B+1)x(B+1) cost matrix.

    suf[j, i] = min cost of partitioning bins i..B-1 into j intervals,
    combining as cost(i, t) + suf[j-1, t] (right association); arg keeps the
    first (smallest) minimizer.
    """
    b = cost.shape[0] - 1
    suf = np.full((g_max + 1, b + 1), np.inf, dtype=np.float64)
    arg = np.full((g_max + 1, b + 1), -1, dtype=np.int32)
    suf[1, :b] = cost[:b, b]
    for j in range(2, g_max + 1):
        # candidates[i, t] = cost[i, t] + suf[j-1, t]; valid for i < t <= b-j+1
        cand = cost + suf[j - 1][np.newaxis, :]
        hi = b - j + 2  # exclusive upper bound on t
        for i in range(0, b - j + 1):
            row = cand[i, i + 1 : hi]
            k = int(np.argmin(row))
            suf[j, i] = row[k]
            arg[j, i] = i + 1 + k
    return suf, arg


def dp_segment_prefix(
    c0: np.ndarray, c1: np.ndarray, c2: np.ndarray, g_max: int
) -> tuple[np.ndarray, np.ndarray]:
    """Suffix min-plus fill with on-the-fly interval costs from prefix sums.

    Used when the cost matrix would not fit in memory (many populated bins).
    Costs are computed in float64 from the int64 prefixes; beyond 2^53 the
    products round, so this path trades the exact-arithmetic guarantee of the
    matrix path for O(B) memory.
    """
    b = c0.shape[0] - 1
    f0 = c0.astype(np.float64)
    f1 = c1.astype(np.float64)
    f2 = c2.astype(np.float64)

    def cost_row(i: int, lo: int, hi: int) -> np.ndarray:
        n = f0[lo:hi] - f0[i]
        s = f1[lo:hi] - f1[i]
        s2 = f2[lo:hi] - f2[i]
        out = np.zeros(hi - lo, dtype=np.float64)
        nz = n > 0
        out[nz] = (n[nz] * s2[nz] - s[nz] * s[nz]) / n[nz]
        return out

    suf = np.full((g_max + 1, b + 1), np.inf, dtype=np.float64)
    arg = np.full((g_max + 1, b + 1), -1, dtype=np.int32)
    for i in range(b):
        suf[1, i] = cost_row(i, b, b + 1)[0]
    for j in range(2, g_max + 1):
        hi = b - j + 2
        for i in range(0, b - j + 1):
            row = cost_row(i, i + 1, hi) + suf[j - 1, i + 1 : hi]
            k = int(np.argmin(row))
            suf[j, i] = row[k]
            arg[j, i] = i + 1 + k
    return suf, arg
