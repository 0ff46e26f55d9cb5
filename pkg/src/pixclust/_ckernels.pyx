# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: 4-connected labeling and the interval-DP table fill.

Must stay bit-compatible with ``_kernels_py``: plain IEEE double arithmetic,
same evaluation order, first-minimum tie rule.  Compiled without
floating-point contraction so C and NumPy round identically.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

COMPILED = True


cdef int _find(cnp.int32_t* parent, int x) nogil:
    cdef int root = x
    while parent[root] != root:
        root = parent[root]
    # path compression
    cdef int cur = x, nxt
    while parent[cur] != root:
        nxt = parent[cur]
        parent[cur] = root
        cur = nxt
    return root


def label_components(grid):
    """Two-pass union-find labeling of equal-valued 4-connected cells."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] g = np.ascontiguousarray(grid, dtype=np.int32)
    cdef int h = g.shape[0], w = g.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] out = np.empty((h, w), dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] parent = np.arange(h * w, dtype=np.int32)
    cdef cnp.int32_t* par = &parent[0]
    cdef int y, x, idx, ra, rb
    with nogil:
        # first pass: union with left and upper neighbors of equal value
        for y in range(h):
            for x in range(w):
                idx = y * w + x
                if x > 0 and g[y, x] == g[y, x - 1]:
                    ra = _find(par, idx)
                    rb = _find(par, idx - 1)
                    if ra != rb:
                        if ra < rb:
                            par[rb] = ra
                        else:
                            par[ra] = rb
                if y > 0 and g[y, x] == g[y - 1, x]:
                    ra = _find(par, idx)
                    rb = _find(par, idx - w)
                    if ra != rb:
                        if ra < rb:
                            par[rb] = ra
                        else:
                            par[ra] = rb
        # second pass: resolve every cell to its root
        for y in range(h):
            for x in range(w):
                idx = y * w + x
                out[y, x] = _find(par, idx)
    return out


def dp_segment(cost, int g_max):
    """Suffix min-plus fill over a precomputed (B+1)x(B+1) cost matrix."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef int b = c.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] suf = np.full((g_max + 1, b + 1), np.inf)
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] arg = np.full((g_max + 1, b + 1), -1, dtype=np.int32)
    cdef int j, i, t, hi, best_t
    cdef double v, best
    with nogil:
        for i in range(b):
            suf[1, i] = c[i, b]
        for j in range(2, g_max + 1):
            hi = b - j + 2
            for i in range(0, b - j + 1):
                best = INFINITY
                best_t = -1
                for t in range(i + 1, hi):
                    v = c[i, t] + suf[j - 1, t]
                    if v < best:
                        best = v
                        best_t = t
                suf[j, i] = best
                arg[j, i] = best_t
    return np.asarray(suf), np.asarray(arg)


def dp_segment_prefix(c0, c1, c2, int g_max):
    """Suffix min-plus fill with on-the-fly float64 interval costs."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] f0 = np.asarray(c0, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] f1 = np.asarray(c1, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1, mode="c"] f2 = np.asarray(c2, dtype=np.float64)
    cdef int b = f0.shape[0] - 1
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] suf = np.full((g_max + 1, b + 1), np.inf)
    cdef cnp.ndarray[cnp.int32_t, ndim=2, mode="c"] arg = np.full((g_max + 1, b + 1), -1, dtype=np.int32)
    cdef int j, i, t, hi, best_t
    cdef double v, best, n, s, s2
    with nogil:
        for i in range(b):
            n = f0[b] - f0[i]
            s = f1[b] - f1[i]
            s2 = f2[b] - f2[i]
            suf[1, i] = (n * s2 - s * s) / n if n > 0 else 0.0
        for j in range(2, g_max + 1):
            hi = b - j + 2
            for i in range(0, b - j + 1):
                best = INFINITY
                best_t = -1
                for t in range(i + 1, hi):
                    n = f0[t] - f0[i]
                    s = f1[t] - f1[i]
                    s2 = f2[t] - f2[i]
                    v = ((n * s2 - s * s) / n if n > 0 else 0.0) + suf[j - 1, t]
                    if v < best:
                        best = v
                        best_t = t
                suf[j, i] = best
                arg[j, i] = best_t
    return np.asarray(suf), np.asarray(arg)
