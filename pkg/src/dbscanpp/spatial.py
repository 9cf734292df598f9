"""Exact Euclidean range and nearest-neighbour queries over a KD-tree.

The tree is balanced: every internal node splits its points at the median of
the coordinate with the widest spread. Each node stores the bounding box of
its points, and both pruning tests (box entirely outside the ball, box
entirely inside the ball) compare squared distances accumulated dimension by
dimension in the same order as the per-point test. Rounding is monotone, so
pruning never changes a result: queries return exactly what a linear scan
computing ``sum_d (x_d - c_d)**2 <= r**2`` would.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import DatasetLike, as_dataset

LEAF_SIZE = 16
_STACK = 256


class SpatialIndex:
    """Immutable KD-tree over the rows of a :class:`Dataset`.

    Node ``k`` owns ``perm[start[k]:end[k]]``; leaves have ``left[k] == -1``.
    """

    def __init__(self, data: DatasetLike, leaf_size: int = LEAF_SIZE):
        if leaf_size < 1:
            raise ValueError(f"leaf_size must be >= 1, got {leaf_size}")
        data = as_dataset(data)
        self.data = data
        self.points = data.points
        tree = _build(self.points, int(leaf_size))
        self.perm, self.start, self.end, self.left, self.right, self.lo, self.hi = tree
        for arr in tree:
            arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def D(self) -> int:
        return self.points.shape[1]

    @property
    def n_nodes(self) -> int:
        return self.start.shape[0]

    def _tree(self):
        return (self.points, self.perm, self.start, self.end, self.left, self.right, self.lo, self.hi)

    def _vector(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=np.float64).reshape(-1)
        if q.shape[0] != self.D:
            raise ValueError(f"query has dimension {q.shape[0]}, index has {self.D}")
        return q

    def _rows(self, queries) -> np.ndarray:
        q = np.asarray(queries, dtype=np.float64)
        if q.ndim == 1:
            q = q.reshape(-1, self.D) if self.D > 1 else q.reshape(-1, 1)
        if q.ndim != 2 or q.shape[1] != self.D:
            raise ValueError(f"queries must have shape (k, {self.D}), got {q.shape}")
        return np.ascontiguousarray(q)


def build_index(data: DatasetLike, leaf_size: int = LEAF_SIZE) -> SpatialIndex:
    return SpatialIndex(data, leaf_size=leaf_size)


def _check_radius(radius: float) -> float:
    radius = float(radius)
    if not radius >= 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    return radius


def range_query(index: SpatialIndex, center, radius: float) -> np.ndarray:
    """Indices ``i`` with ``|x_i - center| <= radius``, sorted ascending."""
    c = index._vector(center)
    r2 = _check_radius(radius) ** 2
    out = np.empty(index.n, dtype=np.int64)
    k = _range_collect(*index._tree(), c, r2, out)
    return np.sort(out[:k])


def range_count(index: SpatialIndex, centers, radius: float, cap: int = 0) -> np.ndarray:
    """Ball sizes for each row of ``centers``; counting stops at ``cap`` when ``cap > 0``."""
    q = index._rows(centers)
    r2 = _check_radius(radius) ** 2
    return _count_many(*index._tree(), q, r2, int(cap))


def nearest_within(index: SpatialIndex, query, radius: float = np.inf):
    """``(index, distance)`` of the closest point within ``radius``, or ``None``.

    Ties go to the smallest index.
    """
    q = index._vector(query)
    r2 = _check_radius(radius) ** 2
    i, d2 = _nearest(*index._tree(), q, r2)
    if i < 0:
        return None
    return int(i), float(np.sqrt(d2))


def nearest_many(index: SpatialIndex, queries, radius: float = np.inf):
    """Vectorised :func:`nearest_within`; misses are ``-1`` / ``inf``."""
    q = index._rows(queries)
    r2 = _check_radius(radius) ** 2
    idx, d2 = _nearest_many(*index._tree(), q, r2)
    return idx, np.sqrt(d2)


def squared_distances(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Squared distances accumulated dimension by dimension (matches the tree)."""
    points = np.asarray(points, dtype=np.float64)
    acc = np.zeros(points.shape[0])
    for d in range(points.shape[1]):
        diff = points[:, d] - center[d]
        acc += diff * diff
    return acc


# --- compiled kernels -------------------------------------------------------


@njit(cache=True)
def _select(perm, s, e, k, points, dim):
    """Reorder ``perm[s:e]`` so position ``k`` holds its order statistic along ``dim``.

    Three-way quickselect with a median-of-three pivot; deterministic and
    linear on inputs with many repeated coordinates.
    """
    lo = s
    hi = e - 1
    while lo < hi:
        a = points[perm[lo], dim]
        b = points[perm[(lo + hi) // 2], dim]
        c = points[perm[hi], dim]
        if a > b:
            a, b = b, a
        if b > c:
            b = c
        pivot = a if a > b else b
        lt = lo
        gt = hi
        i = lo
        while i <= gt:
            v = points[perm[i], dim]
            if v < pivot:
                perm[lt], perm[i] = perm[i], perm[lt]
                lt += 1
                i += 1
            elif v > pivot:
                perm[gt], perm[i] = perm[i], perm[gt]
                gt -= 1
            else:
                i += 1
        if k < lt:
            hi = lt - 1
        elif k > gt:
            lo = gt + 1
        else:
            return


@njit(cache=True)
def _build(points, leaf_size):
    n, d = points.shape
    smallest_child = max(1, (leaf_size + 1) // 2)
    cap = 2 * ((n + smallest_child - 1) // smallest_child) + 1
    perm = np.arange(n)
    start = np.empty(cap, dtype=np.int64)
    end = np.empty(cap, dtype=np.int64)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    lo = np.empty((cap, d))
    hi = np.empty((cap, d))
    stack = np.empty(_STACK, dtype=np.int64)
    start[0] = 0
    end[0] = n
    n_nodes = 1
    stack[0] = 0
    top = 1
    while top > 0:
        top -= 1
        node = stack[top]
        s = start[node]
        e = end[node]
        for j in range(d):
            lo[node, j] = points[perm[s], j]
            hi[node, j] = points[perm[s], j]
        for p in range(s + 1, e):
            i = perm[p]
            for j in range(d):
                v = points[i, j]
                if v < lo[node, j]:
                    lo[node, j] = v
                elif v > hi[node, j]:
                    hi[node, j] = v
        if e - s <= leaf_size:
            continue
        dim = 0
        spread = hi[node, 0] - lo[node, 0]
        for j in range(1, d):
            if hi[node, j] - lo[node, j] > spread:
                spread = hi[node, j] - lo[node, j]
                dim = j
        if not spread > 0:
            continue
        mid = s + (e - s) // 2
        _select(perm, s, e, mid, points, dim)
        a = n_nodes
        b = n_nodes + 1
        n_nodes += 2
        start[a] = s
        end[a] = mid
        start[b] = mid
        end[b] = e
        left[node] = a
        right[node] = b
        stack[top] = b
        stack[top + 1] = a
        top += 2
    return (
        perm,
        start[:n_nodes].copy(),
        end[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        lo[:n_nodes].copy(),
        hi[:n_nodes].copy(),
    )


@njit(cache=True, nogil=True)
def _box_min_d2(lo, hi, node, c):
    acc = 0.0
    for d in range(c.shape[0]):
        if c[d] < lo[node, d]:
            t = lo[node, d] - c[d]
            acc += t * t
        elif c[d] > hi[node, d]:
            t = c[d] - hi[node, d]
            acc += t * t
    return acc


@njit(cache=True, nogil=True)
def _box_max_d2(lo, hi, node, c):
    acc = 0.0
    for d in range(c.shape[0]):
        a = c[d] - lo[node, d]
        b = hi[node, d] - c[d]
        t = a if a > b else b
        acc += t * t
    return acc


@njit(cache=True, nogil=True)
def _point_d2(points, i, c):
    acc = 0.0
    for d in range(c.shape[0]):
        t = points[i, d] - c[d]
        acc += t * t
    return acc


@njit(cache=True, nogil=True)
def _range_collect(points, perm, start, end, left, right, lo, hi, c, r2, out):
    stack = np.empty(_STACK, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    k = 0
    while top > 0:
        top -= 1
        node = stack[top]
        if _box_min_d2(lo, hi, node, c) > r2:
            continue
        if left[node] < 0 or _box_max_d2(lo, hi, node, c) <= r2:
            inside = left[node] >= 0
            for p in range(start[node], end[node]):
                i = perm[p]
                if inside or _point_d2(points, i, c) <= r2:
                    out[k] = i
                    k += 1
            continue
        stack[top] = left[node]
        stack[top + 1] = right[node]
        top += 2
    return k


@njit(cache=True, nogil=True)
def _range_count(points, perm, start, end, left, right, lo, hi, c, r2, cap):
    stack = np.empty(_STACK, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    k = 0
    while top > 0:
        top -= 1
        node = stack[top]
        if _box_min_d2(lo, hi, node, c) > r2:
            continue
        if _box_max_d2(lo, hi, node, c) <= r2:
            k += end[node] - start[node]
        elif left[node] < 0:
            for p in range(start[node], end[node]):
                if _point_d2(points, perm[p], c) <= r2:
                    k += 1
        else:
            stack[top] = left[node]
            stack[top + 1] = right[node]
            top += 2
        if cap > 0 and k >= cap:
            return k
    return k


@njit(cache=True, nogil=True)
def _count_many(points, perm, start, end, left, right, lo, hi, queries, r2, cap):
    out = np.empty(queries.shape[0], dtype=np.int64)
    for j in range(queries.shape[0]):
        out[j] = _range_count(points, perm, start, end, left, right, lo, hi, queries[j], r2, cap)
    return out


@njit(cache=True, nogil=True)
def _count_rows(points, perm, start, end, left, right, lo, hi, rows, r2, cap):
    out = np.empty(rows.shape[0], dtype=np.int64)
    for j in range(rows.shape[0]):
        out[j] = _range_count(points, perm, start, end, left, right, lo, hi, points[rows[j]], r2, cap)
    return out


@njit(cache=True, nogil=True)
def _nearest(points, perm, start, end, left, right, lo, hi, c, r2):
    stack = np.empty(_STACK, dtype=np.int64)
    top = 0
    stack[top] = 0
    top += 1
    best = r2
    best_i = -1
    while top > 0:
        top -= 1
        node = stack[top]
        if _box_min_d2(lo, hi, node, c) > best:
            continue
        if left[node] < 0:
            for p in range(start[node], end[node]):
                i = perm[p]
                d2 = _point_d2(points, i, c)
                if d2 < best or (d2 == best and (best_i < 0 or i < best_i)):
                    best = d2
                    best_i = i
            continue
        a = left[node]
        b = right[node]
        # push the farther child first so the nearer one is explored first
        if _box_min_d2(lo, hi, a, c) <= _box_min_d2(lo, hi, b, c):
            stack[top] = b
            stack[top + 1] = a
        else:
            stack[top] = a
            stack[top + 1] = b
        top += 2
    return best_i, best


@njit(cache=True, nogil=True)
def _nearest_many(points, perm, start, end, left, right, lo, hi, queries, r2):
    k = queries.shape[0]
    idx = np.empty(k, dtype=np.int64)
    d2 = np.empty(k, dtype=np.float64)
    for j in range(k):
        i, b = _nearest(points, perm, start, end, left, right, lo, hi, queries[j], r2)
        idx[j] = i
        d2[j] = b if i >= 0 else np.inf
    return idx, d2
