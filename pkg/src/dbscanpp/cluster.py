"""DBSCAN and DBSCAN++ pipelines.

Both algorithms share three steps: pick candidate points, keep the candidates
whose closed epsilon-ball holds at least ``min_pts`` points (the point itself
included), then link every core to the points around it and read clusters
off the connected components. DBSCAN uses all points as candidates; DBSCAN++
uses ``m`` of them, chosen uniformly without replacement or by greedy
farthest-point (K-center) traversal.
"""

from __future__ import annotations

import time
from contextlib import contextmanager

import numpy as np
from numba import njit

from .core import (
    ASSIGNMENTS,
    NOISE,
    AlgoParams,
    ClusteringResult,
    ClusterLabels,
    CoreSet,
    DatasetLike,
    as_dataset,
    canonicalize_labels,
)
from .rng import Xoshiro256
from .spatial import (
    SpatialIndex,
    _count_rows,
    _nearest_many,
    _range_collect,
    build_index,
    squared_distances,
)


@contextmanager
def _timed(timing: dict, phase: str):
    t0 = time.perf_counter()
    try:
        yield
    finally:
        timing[phase] = timing.get(phase, 0.0) + (time.perf_counter() - t0) * 1e3


# --- sampling ---------------------------------------------------------------


def _check_m(n: int, m: int) -> int:
    if int(m) != m or not 1 <= m <= n:
        raise ValueError(f"m must be an integer in [1, n={n}], got {m}")
    return int(m)


def sample_uniform(n: int, m: int, seed: int = 0) -> np.ndarray:
    """``m`` distinct indices from ``range(n)``, sorted.

    Draws come from a partial Fisher-Yates shuffle driven by
    :class:`~dbscanpp.rng.Xoshiro256`, so the sample is fixed by ``seed``.
    """
    m = _check_m(n, m)
    return np.sort(Xoshiro256(seed).sample_without_replacement(n, m))


@njit(cache=True, nogil=True)
def _kcenter(points, m):
    n, d = points.shape
    picked = np.empty(m, dtype=np.int64)
    nearest = np.empty(n)
    picked[0] = 0
    for i in range(n):
        acc = 0.0
        for j in range(d):
            t = points[i, j] - points[0, j]
            acc += t * t
        nearest[i] = acc
    for k in range(1, m):
        # strict comparison keeps the first maximum: ties go to the smallest index
        far = 0
        for i in range(1, n):
            if nearest[i] > nearest[far]:
                far = i
        picked[k] = far
        for i in range(n):
            acc = 0.0
            for j in range(d):
                t = points[i, j] - points[far, j]
                acc += t * t
            if acc < nearest[i]:
                nearest[i] = acc
    return picked, nearest.max()


def kcenter_order(data: DatasetLike, m: int):
    """Greedy farthest-point traversal from index 0.

    Returns the picked indices in selection order and the covering radius
    ``max_x min_s |x - s|`` of the picked set.
    """
    pts = as_dataset(data).points
    m = _check_m(pts.shape[0], m)
    picked, cover2 = _kcenter(pts, m)
    return picked, float(np.sqrt(cover2))


def sample_kcenter(data: DatasetLike, m: int) -> np.ndarray:
    """Greedy K-center subset of size ``m`` starting from index 0, sorted."""
    picked, _ = kcenter_order(data, m)
    return np.sort(picked)


def kcenter_objective(data: DatasetLike, subset) -> float:
    """Covering radius ``max_x min_{s in subset} |x - s|``."""
    pts = as_dataset(data).points
    nearest = np.full(pts.shape[0], np.inf)
    for s in np.asarray(subset, dtype=np.int64):
        np.minimum(nearest, squared_distances(pts, pts[s]), out=nearest)
    return float(np.sqrt(nearest.max()))


# --- core points ------------------------------------------------------------


def _index_for(data, index: SpatialIndex | None) -> SpatialIndex:
    if index is None:
        return build_index(data)
    if index.data is not data and index.points.shape != data.points.shape:
        raise ValueError("index was built over a different dataset")
    return index


def find_core_points(
    data: DatasetLike,
    index: SpatialIndex | None,
    candidates,
    epsilon: float,
    min_pts: int,
) -> CoreSet:
    """Candidates whose closed ``epsilon``-ball contains at least ``min_pts`` points."""
    data = as_dataset(data)
    index = _index_for(data, index)
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if min_pts < 1:
        raise ValueError(f"min_pts must be >= 1, got {min_pts}")
    cand = np.unique(np.asarray(candidates, dtype=np.int64))
    if cand.size and (cand[0] < 0 or cand[-1] >= data.n):
        raise ValueError("candidate index out of range")
    if cand.size == 0:
        return CoreSet(cand)
    counts = _count_rows(*index._tree(), cand, float(epsilon) ** 2, int(min_pts))
    return CoreSet(cand[counts >= min_pts])


# --- connected components ---------------------------------------------------


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def _union(parent, rank, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if rank[ra] < rank[rb]:
        parent[ra] = rb
    elif rank[ra] > rank[rb]:
        parent[rb] = ra
    else:
        parent[rb] = ra
        rank[ra] += 1


@njit(cache=True, nogil=True)
def _link_balls(points, perm, start, end, left, right, lo, hi, sources, r2, parent, rank, in_graph, buf):
    """Union every source with each point of its closed ball."""
    for s in sources:
        in_graph[s] = True
        k = _range_collect(points, perm, start, end, left, right, lo, hi, points[s], r2, buf)
        for t in range(k):
            j = buf[t]
            in_graph[j] = True
            _union(parent, rank, s, j)


@njit(cache=True, nogil=True)
def _component_labels(parent, in_graph):
    """Dense component ids by first occurrence; points outside the graph are NOISE."""
    n = parent.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    root_id = np.full(n, -1, dtype=np.int64)
    nxt = 0
    for i in range(n):
        if not in_graph[i]:
            continue
        r = _find(parent, i)
        if root_id[r] < 0:
            root_id[r] = nxt
            nxt += 1
        labels[i] = root_id[r]
    return labels


def _graph_labels(index: SpatialIndex, sources: np.ndarray, radius: float, timing: dict) -> np.ndarray:
    n = index.n
    parent = np.arange(n, dtype=np.int64)
    rank = np.zeros(n, dtype=np.int8)
    in_graph = np.zeros(n, dtype=np.bool_)
    buf = np.empty(n, dtype=np.int64)
    with _timed(timing, "graph_build"):
        _link_balls(*index._tree(), sources, float(radius) ** 2, parent, rank, in_graph, buf)
    with _timed(timing, "components"):
        labels = _component_labels(parent, in_graph)
    return labels


def cluster_from_cores(
    data: DatasetLike,
    index: SpatialIndex | None,
    cores,
    epsilon: float,
    epsilon_connect: float | None = None,
    assignment: str = "graph",
    timing: dict | None = None,
) -> ClusterLabels:
    """Turn a core set into cluster labels.

    ``graph``: each core is joined to every point within ``epsilon_connect``
    and clusters are the connected components; untouched points are NOISE.

    ``nearest-core``: cores within ``epsilon_connect`` of each other are
    linked, then every other point takes the cluster of its nearest core if
    that core is within ``epsilon``, else NOISE.
    """
    data = as_dataset(data)
    index = _index_for(data, index)
    timing = {} if timing is None else timing
    eps_c = float(epsilon if epsilon_connect is None else epsilon_connect)
    if eps_c < epsilon:
        raise ValueError(f"epsilon_connect ({eps_c}) must be >= epsilon ({epsilon})")
    if assignment not in ASSIGNMENTS:
        raise ValueError(f"assignment must be one of {ASSIGNMENTS}, got {assignment!r}")
    core_idx = np.asarray(cores.indices if isinstance(cores, CoreSet) else cores, dtype=np.int64)

    if core_idx.size == 0:
        for phase in ("graph_build", "components", "assignment"):
            timing.setdefault(phase, 0.0)
        return ClusterLabels(np.full(data.n, NOISE, dtype=np.int64))

    if assignment == "graph":
        labels = _graph_labels(index, core_idx, eps_c, timing)
        timing.setdefault("assignment", 0.0)
        return ClusterLabels(labels)

    core_index = build_index(data.points[core_idx])
    core_labels = _graph_labels(core_index, np.arange(core_idx.size), eps_c, timing)
    with _timed(timing, "assignment"):
        labels = np.full(data.n, NOISE, dtype=np.int64)
        labels[core_idx] = core_labels
        others = np.setdiff1d(np.arange(data.n), core_idx, assume_unique=True)
        if others.size:
            # core sub-indices follow ascending original order, so ties still favour the smallest index
            near, _ = _nearest_many(*core_index._tree(), data.points[others], float(epsilon) ** 2)
            hit = near >= 0
            labels[others[hit]] = core_labels[near[hit]]
        labels = canonicalize_labels(labels).assignments
    return ClusterLabels(labels)


# --- pipelines --------------------------------------------------------------


def dbscan(
    data: DatasetLike,
    epsilon: float,
    min_pts: int = 10,
    epsilon_connect: float | None = None,
    assignment: str = "graph",
    index: SpatialIndex | None = None,
) -> ClusteringResult:
    """DBSCAN in its graph form: every point is a candidate core."""
    data = as_dataset(data)
    params = AlgoParams(
        epsilon=epsilon,
        min_pts=min_pts,
        m=data.n,
        strategy="uniform",
        epsilon_connect=epsilon_connect,
        assignment=assignment,
    )
    timing: dict = {}
    with _timed(timing, "index"):
        index = _index_for(data, index)
    timing["sampling"] = 0.0
    with _timed(timing, "core_detection"):
        cores = find_core_points(data, index, np.arange(data.n), epsilon, min_pts)
    labels = cluster_from_cores(
        data, index, cores, epsilon, params.epsilon_connect, assignment, timing
    )
    return ClusteringResult(labels, cores, params, algorithm="dbscan", timing=timing)


def select_candidates(data: DatasetLike, params: AlgoParams) -> np.ndarray:
    data = as_dataset(data)
    if params.strategy == "kcenter":
        return sample_kcenter(data, params.m)
    return sample_uniform(data.n, params.m, params.seed)


def dbscan_pp(data: DatasetLike, params: AlgoParams, index: SpatialIndex | None = None) -> ClusteringResult:
    """DBSCAN++: density queries only at ``params.m`` sampled points."""
    data = as_dataset(data)
    _check_m(data.n, params.m)
    timing: dict = {}
    with _timed(timing, "index"):
        index = _index_for(data, index)
    with _timed(timing, "sampling"):
        candidates = select_candidates(data, params)
    with _timed(timing, "core_detection"):
        cores = find_core_points(data, index, candidates, params.epsilon, params.min_pts)
    labels = cluster_from_cores(
        data, index, cores, params.epsilon, params.epsilon_connect, params.assignment, timing
    )
    return ClusteringResult(labels, cores, params, algorithm="dbscanpp", timing=timing)
