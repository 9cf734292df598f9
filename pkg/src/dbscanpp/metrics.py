"""Clustering scores, Hausdorff distance, noise comparison and level-set ground truth."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import gammaln

from .core import NOISE, ClusteringResult, LabelsLike, as_labels, partitions_equal
from .spatial import build_index, nearest_many


@dataclass(frozen=True, eq=False)
class ContingencyTable:
    counts: np.ndarray

    @property
    def row_sums(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    @property
    def n(self) -> int:
        return int(self.counts.sum())


def _paired(labels_a: LabelsLike, labels_b: LabelsLike, exclude_noise: bool):
    a = as_labels(labels_a).assignments
    b = as_labels(labels_b).assignments
    if a.shape != b.shape:
        raise ValueError(f"label length mismatch: {a.shape[0]} vs {b.shape[0]}")
    if exclude_noise:
        keep = (a != NOISE) & (b != NOISE)
        a, b = a[keep], b[keep]
    return a, b


def contingency(labels_a: LabelsLike, labels_b: LabelsLike, exclude_noise: bool = False) -> ContingencyTable:
    """Co-occurrence counts; rows follow sorted ids of ``a``, columns those of ``b``.

    NOISE counts as one ordinary label unless ``exclude_noise`` drops every
    point that is NOISE on either side.
    """
    a, b = _paired(labels_a, labels_b, exclude_noise)
    ua, ia = np.unique(a, return_inverse=True)
    ub, ib = np.unique(b, return_inverse=True)
    counts = np.zeros((ua.size, ub.size), dtype=np.int64)
    np.add.at(counts, (ia, ib), 1)
    return ContingencyTable(counts)


def _pairs(x) -> int:
    return sum(int(v) * (int(v) - 1) // 2 for v in np.asarray(x).ravel() if v > 1)


def adjusted_rand_index(labels_a: LabelsLike, labels_b: LabelsLike, exclude_noise: bool = False) -> float:
    """Hubert-Arabie adjusted Rand index.

    Pair counts are integers, so the ratio is formed exactly and rounded once.
    """
    table = contingency(labels_a, labels_b, exclude_noise)
    n = table.n
    if n < 2:
        raise ValueError(f"adjusted Rand index needs n >= 2, got {n}")
    sum_ij = _pairs(table.counts)
    sum_a = _pairs(table.row_sums)
    sum_b = _pairs(table.col_sums)
    total = n * (n - 1) // 2
    # (sum_ij - E) / (mean(sum_a, sum_b) - E) with E = sum_a * sum_b / total, scaled by 2 * total
    num = 2 * (sum_ij * total - sum_a * sum_b)
    den = (sum_a + sum_b) * total - 2 * sum_a * sum_b
    if num == 0 and den == 0:
        return 1.0
    return num / den


def _entropy(counts: np.ndarray) -> float:
    counts = counts[counts > 0].astype(np.float64)
    n = counts.sum()
    p = counts / n
    return float(-np.sum(p * np.log(p)))


def mutual_info(table: ContingencyTable) -> float:
    counts = table.counts.astype(np.float64)
    n = counts.sum()
    a = table.row_sums.astype(np.float64)
    b = table.col_sums.astype(np.float64)
    i, j = np.nonzero(counts)
    nij = counts[i, j]
    return float(np.sum(nij / n * (np.log(n * nij) - np.log(a[i] * b[j]))))


def expected_mutual_info(table: ContingencyTable) -> float:
    """Exact E[MI] under the hypergeometric (fixed-marginals) model.

    Each cell ``(i, j)`` contributes a sum over ``n_ij`` from
    ``max(1, a_i + b_j - n)`` to ``min(a_i, b_j)``; probabilities come from
    log-factorials and the terms are added with ``math.fsum``.
    """
    n = table.n
    a = table.row_sums
    b = table.col_sums
    lg_n = gammaln(n + 1)
    terms = []
    for ai in a:
        for bj in b:
            lo = max(1, ai + bj - n)
            hi = min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            log_p = (
                gammaln(ai + 1) + gammaln(bj + 1) + gammaln(n - ai + 1) + gammaln(n - bj + 1)
                - lg_n - gammaln(nij + 1) - gammaln(ai - nij + 1) - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            mi = nij / n * (np.log(n * nij) - math.log(float(ai) * float(bj)))
            terms.extend((mi * np.exp(log_p)).tolist())
    return math.fsum(terms)


def adjusted_mutual_info(
    labels_a: LabelsLike,
    labels_b: LabelsLike,
    average: str = "max",
    exclude_noise: bool = False,
) -> float:
    """Chance-adjusted mutual information ``(MI - E[MI]) / (norm - E[MI])``.

    ``average`` picks the normaliser: ``"max"`` uses ``max(H(U), H(V))``,
    ``"arithmetic"`` their mean.
    """
    table = contingency(labels_a, labels_b, exclude_noise)
    if table.n == 0:
        raise ValueError("adjusted mutual information needs at least one point")
    h_a = _entropy(table.row_sums)
    h_b = _entropy(table.col_sums)
    if max(h_a, h_b) == 0:
        same = table.counts.shape[0] == table.counts.shape[1] == 1
        return 1.0 if same else 0.0
    if average == "max":
        norm = max(h_a, h_b)
    elif average == "arithmetic":
        norm = 0.5 * (h_a + h_b)
    else:
        raise ValueError(f"average must be 'max' or 'arithmetic', got {average!r}")
    mi = mutual_info(table)
    emi = expected_mutual_info(table)
    den = norm - emi
    if abs(den) < 1e-12:
        a, b = _paired(labels_a, labels_b, exclude_noise)
        return 1.0 if partitions_equal(a, b) else 0.0
    return float((mi - emi) / den)


# --- geometry ---------------------------------------------------------------


def _point_set(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.shape[0] == 0:
        raise ValueError("Hausdorff distance is undefined for an empty set")
    return A


def directed_hausdorff(A, B) -> float:
    """``max_{a in A} min_{b in B} |a - b|``."""
    A, B = _point_set(A), _point_set(B)
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"dimension mismatch: {A.shape[1]} vs {B.shape[1]}")
    _, dist = nearest_many(build_index(B), A)
    return float(dist.max())


def hausdorff_distance(A, B) -> float:
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


# --- noise ------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseReport:
    n0: int
    n1: int
    subset_holds: bool
    ratio: float


def noise_report(r_dbscan: ClusteringResult, r_pp: ClusteringResult) -> NoiseReport:
    """Compare the NOISE sets of a DBSCAN run and a DBSCAN++ run on the same data."""
    p0, p1 = r_dbscan.params, r_pp.params
    if len(r_dbscan.labels) != len(r_pp.labels):
        raise ValueError("runs cover datasets of different sizes")
    if (p0.epsilon, p0.min_pts, p0.epsilon_connect) != (p1.epsilon, p1.min_pts, p1.epsilon_connect):
        raise ValueError(
            f"parameter mismatch: eps/minPts/eps_connect {p0.epsilon}/{p0.min_pts}/{p0.epsilon_connect}"
            f" vs {p1.epsilon}/{p1.min_pts}/{p1.epsilon_connect}"
        )
    if p0.assignment != "graph" or p1.assignment != "graph":
        raise ValueError("noise comparison requires graph assignment on both runs")
    n0 = r_dbscan.noise_indices
    n1 = r_pp.noise_indices
    subset = bool(np.all(np.isin(n0, n1)))
    return NoiseReport(int(n0.size), int(n1.size), subset, p1.m / len(r_pp.labels))


# --- synthetic densities ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class DensitySpec:
    """Isotropic mixture density.

    ``gaussian-mixture``: component ``k`` is ``N(means[k], scales[k]^2 I)``.
    ``uniform-mixture``: component ``k`` is uniform on the cube centred at
    ``means[k]`` with half-width ``scales[k]``.
    """

    family: str
    weights: np.ndarray
    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        if self.family not in ("gaussian-mixture", "uniform-mixture"):
            raise ValueError(f"unknown density family {self.family!r}")
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        mu = np.asarray(self.means, dtype=np.float64)
        if mu.ndim == 1:
            mu = mu.reshape(w.size, -1)
        s = np.asarray(self.scales, dtype=np.float64).reshape(-1)
        if np.any(w <= 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
            raise ValueError("weights must be positive and sum to 1")
        if np.any(s <= 0):
            raise ValueError("scales must be positive")
        if mu.shape[0] != w.size or s.size != w.size:
            raise ValueError("weights, means and scales disagree on the component count")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "scales", s)

    @property
    def D(self) -> int:
        return self.means.shape[1]

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(-1, self.D)
        out = np.zeros(x.shape[0])
        for w, mu, s in zip(self.weights, self.means, self.scales):
            if self.family == "gaussian-mixture":
                d2 = np.sum((x - mu) ** 2, axis=1)
                out += w * (2 * math.pi * s * s) ** (-self.D / 2) * np.exp(-d2 / (2 * s * s))
            else:
                inside = np.all(np.abs(x - mu) <= s, axis=1)
                out += np.where(inside, w / (2 * s) ** self.D, 0.0)
        return out

    def bounding_box(self, spread: float = 6.0):
        lo = np.min(self.means - spread * self.scales[:, None], axis=0)
        hi = np.max(self.means + spread * self.scales[:, None], axis=0)
        return lo, hi


def level_set_ground_truth(spec: DensitySpec, lam: float, resolution: float) -> np.ndarray:
    """Grid points with ``f(x) >= lam`` over a box six scale units past every component."""
    if spec.D > 3:
        raise ValueError(f"grid ground truth supports D <= 3, got D={spec.D}")
    if not lam > 0:
        raise ValueError(f"lambda must be > 0, got {lam}")
    if not resolution > 0:
        raise ValueError(f"resolution must be > 0, got {resolution}")
    lo, hi = spec.bounding_box()
    axes = [l + resolution * np.arange(int(math.floor((h - l) / resolution)) + 1) for l, h in zip(lo, hi)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, spec.D)
    keep = spec.pdf(grid) >= lam
    if not keep.any():
        raise ValueError(f"level set is empty: lambda={lam} exceeds the density on the grid")
    return grid[keep]


# --- reporting --------------------------------------------------------------


@dataclass
class EvalReport:
    ari: float | None = None
    ami: float | None = None
    n_noise_dbscan: int | None = None
    n_noise_pp: int | None = None
    noise_subset: bool | None = None
    hausdorff: float | None = None
    timings_ms: dict | None = field(default_factory=dict)

    def to_json(self, timings: bool = True) -> str:
        d = asdict(self)
        if not timings:
            d["timings_ms"] = None
        return json.dumps(d, sort_keys=False, indent=2)
