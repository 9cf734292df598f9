"""Domain types shared across the package and label bookkeeping."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from os import PathLike
from typing import Sequence, Union

import numpy as np

NOISE = -1

STRATEGIES = ("uniform", "kcenter")
ASSIGNMENTS = ("graph", "nearest-core")


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    """``n`` points in ``R^D`` stored row-major as float64."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2:
            raise ValueError(f"points must be a 2-D array, got shape {pts.shape}")
        if pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"dataset needs n >= 1 and D >= 1, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("dataset contains non-finite coordinates")
        object.__setattr__(self, "points", _frozen_array(np.ascontiguousarray(pts), np.float64))

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def D(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


DatasetLike = Union[Dataset, np.ndarray, Sequence]


def as_dataset(data: DatasetLike) -> Dataset:
    return data if isinstance(data, Dataset) else Dataset(data)


@dataclass(frozen=True, eq=False)
class ClusterLabels:
    """Per-point cluster ids with ``NOISE`` (-1) for unclustered points.

    Ids need not be dense on construction; :func:`canonicalize_labels`
    produces the dense first-occurrence numbering.
    """

    assignments: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.assignments)
        if arr.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise ValueError("labels must be integers")
        arr = arr.astype(np.int64)
        if arr.size and arr.min() < NOISE:
            raise ValueError(f"labels must be >= {NOISE}")
        object.__setattr__(self, "assignments", _frozen_array(arr, np.int64))

    def __len__(self) -> int:
        return self.assignments.shape[0]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClusterLabels):
            return NotImplemented
        return np.array_equal(self.assignments, other.assignments)

    @property
    def k(self) -> int:
        ids = self.assignments[self.assignments != NOISE]
        return int(np.unique(ids).size)

    @property
    def noise_mask(self) -> np.ndarray:
        return self.assignments == NOISE

    @property
    def n_noise(self) -> int:
        return int(np.count_nonzero(self.noise_mask))

    def tolist(self) -> list[int]:
        return self.assignments.tolist()


LabelsLike = Union[ClusterLabels, np.ndarray, Sequence[int]]


def as_labels(labels: LabelsLike) -> ClusterLabels:
    return labels if isinstance(labels, ClusterLabels) else ClusterLabels(labels)


@dataclass(frozen=True, eq=False)
class CoreSet:
    """Strictly increasing indices of core points."""

    indices: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.indices, dtype=np.int64).reshape(-1)
        if arr.size > 1 and np.any(np.diff(arr) <= 0):
            raise ValueError("core indices must be strictly increasing")
        if arr.size and arr[0] < 0:
            raise ValueError("core indices must be non-negative")
        object.__setattr__(self, "indices", _frozen_array(arr, np.int64))

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return iter(self.indices.tolist())

    def __eq__(self, other) -> bool:
        if not isinstance(other, CoreSet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)

    def issubset(self, other: "CoreSet") -> bool:
        return bool(np.all(np.isin(self.indices, other.indices)))


@dataclass(frozen=True)
class AlgoParams:
    """Full configuration of a DBSCAN++ run.

    ``epsilon_connect=None`` means "same as ``epsilon``".
    """

    epsilon: float
    min_pts: int = 10
    m: int = 1
    strategy: str = "uniform"
    seed: int = 0
    epsilon_connect: float | None = None
    assignment: str = "graph"

    def __post_init__(self):
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if int(self.min_pts) != self.min_pts or self.min_pts < 1:
            raise ValueError(f"min_pts must be an integer >= 1, got {self.min_pts}")
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be an integer >= 1, got {self.m}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")
        if self.assignment not in ASSIGNMENTS:
            raise ValueError(f"assignment must be one of {ASSIGNMENTS}, got {self.assignment!r}")
        if self.epsilon_connect is None:
            object.__setattr__(self, "epsilon_connect", float(self.epsilon))
        elif not self.epsilon_connect >= self.epsilon:
            raise ValueError(
                f"epsilon_connect ({self.epsilon_connect}) must be >= epsilon ({self.epsilon})"
            )
        object.__setattr__(self, "min_pts", int(self.min_pts))
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "seed", int(self.seed))

    def replace(self, **changes) -> "AlgoParams":
        if "epsilon" in changes and "epsilon_connect" not in changes:
            if self.epsilon_connect == self.epsilon:
                changes["epsilon_connect"] = None
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


PHASES = ("index", "sampling", "core_detection", "graph_build", "components", "assignment")


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    labels: ClusterLabels
    cores: CoreSet
    params: AlgoParams
    algorithm: str = "dbscanpp"
    timing: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.cores) and np.any(self.labels.assignments[self.cores.indices] == NOISE):
            raise ValueError("every core point must carry a cluster label")
        if any(v < 0 for v in self.timing.values()):
            raise ValueError("phase timings must be non-negative")

    @property
    def total_ms(self) -> float:
        return float(sum(self.timing.values()))

    @property
    def noise_indices(self) -> np.ndarray:
        return np.flatnonzero(self.labels.noise_mask)


def canonicalize_labels(labels: LabelsLike) -> ClusterLabels:
    """Renumber clusters by order of first occurrence, keeping NOISE.

    >>> canonicalize_labels([2, 2, 0, -1]).tolist()
    [0, 0, 1, -1]
    """
    arr = as_labels(labels).assignments
    out = np.full(arr.shape, NOISE, dtype=np.int64)
    clustered = arr != NOISE
    if clustered.any():
        ids, first, inverse = np.unique(arr[clustered], return_index=True, return_inverse=True)
        rank = np.empty(ids.size, dtype=np.int64)
        rank[np.argsort(first, kind="stable")] = np.arange(ids.size)
        out[clustered] = rank[inverse]
    return ClusterLabels(out)


def partitions_equal(a: LabelsLike, b: LabelsLike) -> bool:
    """True iff both labelings induce the same partition and the same NOISE set."""
    a, b = as_labels(a), as_labels(b)
    if len(a) != len(b):
        raise ValueError(f"label length mismatch: {len(a)} vs {len(b)}")
    return canonicalize_labels(a) == canonicalize_labels(b)


def write_labels(labels: LabelsLike, path: str | PathLike) -> None:
    """One integer per line, -1 for NOISE."""
    arr = as_labels(labels).assignments
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(f"{int(v)}\n" for v in arr)


def read_labels(path: str | PathLike) -> ClusterLabels:
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: not an integer label: {line!r}") from None
    return ClusterLabels(np.array(values, dtype=np.int64))
