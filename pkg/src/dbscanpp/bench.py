"""Experiment harness: runtime scaling, m/n trade-off, epsilon sweeps, level-set convergence.

Every sweep returns a :class:`BenchTable`: flat :class:`BenchRecord` rows
sorted by ``(experiment, algorithm, n, ratio, epsilon, seed)`` plus a summary
dict holding the derived statistics (slopes, robustness widths, ...).
Scores and labels are reproducible from the arguments; only the ``*_ms``
columns vary between runs.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from os import PathLike
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import isotonic_regression

from .cluster import dbscan, dbscan_pp
from .core import AlgoParams, ClusteringResult, Dataset
from .data import LabeledDataset, gaussian_mixture, generate
from .metrics import DensitySpec, adjusted_mutual_info, adjusted_rand_index, hausdorff_distance, level_set_ground_truth
from .params import epsilon_for_level, m_minimax

ALGORITHMS = ("dbscan", "dbscanpp-uniform", "dbscanpp-kcenter")
TIMEOUT_S = 300.0
MIN_SLOPE_POINTS = 4
TIMING_COLUMNS = ("total_ms", "index_ms", "sampling_ms", "core_ms", "graph_ms", "components_ms", "assignment_ms")


@dataclass
class BenchRecord:
    experiment: str
    algorithm: str
    n: int
    d: int
    epsilon: float
    min_pts: int
    m: int
    ratio: float
    seed: int
    ari: float | None = None
    ami: float | None = None
    n_noise: int | None = None
    n_clusters: int | None = None
    n_cores: int | None = None
    hausdorff: float | None = None
    status: str = "ok"
    total_ms: float | None = None
    index_ms: float | None = None
    sampling_ms: float | None = None
    core_ms: float | None = None
    graph_ms: float | None = None
    components_ms: float | None = None
    assignment_ms: float | None = None

    def sort_key(self):
        return (self.experiment, self.algorithm, self.n, self.ratio, self.epsilon, self.seed)


COLUMNS = tuple(f.name for f in fields(BenchRecord))


@dataclass
class BenchTable:
    records: list[BenchRecord]
    summary: dict = field(default_factory=dict)

    def select(self, **where) -> list[BenchRecord]:
        return [r for r in self.records if all(getattr(r, k) == v for k, v in where.items())]


@dataclass(frozen=True)
class SweepSpec:
    """Grid of settings for a sweep; ``source`` is a CSV path or generator name."""

    source: str
    algorithms: tuple = ALGORITHMS
    eps_grid: tuple = ()
    ratios: tuple = ()
    min_pts: int = 10
    seeds: tuple = (0,)
    repetitions: int = 1

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("algorithm list is empty")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not self.seeds:
            raise ValueError("seed list is empty")
        if not self.eps_grid and not self.ratios:
            raise ValueError("a sweep needs a non-empty epsilon grid or ratio grid")
        if any(not e > 0 for e in self.eps_grid):
            raise ValueError("epsilon grid must be positive")
        if any(not 0 < r <= 1 for r in self.ratios):
            raise ValueError("ratios must lie in (0, 1]")


# --- single runs ------------------------------------------------------------


def m_for_ratio(n: int, ratio: float) -> int:
    if not 0 < ratio <= 1:
        raise ValueError(f"m/n ratio must lie in (0, 1], got {ratio}")
    return max(1, min(n, int(round(ratio * n))))


def run_algorithm(
    data: Dataset,
    algorithm: str,
    epsilon: float,
    min_pts: int,
    m: int | None = None,
    seed: int = 0,
    epsilon_connect: float | None = None,
    assignment: str = "graph",
    index=None,
) -> ClusteringResult:
    if algorithm == "dbscan":
        return dbscan(data, epsilon, min_pts, epsilon_connect, assignment, index=index)
    if algorithm.startswith("dbscanpp-"):
        strategy = algorithm.split("-", 1)[1]
        params = AlgoParams(epsilon, min_pts, m or data.n, strategy, seed, epsilon_connect, assignment)
        return dbscan_pp(data, params, index=index)
    raise ValueError(f"unknown algorithm {algorithm!r}; choose from {ALGORITHMS}")


def _timed_run(data, algorithm, repeats, **kw):
    """Run ``repeats`` times; keep the first result and the fastest per-phase timings."""
    best = None
    result = None
    for _ in range(max(1, repeats)):
        r = run_algorithm(data, algorithm, **kw)
        if result is None:
            result = r
        if best is None or r.total_ms < sum(best.values()):
            best = dict(r.timing)
    return result, best


def warm_up(algorithms: Sequence[str], epsilon: float, min_pts: int) -> None:
    """Run each algorithm once on a tiny dataset so JIT compilation stays out of timings."""
    ds = generate("gauss2x2d", 64, 0)
    for algo in algorithms:
        run_algorithm(ds.data, algo, epsilon, min_pts, 8, 0)


def make_record(
    experiment: str,
    algorithm: str,
    ds: LabeledDataset,
    result: ClusteringResult,
    timing: dict | None = None,
    seed: int = 0,
    score: bool = True,
) -> BenchRecord:
    p = result.params
    m = p.m if algorithm != "dbscan" else ds.n
    rec = BenchRecord(
        experiment=experiment,
        algorithm=algorithm,
        n=ds.n,
        d=ds.D,
        epsilon=float(p.epsilon),
        min_pts=p.min_pts,
        m=m,
        ratio=m / ds.n,
        seed=seed,
        n_noise=result.labels.n_noise,
        n_clusters=result.labels.k,
        n_cores=len(result.cores),
    )
    if score and ds.truth is not None and ds.n >= 2:
        rec.ari = adjusted_rand_index(ds.truth, result.labels)
        rec.ami = adjusted_mutual_info(ds.truth, result.labels)
    t = result.timing if timing is None else timing
    rec.total_ms = float(sum(t.values()))
    rec.index_ms = t.get("index", 0.0)
    rec.sampling_ms = t.get("sampling", 0.0)
    rec.core_ms = t.get("core_detection", 0.0)
    rec.graph_ms = t.get("graph_build", 0.0)
    rec.components_ms = t.get("components", 0.0)
    rec.assignment_ms = t.get("assignment", 0.0)
    return rec


def _sorted(records: Iterable[BenchRecord]) -> list[BenchRecord]:
    return sorted(records, key=BenchRecord.sort_key)


def _map_cells(fn: Callable, cells: Sequence, workers: int) -> list:
    if workers <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, cells))


# --- statistics -------------------------------------------------------------


def fit_loglog_slope(sizes, times_ms) -> float:
    """Least-squares slope of ``log(time)`` against ``log(n)``."""
    x = np.log(np.asarray(sizes, dtype=np.float64))
    y = np.log(np.asarray(times_ms, dtype=np.float64))
    if x.size < 2:
        raise ValueError("need at least two sizes for a slope")
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def robustness_width(eps_grid, scores, fraction: float = 0.9) -> float:
    """Width of the contiguous epsilon run around the best score staying >= ``fraction * best``.

    The run is the maximal block of consecutive grid points containing the
    (first) best score; its width is ``eps_last - eps_first``. A
    non-positive best score gives width 0.
    """
    eps = np.asarray(eps_grid, dtype=np.float64)
    s = np.asarray(scores, dtype=np.float64)
    order = np.argsort(eps, kind="stable")
    eps, s = eps[order], s[order]
    best = int(np.argmax(s))
    if not s[best] > 0:
        return 0.0
    ok = s >= fraction * s[best]
    lo = hi = best
    while lo > 0 and ok[lo - 1]:
        lo -= 1
    while hi < s.size - 1 and ok[hi + 1]:
        hi += 1
    return float(eps[hi] - eps[lo])


def isotonic_decreasing(values) -> np.ndarray:
    return isotonic_regression(np.asarray(values, dtype=np.float64), increasing=False).x


def isotonic_fit_r2(values) -> float:
    """Share of variance explained by the best non-increasing fit (1.0 for constant input)."""
    y = np.asarray(values, dtype=np.float64)
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0:
        return 1.0
    fit = isotonic_decreasing(y)
    return 1.0 - float(np.sum((y - fit) ** 2)) / sst


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.std() == 0 or y.std() == 0:
        return float("nan")
    return float(np.corrcoef(x, y)[0, 1])


# --- experiments ------------------------------------------------------------


def run_scaling_experiment(
    generator: str | Callable[[int, int], LabeledDataset],
    sizes: Sequence[int],
    epsilon: float,
    min_pts: int = 10,
    m: int | None = 500,
    m_ratio: float | None = None,
    algorithms: Sequence[str] = ALGORITHMS,
    seed: int = 0,
    repeats: int = 1,
    timeout_s: float = TIMEOUT_S,
    score: bool = True,
) -> BenchTable:
    """Runtime against dataset size.

    DBSCAN++ uses a fixed ``m`` (clamped to ``n``) unless ``m_ratio`` is
    given. A run slower than ``timeout_s`` is recorded with status
    ``"timeout"`` and the algorithm is skipped (also ``"timeout"``) at every
    larger size.
    """
    sizes = list(sizes)
    if any(b <= a for a, b in zip(sizes, sizes[1:])):
        raise ValueError("sizes must be strictly increasing")
    warm_up(algorithms, epsilon, min_pts)
    records = []
    timed_out: set[str] = set()
    for n in sizes:
        ds = generate(generator, n, seed) if isinstance(generator, str) else generator(n, seed)
        mm = m_for_ratio(n, m_ratio) if m_ratio is not None else min(n, m or n)
        for algo in algorithms:
            if algo in timed_out:
                rec = BenchRecord("scaling", algo, n, ds.D, float(epsilon), min_pts,
                                  n if algo == "dbscan" else mm,
                                  1.0 if algo == "dbscan" else mm / n, seed, status="timeout")
                records.append(rec)
                continue
            result, timing = _timed_run(ds.data, algo, repeats, epsilon=epsilon, min_pts=min_pts, m=mm, seed=seed)
            rec = make_record("scaling", algo, ds, result, timing, seed, score)
            if rec.total_ms > timeout_s * 1e3:
                rec.status = "timeout"
                timed_out.add(algo)
            records.append(rec)
    summary = {"slopes": {}, "slope_points": {}}
    for algo in algorithms:
        ok = [r for r in records if r.algorithm == algo and r.status == "ok"]
        summary["slope_points"][algo] = len(ok)
        summary["slopes"][algo] = (
            fit_loglog_slope([r.n for r in ok], [r.total_ms for r in ok]) if len(ok) >= MIN_SLOPE_POINTS else None
        )
    return BenchTable(_sorted(records), summary)


def _tradeoff_cell(cell):
    ds, algo, ratio, epsilon, min_pts, seed, repeats = cell
    mm = m_for_ratio(ds.n, ratio)
    result, timing = _timed_run(ds.data, algo, repeats, epsilon=epsilon, min_pts=min_pts, m=mm, seed=seed)
    return make_record("tradeoff", algo, ds, result, timing, seed)


def run_tradeoff_sweep(
    ds: LabeledDataset,
    ratios: Sequence[float],
    epsilon: float,
    min_pts: int = 10,
    strategies: Sequence[str] = ("uniform", "kcenter"),
    seed: int = 0,
    repeats: int = 1,
    workers: int = 1,
) -> BenchTable:
    """Scores, noise and runtime of DBSCAN++ as ``m/n`` grows, plus the DBSCAN baseline."""
    ratios = sorted(float(r) for r in ratios)
    for r in ratios:
        m_for_ratio(ds.n, r)
    cells = [(ds, "dbscan", 1.0, epsilon, min_pts, seed, repeats)]
    cells += [(ds, f"dbscanpp-{s}", r, epsilon, min_pts, seed, repeats) for s in strategies for r in ratios]
    records = _map_cells(_tradeoff_cell, cells, workers)
    base = records[0]
    summary = {"dbscan_noise": base.n_noise, "dbscan_ari": base.ari, "dbscan_ami": base.ami}
    for s in strategies:
        rows = sorted((r for r in records if r.algorithm == f"dbscanpp-{s}"), key=lambda r: r.ratio)
        noise = [r.n_noise for r in rows]
        summary[s] = {
            "noise_isotonic_r2": isotonic_fit_r2(noise),
            "noise_above_dbscan": all(v >= base.n_noise for v in noise),
            "runtime_pearson_r": pearson_r([r.ratio for r in rows], [r.total_ms for r in rows]),
        }
    return BenchTable(_sorted(records), summary)


def parse_eps_grid(text: str) -> list[float]:
    """``start:stop:count`` (inclusive, linear) or a comma-separated list."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:count, got {text!r}")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if count < 1:
            raise ValueError("grid count must be >= 1")
        grid = np.linspace(start, stop, count).tolist()
    else:
        grid = [float(v) for v in text.split(",") if v.strip()]
    if not grid or any(not (g > 0 and math.isfinite(g)) for g in grid):
        raise ValueError(f"epsilon grid must be non-empty and positive, got {text!r}")
    return grid


def _eps_cell(cell):
    ds, algo, eps, min_pts, ratio, seed = cell
    mm = m_for_ratio(ds.n, ratio)
    result = run_algorithm(ds.data, algo, eps, min_pts, mm, seed)
    return make_record("eps-sweep", algo, ds, result, seed=seed)


def run_epsilon_sweep(
    ds: LabeledDataset,
    eps_grid: Sequence[float],
    min_pts: int = 10,
    ratio: float = 0.1,
    algorithms: Sequence[str] = ALGORITHMS,
    seed: int = 0,
    fraction: float = 0.9,
    workers: int = 1,
) -> BenchTable:
    """Scores over an epsilon grid and the robustness width of each algorithm."""
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid or any(not e > 0 for e in eps_grid):
        raise ValueError("epsilon grid must be non-empty and positive")
    cells = [(ds, a, e, min_pts, ratio, seed) for a in algorithms for e in eps_grid]
    records = _map_cells(_eps_cell, cells, workers)
    summary = {"robustness_width": {}, "best_ari": {}, "best_ami": {}}
    if ds.truth is not None:
        for a in algorithms:
            rows = sorted((r for r in records if r.algorithm == a), key=lambda r: r.epsilon)
            eps = [r.epsilon for r in rows]
            summary["robustness_width"][a] = {
                "ari": robustness_width(eps, [r.ari for r in rows], fraction),
                "ami": robustness_width(eps, [r.ami for r in rows], fraction),
            }
            summary["best_ari"][a] = max(r.ari for r in rows)
            summary["best_ami"][a] = max(r.ami for r in rows)
    return BenchTable(_sorted(records), summary)


def sample_density(spec: DensitySpec, n: int, seed: int) -> LabeledDataset:
    if spec.family != "gaussian-mixture":
        raise ValueError("sampling is implemented for gaussian-mixture specs")
    k = spec.weights.size
    return gaussian_mixture(n, spec.D, k, spec.means, spec.scales, spec.weights, seed)


def run_levelset_experiment(
    spec: DensitySpec,
    lam: float,
    sizes: Sequence[int],
    min_pts: int | str = "auto",
    m: int | str = "minimax",
    strategy: str = "kcenter",
    beta: float = 1.0,
    c: float = 0.0,
    seeds: Sequence[int] = (0, 1, 2, 3, 4),
    resolution: float = 0.05,
) -> BenchTable:
    """Hausdorff distance between DBSCAN++ cores and the true level set as ``n`` grows.

    ``min_pts="auto"`` uses ``round(n^(2 beta / (2 beta + D)))``, the largest
    rate the consistency analysis allows; ``m`` is ``"minimax"``
    (:func:`~dbscanpp.params.m_minimax`), ``"n"``, or an integer. The
    bandwidth comes from :func:`~dbscanpp.params.epsilon_for_level` with the
    supplied ``c`` (0 gives the plug-in value). Empty core sets are recorded
    with an infinite distance.
    """
    truth = level_set_ground_truth(spec, lam, resolution)
    D = spec.D
    records = []
    for n in sizes:
        mp = int(round(n ** (2 * beta / (2 * beta + D)))) if min_pts == "auto" else int(min_pts)
        if m == "minimax":
            mm = m_minimax(n, D, beta)
        elif m == "n":
            mm = n
        else:
            mm = min(n, int(m))
        eps = epsilon_for_level(lam, mp, n, D, c)
        for seed in seeds:
            ds = sample_density(spec, n, seed)
            params = AlgoParams(eps, mp, mm, strategy, seed)
            result = dbscan_pp(ds.data, params)
            rec = make_record("levelset", f"dbscanpp-{strategy}", ds, result, seed=seed, score=False)
            cores = ds.data.points[result.cores.indices]
            rec.hausdorff = hausdorff_distance(cores, truth) if len(cores) else math.inf
            records.append(rec)
    medians = {}
    for n in sizes:
        medians[n] = float(np.median([r.hausdorff for r in records if r.n == n]))
    return BenchTable(_sorted(records), {"median_hausdorff": medians, "truth_points": int(truth.shape[0])})


# --- output -----------------------------------------------------------------


def _row(rec: BenchRecord, timings: bool) -> dict:
    d = asdict(rec)
    if not timings:
        for col in TIMING_COLUMNS:
            d[col] = None
    return d


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def write_records_csv(path: str | PathLike, records: Iterable[BenchRecord], timings: bool = True) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(COLUMNS)
        for rec in records:
            d = _row(rec, timings)
            w.writerow([_cell(d[c]) for c in COLUMNS])


def write_records_jsonl(path: str | PathLike, records: Iterable[BenchRecord], timings: bool = True) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            d = _row(rec, timings)
            if d["hausdorff"] is not None and math.isinf(d["hausdorff"]):
                d["hausdorff"] = "inf"
            fh.write(json.dumps(d) + "\n")


PLOT_AXES = {
    "scaling": ("n", "total_ms"),
    "tradeoff": ("ratio", "ari"),
    "eps-sweep": ("epsilon", "ari"),
    "levelset": ("n", "hausdorff"),
}


def write_plot_data(path: str | PathLike, records: Iterable[BenchRecord], x: str, y: str) -> None:
    """Long-format ``x, series, y`` rows, one series per algorithm."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "series", "y"])
        for rec in records:
            val = getattr(rec, y)
            if val is None or rec.status != "ok":
                continue
            w.writerow([_cell(getattr(rec, x)), rec.algorithm, _cell(val)])
