"""Dataset loaders, writers and seeded synthetic generators."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from os import PathLike
from pathlib import Path

import numpy as np

from .core import NOISE, ClusterLabels, Dataset, LabelsLike, as_labels
from .rng import Xoshiro256


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    data: Dataset
    truth: ClusterLabels | None = None
    source: str = ""

    def __post_init__(self):
        if self.truth is not None:
            if len(self.truth) != self.data.n:
                raise ValueError(f"truth has {len(self.truth)} labels for {self.data.n} points")
            if np.any(self.truth.assignments == NOISE):
                raise ValueError("ground-truth labels may not contain NOISE")

    @property
    def n(self) -> int:
        return self.data.n

    @property
    def D(self) -> int:
        return self.data.D

    def metadata(self) -> dict:
        return {"n": self.n, "d": self.D, "has_truth": self.truth is not None, "source": self.source}


def write_metadata(ds: LabeledDataset, path: str | PathLike) -> None:
    Path(path).write_text(json.dumps(ds.metadata(), indent=2) + "\n", encoding="utf-8")


def encode_first_occurrence(values) -> np.ndarray:
    """Map arbitrary hashable values to ids ``0, 1, ...`` in order of first appearance."""
    seen: dict = {}
    return np.array([seen.setdefault(v, len(seen)) for v in values], dtype=np.int64)


def standardize(data: Dataset) -> Dataset:
    """Zero-mean, unit-variance columns; constant columns are only centred."""
    pts = data.points
    std = pts.std(axis=0)
    std[std == 0] = 1.0
    return Dataset((pts - pts.mean(axis=0)) / std)


# --- CSV --------------------------------------------------------------------


def load_csv(
    path: str | PathLike,
    has_header: bool = False,
    label_column: str | int | None = None,
) -> LabeledDataset:
    """Read a comma-separated file of numeric features.

    ``label_column`` is a header name (requires ``has_header``) or a
    zero-based column index; that column is encoded by first occurrence and
    excluded from the features.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row and any(cell.strip() for cell in row)]
    header = None
    if has_header:
        if not rows:
            raise ValueError(f"{path}: missing header row")
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise ValueError(f"{path}: no data rows")

    width = len(rows[0])
    label_idx = None
    if label_column is not None:
        if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
            if header is None or label_column not in header:
                raise ValueError(f"{path}: label column {label_column!r} not found in header")
            label_idx = header.index(label_column)
        else:
            label_idx = int(label_column)
            if not -width <= label_idx < width:
                raise ValueError(f"{path}: label column index {label_idx} out of range")
            label_idx %= width

    first_line = 2 if has_header else 1
    feats = []
    labels = []
    for r, row in enumerate(rows):
        line = first_line + r
        if len(row) != width:
            raise ValueError(f"{path}: row {line} has {len(row)} fields, expected {width}")
        vec = []
        for c, cell in enumerate(row):
            if c == label_idx:
                labels.append(cell.strip())
                continue
            try:
                vec.append(float(cell))
            except ValueError:
                raise ValueError(f"{path}: row {line}, column {c + 1}: non-numeric value {cell!r}") from None
        feats.append(vec)
    truth = ClusterLabels(encode_first_occurrence(labels)) if label_idx is not None else None
    return LabeledDataset(Dataset(np.array(feats, dtype=np.float64)), truth, source=str(path))


def write_csv(
    path: str | PathLike,
    data: Dataset,
    truth: LabelsLike | None = None,
    header: bool = False,
) -> None:
    """Write coordinates with 17 significant digits, optionally followed by a label column."""
    pts = data.points
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            names = [f"x{j}" for j in range(pts.shape[1])]
            w.writerow(names + (["label"] if truth is not None else []))
        lab = as_labels(truth).assignments if truth is not None else None
        for i, row in enumerate(pts):
            cells = [format(v, ".17g") for v in row]
            if lab is not None:
                cells.append(str(int(lab[i])))
            w.writerow(cells)


# --- generators -------------------------------------------------------------


def _weights(weights, k: int) -> np.ndarray:
    w = np.full(k, 1.0 / k) if weights is None else np.asarray(weights, dtype=np.float64)
    if w.shape != (k,) or np.any(w <= 0) or not math.isclose(w.sum(), 1.0, abs_tol=1e-9):
        raise ValueError(f"weights must be {k} positive values summing to 1, got {w}")
    return w


def _components(rng: Xoshiro256, n: int, w: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(w)
    comp = np.searchsorted(cdf, rng.random(n), side="right")
    return np.minimum(comp, w.size - 1)


def gaussian_mixture(n: int, D: int, k: int, means, scales, weights=None, seed: int = 0) -> LabeledDataset:
    """Isotropic Gaussian mixture drawn from the package PRNG.

    Draw order: ``n`` uniforms choose components (inverse CDF over the
    weights), then ``n * D`` standard normals fill the coordinates row by row.
    """
    mu = np.asarray(means, dtype=np.float64).reshape(k, D)
    s = np.broadcast_to(np.asarray(scales, dtype=np.float64), (k,)).copy()
    if np.any(s < 0):
        raise ValueError("scales must be non-negative")
    w = _weights(weights, k)
    rng = Xoshiro256(seed)
    comp = _components(rng, n, w)
    z = rng.standard_normal(n * D).reshape(n, D)
    pts = mu[comp] + s[comp, None] * z
    return LabeledDataset(Dataset(pts), ClusterLabels(comp), source=f"gaussian_mixture(seed={seed})")


def uniform_mixture(n: int, D: int, k: int, boxes, weights=None, seed: int = 0) -> LabeledDataset:
    """Mixture of uniforms on axis-aligned boxes ``boxes[j] = (lower, upper)``.

    Draw order: ``n`` component uniforms, then ``n * D`` coordinate uniforms.
    """
    b = np.asarray(boxes, dtype=np.float64)
    if b.shape != (k, 2, D):
        raise ValueError(f"boxes must have shape ({k}, 2, {D}), got {b.shape}")
    lower, upper = b[:, 0, :], b[:, 1, :]
    if np.any(lower > upper):
        raise ValueError("degenerate box: lower corner exceeds upper corner")
    w = _weights(weights, k)
    rng = Xoshiro256(seed)
    comp = _components(rng, n, w)
    u = rng.random(n * D).reshape(n, D)
    pts = lower[comp] + (upper[comp] - lower[comp]) * u
    return LabeledDataset(Dataset(pts), ClusterLabels(comp), source=f"uniform_mixture(seed={seed})")


def tetrahedron_means(separation: float) -> np.ndarray:
    """Four 3-D points at pairwise distance ``separation``."""
    v = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=np.float64)
    return v * separation / (2 * math.sqrt(2))


GENERATORS = {
    # four 3-D Gaussians, the runtime-scaling workload
    "gauss4x3d": lambda n, seed: gaussian_mixture(n, 3, 4, tetrahedron_means(6.0), 1.0, seed=seed),
    # two 2-D Gaussians for accuracy and robustness sweeps
    "gauss2x2d": lambda n, seed: gaussian_mixture(n, 2, 2, [[-4.0, 0.0], [4.0, 0.0]], 1.0, seed=seed),
    # five 50-D uniform boxes, disjoint along the first coordinate
    "uniform5x50d": lambda n, seed: uniform_mixture(
        n, 50, 5, [[[3.0 * j] + [0.0] * 49, [3.0 * j + 1.0] + [1.0] * 49] for j in range(5)], seed=seed
    ),
}


def generate(name: str, n: int, seed: int = 0) -> LabeledDataset:
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}") from None
    ds = gen(n, seed)
    return LabeledDataset(ds.data, ds.truth, source=f"{name}(n={n}, seed={seed})")


# --- images -----------------------------------------------------------------


def _ppm_token(buf: bytes, pos: int):
    """Next whitespace-delimited header token, skipping ``#`` comments."""
    n = len(buf)
    while pos < n:
        ch = buf[pos : pos + 1]
        if ch == b"#":
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not buf[pos : pos + 1].isspace():
        pos += 1
    if start == pos:
        raise ValueError("truncated PPM header")
    return buf[start:pos], pos


def read_ppm(path: str | PathLike) -> np.ndarray:
    """Binary P6 image as an ``(height, width, 3)`` uint8 array."""
    buf = Path(path).read_bytes()
    magic, pos = _ppm_token(buf, 0)
    if magic != b"P6":
        raise ValueError(f"{path}: not a binary PPM (magic {magic[:8]!r})")
    try:
        width, pos = _ppm_token(buf, pos)
        height, pos = _ppm_token(buf, pos)
        maxval, pos = _ppm_token(buf, pos)
        width, height, maxval = int(width), int(height), int(maxval)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed PPM header ({exc})") from None
    if maxval != 255:
        raise ValueError(f"{path}: only maxval 255 is supported, got {maxval}")
    pos += 1  # single whitespace byte before the raster
    need = width * height * 3
    raster = buf[pos : pos + need]
    if len(raster) < need:
        raise ValueError(f"{path}: truncated pixel data ({len(raster)} of {need} bytes)")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(path: str | PathLike, pixels: np.ndarray) -> None:
    pixels = np.asarray(pixels, dtype=np.uint8)
    h, w, _ = pixels.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(pixels).tobytes())


def image_to_dataset(pixels: np.ndarray) -> Dataset:
    h, w, _ = pixels.shape
    ys, xs = np.divmod(np.arange(h * w), w)
    feats = np.column_stack([xs, ys, pixels.reshape(-1, 3)]).astype(np.float64)
    return Dataset(feats)


def load_image_ppm(path: str | PathLike) -> Dataset:
    """One point ``(x, y, R, G, B)`` per pixel in row-major order, unscaled."""
    return image_to_dataset(read_ppm(path))


def image_shape(path: str | PathLike) -> tuple[int, int]:
    """``(width, height)`` of a PPM file."""
    h, w, _ = read_ppm(path).shape
    return w, h


PALETTE = np.array(
    [
        (230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200), (245, 130, 48),
        (145, 30, 180), (70, 240, 240), (240, 50, 230), (210, 245, 60), (250, 190, 212),
        (0, 128, 128), (220, 190, 255), (170, 110, 40), (255, 250, 200), (128, 0, 0),
        (170, 255, 195), (128, 128, 0), (255, 215, 180), (0, 0, 128), (128, 128, 128),
    ],
    dtype=np.uint8,
)


def labels_to_image(labels: LabelsLike, width: int, height: int, path: str | PathLike) -> None:
    """Write a P6 segmentation: cluster ``k`` gets ``PALETTE[k % 20]``, NOISE is black."""
    lab = as_labels(labels).assignments
    if lab.size != width * height:
        raise ValueError(f"{lab.size} labels for a {width}x{height} image")
    pixels = np.zeros((lab.size, 3), dtype=np.uint8)
    hit = lab != NOISE
    pixels[hit] = PALETTE[lab[hit] % len(PALETTE)]
    write_ppm(path, pixels.reshape(height, width, 3))
