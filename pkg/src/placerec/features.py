"""Bag-of-visual-words features.

Dense upright descriptors on a fixed grid (16x16 patches every 8 pixels by
default), a k-means codebook, and nearest-centroid quantization into count
histograms.  Descriptors are 4x4 spatial cells x 8 orientation bins = 128
dims, L2-normalized with the usual 0.2 clip-and-renormalize step.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    EmptyDescriptorList,
    ImageTooSmall,
    MissingHistogram,
    NonFiniteInput,
    TooFewSamples,
)
from .util import atomic_write, subseed

DESCRIPTOR_DIM = 128
N_CELLS = 4
N_ORI_BINS = 8
CLIP_THRESHOLD = 0.2  # Lowe-style gradient clipping after normalization
DEFAULT_VOCAB_SIZE = 200
DEFAULT_SAMPLE_CAP = 100_000  # codebook training descriptor budget

_UNIFORM_DESC = 1.0 / np.sqrt(DESCRIPTOR_DIM)


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Luminance conversion (0.299 R + 0.587 G + 0.114 B) for HxWx3 input."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    if arr.ndim == 3 and arr.shape[2] in (3, 4):
        return arr[..., 0] * 0.299 + arr[..., 1] * 0.587 + arr[..., 2] * 0.114
    raise ValueError(f"expected HxW or HxWx3 image, got shape {arr.shape}")


def load_image_grayscale(path: str | os.PathLike) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as img:
        return to_grayscale(np.asarray(img.convert("RGB"), dtype=np.float64))


def grid_shape(width: int, height: int, patch_size: int = 16, stride: int = 8) -> tuple[int, int]:
    """(rows, cols) of the dense descriptor grid."""
    return ((height - patch_size) // stride + 1, (width - patch_size) // stride + 1)


def extract_dense_descriptors(
    image: np.ndarray, patch_size: int = 16, stride: int = 8
) -> np.ndarray:
    """Dense upright descriptors over a regular grid.

    Returns an (n, 128) float array, one row per grid position in row-major
    order.  Gradients use central differences; each patch accumulates
    magnitude into 8 orientation bins per 4x4 spatial cell, is
    L2-normalized, clipped at 0.2 and renormalized.  Zero-gradient patches
    map to the uniform descriptor.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        img = to_grayscale(img)
    if not np.isfinite(img).all():
        raise NonFiniteInput("image contains NaN or infinity")
    h, w = img.shape
    if h < patch_size or w < patch_size:
        raise ImageTooSmall(f"image {w}x{h} smaller than patch {patch_size}")
    if patch_size % N_CELLS != 0:
        raise ValueError(f"patch_size must be a multiple of {N_CELLS}")
    if stride < 1:
        raise ValueError("stride must be positive")

    gy, gx = np.gradient(img)
    mag = np.hypot(gx, gy)
    theta = np.arctan2(gy, gx)  # [-pi, pi]
    ori_bin = np.floor((theta + np.pi) * (N_ORI_BINS / (2.0 * np.pi))).astype(np.int64)
    ori_bin %= N_ORI_BINS  # theta == pi wraps onto bin 0

    raw = kernels.accumulate_descriptors(mag, ori_bin, patch_size, stride)
    return _normalize_descriptors(raw)


def _normalize_descriptors(raw: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(raw, axis=1)
    flat = norms == 0.0
    safe = np.where(flat, 1.0, norms)
    desc = raw / safe[:, None]
    np.minimum(desc, CLIP_THRESHOLD, out=desc)
    norms2 = np.linalg.norm(desc, axis=1)
    desc /= np.where(norms2 == 0.0, 1.0, norms2)[:, None]
    desc[flat] = _UNIFORM_DESC
    return desc


# --- codebook ---------------------------------------------------------------


@dataclass
class Codebook:
    """k-means centroids over descriptors."""

    centroids: np.ndarray  # (Z, dim)
    seed: int = 0
    source_hash: str = ""
    distortion_trace: list[float] | None = field(default=None, repr=False)

    @property
    def n_words(self) -> int:
        return self.centroids.shape[0]


def _squared_distances(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    d2 = (
        (points * points).sum(axis=1)[:, None]
        - 2.0 * points @ centroids.T
        + (centroids * centroids).sum(axis=1)[None, :]
    )
    np.maximum(d2, 0.0, out=d2)
    return d2


def _kmeanspp_init(points: np.ndarray, z: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((z, points.shape[1]), dtype=np.float64)
    centroids[0] = points[rng.integers(n)]
    closest = _squared_distances(points, centroids[:1]).ravel()
    for j in range(1, z):
        total = closest.sum()
        if total <= 0.0:
            # all remaining points coincide with chosen centroids
            centroids[j] = points[rng.integers(n)]
            continue
        idx = rng.choice(n, p=closest / total)
        centroids[j] = points[idx]
        d_new = _squared_distances(points, centroids[j : j + 1]).ravel()
        np.minimum(closest, d_new, out=closest)
    return centroids


def build_codebook(
    sample: np.ndarray,
    n_words: int = 200,
    seed: int = 0,
    max_iters: int = 100,
    rel_tol: float = 1e-6,
) -> Codebook:
    """Lloyd's k-means with k-means++ seeding, deterministic in ``seed``.

    Stops when the relative change in mean squared distortion falls below
    ``rel_tol`` or after ``max_iters`` iterations.  Empty clusters are
    reseeded to the point currently farthest from its assigned centroid.
    """
    points = np.ascontiguousarray(np.asarray(sample, dtype=np.float64))
    if points.ndim != 2:
        raise ValueError("sample must be a 2-D array of descriptors")
    n = points.shape[0]
    if n < n_words:
        raise TooFewSamples(f"{n} samples for {n_words} words")

    rng = np.random.default_rng(subseed(seed, "kmeans"))
    centroids = _kmeanspp_init(points, n_words, rng)

    trace: list[float] = []
    prev = np.inf
    for _ in range(max_iters):
        d2 = _squared_distances(points, centroids)
        assign = d2.argmin(axis=1)
        mindist = d2[np.arange(n), assign]
        distortion = float(mindist.mean())
        trace.append(distortion)
        if prev - distortion <= rel_tol * max(prev, np.finfo(float).tiny) and np.isfinite(prev):
            break
        prev = distortion

        counts = np.bincount(assign, minlength=n_words)
        sums = np.zeros_like(centroids)
        np.add.at(sums, assign, points)
        nonempty = counts > 0
        centroids[nonempty] = sums[nonempty] / counts[nonempty, None]

        empty = np.flatnonzero(~nonempty)
        if empty.size:
            # steal the globally farthest points, one per empty cluster
            order = np.argsort(mindist)[::-1]
            for j, pidx in zip(empty, order[: empty.size]):
                centroids[j] = points[pidx]

    return Codebook(centroids=centroids, seed=seed, distortion_trace=trace)


def quantize(descriptors: np.ndarray, codebook: Codebook) -> np.ndarray:
    """Nearest-centroid counts; ties go to the lowest centroid index."""
    descs = np.asarray(descriptors, dtype=np.float64)
    if descs.ndim != 2 or descs.shape[0] == 0:
        raise EmptyDescriptorList("no descriptors to quantize")
    assign = _squared_distances(descs, codebook.centroids).argmin(axis=1)
    return np.bincount(assign, minlength=codebook.n_words).astype(np.int64)


def save_codebook(codebook: Codebook, path: str | os.PathLike) -> None:
    path = os.fspath(path)
    tmp = path + ".tmp~"
    np.savez(
        tmp,
        centroids=codebook.centroids,
        dim=np.int64(codebook.centroids.shape[1]),
        n_words=np.int64(codebook.n_words),
        seed=np.int64(codebook.seed),
        source_hash=np.str_(codebook.source_hash),
    )
    os.replace(tmp + ".npz", path)


def load_codebook(path: str | os.PathLike) -> Codebook:
    with np.load(path, allow_pickle=False) as data:
        return Codebook(
            centroids=np.array(data["centroids"], dtype=np.float64),
            seed=int(data["seed"]),
            source_hash=str(data["source_hash"]),
        )


# --- descriptor sampling -----------------------------------------------------


def reservoir_extend(
    reservoir: np.ndarray,
    n_filled: int,
    n_seen: int,
    batch: np.ndarray,
    rng: np.random.Generator,
) -> tuple[int, int]:
    """Uniform reservoir sampling (Algorithm R), vectorized per batch.

    Mutates ``reservoir`` in place; returns updated (n_filled, n_seen).
    """
    cap = reservoir.shape[0]
    b = batch.shape[0]
    take = min(cap - n_filled, b)
    if take > 0:
        reservoir[n_filled : n_filled + take] = batch[:take]
        n_filled += take
        n_seen += take
        batch = batch[take:]
        b -= take
    if b > 0:
        slots = rng.integers(0, n_seen + 1 + np.arange(b))
        hits = slots < cap
        reservoir[slots[hits]] = batch[hits]
        n_seen += b
    return n_filled, n_seen


# --- histogram store ----------------------------------------------------------


class HistogramStore:
    """Maps image id -> count histogram; CSV-backed."""

    def __init__(self, n_words: int):
        self.n_words = n_words
        self._data: dict[str, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self._data)

    def __contains__(self, image_id: str) -> bool:
        return image_id in self._data

    def ids(self) -> list[str]:
        return list(self._data)

    def put(self, image_id: str, counts: np.ndarray) -> None:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (self.n_words,):
            raise ValueError(
                f"histogram for {image_id!r} has shape {counts.shape}, "
                f"expected ({self.n_words},)"
            )
        self._data[image_id] = counts

    def get(self, image_id: str) -> np.ndarray:
        try:
            return self._data[image_id]
        except KeyError:
            raise MissingHistogram(f"no histogram for id {image_id!r}") from None

    def save(self, path: str | os.PathLike) -> None:
        with atomic_write(path) as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["id", *(f"w{z}" for z in range(self.n_words))])
            for image_id, counts in self._data.items():
                writer.writerow([image_id, *(int(c) for c in counts)])

    @classmethod
    def load(cls, path: str | os.PathLike) -> "HistogramStore":
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            store = cls(n_words=len(header) - 1)
            for row in reader:
                if not row:
                    continue
                store.put(row[0], np.array([int(v) for v in row[1:]], dtype=np.int64))
        return store

    @classmethod
    def from_manifest(cls, manifest) -> "HistogramStore":
        """Collect inline ``hist:`` histograms from a manifest."""
        from .corpus import inline_histogram

        store: HistogramStore | None = None
        for rec in manifest.records:
            counts = inline_histogram(rec)
            if counts is None:
                raise MissingHistogram(
                    f"record {rec.id!r} has no inline histogram; featurize it first"
                )
            if store is None:
                store = cls(n_words=counts.size)
            store.put(rec.id, counts)
        if store is None:
            store = cls(n_words=0)
        return store
