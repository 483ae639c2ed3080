"""Dataset ingestion: synthetic Gaussian blobs and MNIST in IDX format."""

from __future__ import annotations

import csv
import gzip
import struct
from pathlib import Path

import numpy as np

from .errors import DomainError, ShapeError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801


def gaussian_blobs(n: int, d: int, classes: int, separation: float = 4.0,
                   sigma: float = 0.08, seed: int = 0):
    """Isotropic Gaussian classes inside [0, 1]^d.

    Class c is centred at (separation·σ/√2)·e_c (axes reused cyclically with
    alternating sign when classes > d), so distinct means sit ``separation``
    standard deviations apart; the means are then shifted so their centroid
    is 0.5·1. Samples are clipped to the unit box. Labels are balanced and
    shuffled.
    """
    if n <= 0:
        raise ShapeError("dataset size must be positive")
    if d < 1 or classes < 2:
        raise ShapeError("need d >= 1 and at least two classes")
    if classes > 2 * d:
        raise DomainError("at most 2d well-separated classes are supported")
    rng = np.random.default_rng(seed)
    offset = separation * sigma / np.sqrt(2.0)
    means = np.zeros((classes, d))
    for c in range(classes):
        means[c, c % d] = offset if c < d else -offset
    means += 0.5 - means.mean(axis=0)
    y = np.arange(n) % classes
    rng.shuffle(y)
    X = means[y] + sigma * rng.standard_normal((n, d))
    return np.clip(X, 0.0, 1.0), y.astype(int)


def _open(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def read_idx_images(path) -> np.ndarray:
    """Images as float array (n, rows, cols) scaled to [0, 1]."""
    with _open(path) as fh:
        header = fh.read(16)
        if len(header) < 16:
            raise ShapeError(f"{path}: truncated IDX header")
        magic, n, rows, cols = struct.unpack(">IIII", header)
        if magic != IDX_IMAGES_MAGIC:
            raise ShapeError(f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_IMAGES_MAGIC:08x}")
        raw = fh.read()
    if len(raw) != n * rows * cols:
        raise ShapeError(f"{path}: expected {n * rows * cols} pixel bytes, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8).reshape(n, rows, cols) / 255.0


def read_idx_labels(path) -> np.ndarray:
    with _open(path) as fh:
        header = fh.read(8)
        if len(header) < 8:
            raise ShapeError(f"{path}: truncated IDX header")
        magic, n = struct.unpack(">II", header)
        if magic != IDX_LABELS_MAGIC:
            raise ShapeError(f"{path}: bad magic 0x{magic:08x}, expected 0x{IDX_LABELS_MAGIC:08x}")
        raw = fh.read()
    if len(raw) != n:
        raise ShapeError(f"{path}: expected {n} labels, found {len(raw)}")
    return np.frombuffer(raw, dtype=np.uint8).astype(int)


def write_idx(images, labels, images_path, labels_path) -> None:
    """Write uint8 images (n, rows, cols) and labels in IDX format (gzip if the name ends in .gz)."""
    images = np.asarray(images, dtype=np.uint8)
    labels = np.asarray(labels, dtype=np.uint8)
    n, rows, cols = images.shape

    def _write(path, payload):
        path = Path(path)
        if path.suffix == ".gz":
            with gzip.GzipFile(path, "wb", mtime=0) as fh:
                fh.write(payload)
        else:
            path.write_bytes(payload)

    _write(images_path, struct.pack(">IIII", IDX_IMAGES_MAGIC, n, rows, cols) + images.tobytes())
    _write(labels_path, struct.pack(">II", IDX_LABELS_MAGIC, len(labels)) + labels.tobytes())


def avg_pool(images, factor: int) -> np.ndarray:
    """Non-overlapping factor×factor average pooling (28×28 → 14×14 for factor 2)."""
    if factor == 1:
        return images
    n, r, c = images.shape
    if r % factor or c % factor:
        raise ShapeError(f"image size {r}x{c} not divisible by {factor}")
    return images.reshape(n, r // factor, factor, c // factor, factor).mean(axis=(2, 4))


def load_mnist(images_path, labels_path, subset: int | None = None, downscale: int = 1):
    images = read_idx_images(images_path)
    labels = read_idx_labels(labels_path)
    if len(images) != len(labels):
        raise ShapeError("image and label counts differ")
    if subset is not None:
        images, labels = images[:subset], labels[:subset]
    images = avg_pool(images, downscale)
    return images.reshape(len(images), -1), labels


def save_csv(path, X, y) -> None:
    """Label in the first column, features after; floats written with repr for exact reload."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, label in zip(np.asarray(X, dtype=float), np.asarray(y, dtype=int)):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def load_csv(path):
    rows = list(csv.reader(open(path, newline="")))
    if not rows:
        raise ShapeError(f"{path}: empty dataset")
    y = np.array([int(r[0]) for r in rows])
    X = np.array([[float(v) for v in r[1:]] for r in rows])
    return X, y
