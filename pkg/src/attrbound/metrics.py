"""Dissimilarity measures between attributions and campaign summary statistics."""

from __future__ import annotations

import math

import numpy as np

from .errors import DomainError, ShapeError


def _pair(u, v):
    u = np.asarray(u, dtype=float).ravel()
    v = np.asarray(v, dtype=float).ravel()
    if u.shape != v.shape:
        raise ShapeError(f"dimension mismatch: {u.size} vs {v.size}")
    return u, v


def euclid_dist(u, v) -> float:
    u, v = _pair(u, v)
    return float(np.linalg.norm(u - v))


def cosine_dist(u, v) -> float:
    """1 - cos(u, v), in [0, 2]."""
    u, v = _pair(u, v)
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise DomainError("cosine distance is undefined for a zero vector")
    cos = float(u @ v) / (nu * nv)
    return float(1.0 - min(1.0, max(-1.0, cos)))


def to_degrees(d_c: float) -> float:
    if not 0.0 <= d_c <= 2.0:
        raise DomainError(f"cosine distance {d_c} outside [0, 2]")
    return math.degrees(math.acos(1.0 - d_c))


def _merge_count(a: list) -> int:
    """Sort ``a`` in place (bottom-up merge sort) and return the number of strict inversions."""
    n = len(a)
    buf = a[:]
    swaps = 0
    width = 1
    while width < n:
        for lo in range(0, n, 2 * width):
            mid = min(lo + width, n)
            hi = min(lo + 2 * width, n)
            i, j, k = lo, mid, lo
            while i < mid and j < hi:
                if a[j] < a[i]:
                    buf[k] = a[j]
                    swaps += mid - i
                    j += 1
                else:
                    buf[k] = a[i]
                    i += 1
                k += 1
            buf[k:hi] = a[i:mid] if i < mid else a[j:hi]
        a, buf = buf, a
        width *= 2
    return swaps


def _tied_pairs(sorted_vals) -> int:
    _, counts = np.unique(sorted_vals, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())


def kendall_tau(u, v) -> float:
    """Kendall's τ-b between two feature rankings, O(n log n) (Knight's algorithm)."""
    u, v = _pair(u, v)
    n = u.size
    if n < 2:
        raise ShapeError("kendall_tau needs at least two features")
    order = np.lexsort((v, u))
    us, vs = u[order], v[order]
    n0 = n * (n - 1) // 2
    n1 = _tied_pairs(us)
    # pairs tied in both coordinates
    _, joint = np.unique(np.stack([us, vs], axis=1), axis=0, return_counts=True)
    n3 = int((joint * (joint - 1) // 2).sum())
    swaps = _merge_count(vs.tolist())
    n2 = _tied_pairs(vs)
    denom = (n0 - n1) * (n0 - n2)
    if denom == 0:
        raise DomainError("kendall_tau is undefined for a constant ranking")
    return float((n0 - n1 - n2 + n3 - 2 * swaps) / math.sqrt(denom))


def topk_indices(u, k: int) -> np.ndarray:
    """Indices of the k largest |u_i|; ties go to the lower index."""
    u = np.abs(np.asarray(u, dtype=float).ravel())
    return np.argsort(-u, kind="stable")[:k]


def topk_intersection(u, v, k: int) -> float:
    u, v = _pair(u, v)
    if k <= 0:
        raise DomainError("k must be positive")
    if k > u.size:
        raise DomainError(f"k = {k} exceeds dimension {u.size}")
    common = np.intersect1d(topk_indices(u, k), topk_indices(v, k))
    return common.size / k


def gaps(bounds, observed) -> np.ndarray:
    bounds = np.asarray(bounds, dtype=float).ravel()
    observed = np.asarray(observed, dtype=float).ravel()
    if bounds.shape != observed.shape:
        raise ShapeError("bounds and observations are not aligned")
    return bounds - observed


def min_gap(bounds, observed) -> float:
    """r = min_i (T^(i) - T̂^(i))."""
    g = gaps(bounds, observed)
    if g.size == 0:
        raise ShapeError("min_gap of an empty campaign")
    return float(g.min())


def gap_histogram(bounds, observed, bins: int = 20):
    """Histogram (counts, edges) of the per-sample gaps."""
    g = gaps(bounds, observed)
    if g.size == 0:
        raise ShapeError("no gaps to histogram")
    return np.histogram(g, bins=bins)
