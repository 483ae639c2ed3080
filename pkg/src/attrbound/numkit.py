"""Dense linear-algebra primitives: dominant eigenpairs, absolute sums, p-norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ShapeError

SYMMETRY_TOL = 1e-8


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    converged: bool = True
    iterations: int = 0


def as_square(P, name: str = "matrix") -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise DomainError(f"{name} has non-finite entries")
    return P


def symmetrize(P, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Return (P + Pᵀ)/2, refusing matrices that are asymmetric beyond ``tol`` (relative)."""
    P = as_square(P)
    scale = max(1.0, float(np.max(np.abs(P))) if P.size else 1.0)
    asym = float(np.max(np.abs(P - P.T))) if P.size else 0.0
    if asym > tol * scale:
        raise ShapeError(f"matrix is not symmetric (max |P - P^T| = {asym:.3g})")
    return 0.5 * (P + P.T)


def power_iteration(P, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> EigenPair:
    """Dominant eigenpair of a symmetric PSD matrix.

    Iterates v <- Pv/|Pv| from a seeded random unit vector and stops once the
    residual |Pv - λv| drops below tol·max(1, λ). For symmetric P some
    eigenvalue lies within the residual of the Rayleigh quotient, so the
    returned value is then accurate to tol·max(1, λ). If ``max_iter`` is
    exhausted the last iterate is returned with ``converged=False``.
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    P = symmetrize(P)
    n = P.shape[0]
    if n == 0:
        raise ShapeError("empty matrix")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = float(v @ P @ v)
    res_tol = tol
    for it in range(1, max_iter + 1):
        w = P @ v
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            # v sits in the null space; P may be zero altogether
            if not np.any(P):
                return EigenPair(0.0, v, True, it)
            v = rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = w / norm_w
        Pv = P @ v
        lam = float(v @ Pv)
        if np.linalg.norm(Pv - lam * v) <= res_tol * max(1.0, abs(lam)):
            return EigenPair(lam, v, True, it)
    return EigenPair(lam, v, False, max_iter)


def abs_sum(P) -> float:
    return float(np.abs(np.asarray(P, dtype=float)).sum())


def lp_norm(v, p: float) -> float:
    if p < 1:
        raise DomainError(f"p-norm needs p >= 1, got {p}")
    v = np.abs(np.asarray(v, dtype=float).ravel())
    if v.size == 0:
        return 0.0
    if np.isinf(p):
        return float(v.max())
    if p == 1:
        return float(v.sum())
    m = v.max()
    if m == 0:
        return 0.0
    # scaled by the largest entry so tiny or huge vectors neither underflow nor overflow
    u = v / m
    if p == 2:
        return float(m * np.sqrt(u @ u))
    return float(m * np.sum(u ** p) ** (1.0 / p))


def central_jacobian(f, x, h: float = 1e-4) -> np.ndarray:
    """Central-difference Jacobian J_ij ≈ ∂f_i/∂x_j of a vector map."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2 * h))
    return np.stack(cols, axis=-1)
