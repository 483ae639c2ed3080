"""Gradient-based attributions (saliency, input×gradient, integrated gradients)
and their exact input Jacobians.

Jacobians follow H_ij = ∂g_i/∂x_j throughout.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import net
from .errors import DomainError, ShapeError

SALIENCY = "saliency"
INPUT_GRAD = "input_grad"
INTEGRATED_GRADIENTS = "integrated_gradients"
TAGS = (SALIENCY, INPUT_GRAD, INTEGRATED_GRADIENTS)

_ALIASES = {"sm": SALIENCY, "ig": INTEGRATED_GRADIENTS, "inputgrad": INPUT_GRAD,
            "input_x_grad": INPUT_GRAD, "gradient_input": INPUT_GRAD}


@dataclass(frozen=True, eq=False)
class AttributionMethod:
    tag: str = INTEGRATED_GRADIENTS
    steps: int = 64
    baseline: np.ndarray | None = None

    def __post_init__(self):
        tag = _ALIASES.get(self.tag.lower(), self.tag.lower())
        if tag not in TAGS:
            raise DomainError(f"unknown attribution method {self.tag!r}")
        object.__setattr__(self, "tag", tag)
        if tag == INTEGRATED_GRADIENTS and self.steps < 1:
            raise DomainError("integrated gradients needs at least one step")
        if self.baseline is not None:
            object.__setattr__(self, "baseline", np.asarray(self.baseline, dtype=float).ravel())

    @property
    def complete(self) -> bool:
        return self.tag == INTEGRATED_GRADIENTS

    def baseline_for(self, d: int) -> np.ndarray:
        if self.baseline is None:
            return np.zeros(d)
        if self.baseline.shape != (d,):
            raise ShapeError(f"baseline has dimension {self.baseline.size}, model expects {d}")
        return self.baseline

    def with_steps(self, steps: int) -> "AttributionMethod":
        return AttributionMethod(self.tag, steps, self.baseline)

    def describe(self) -> str:
        return f"ig{self.steps}" if self.complete else self.tag


@dataclass(frozen=True, eq=False)
class Attribution:
    values: np.ndarray
    method: AttributionMethod
    label: int


def _alphas(m: int) -> np.ndarray:
    # right Riemann nodes α/m, α = 1..m
    return np.arange(1, m + 1) / m


def _path_points(X, a, m):
    """(n·m, d) path points a + (α/m)(x - a), grouped by row of X."""
    return (a + _alphas(m)[None, :, None] * (X - a)[:, None, :]).reshape(-1, X.shape[1])


def attributions(model: net.Model, X, ys, method: AttributionMethod) -> np.ndarray:
    """Batched attributions, one row per input."""
    X = net._as_batch(model, X)
    n, d = X.shape
    ys = np.broadcast_to(np.asarray(ys, dtype=int), (n,))
    if method.tag == SALIENCY:
        return net.logit_grads(model, X, ys)
    if method.tag == INPUT_GRAD:
        return X * net.logit_grads(model, X, ys)
    a = method.baseline_for(d)
    m = method.steps
    A = np.broadcast_to(a, (n, d))
    G, _ = net.path_derivatives(model, A, X - a, _alphas(m), net._onehot_rows(model, ys, n), np.full(m, 1.0 / m))
    return (X - a) * G


def attribute(model: net.Model, x, y: int, method: AttributionMethod) -> Attribution:
    return Attribution(attributions(model, x, y, method)[0], method, int(y))


def completeness_residual(model: net.Model, x, y: int, ig: Attribution) -> float:
    """|Σ_i g_i - (f_y(x) - f_y(a))|; the baseline logit is not assumed to vanish."""
    if not ig.method.complete:
        raise DomainError("completeness only applies to integrated gradients")
    x = np.asarray(x, dtype=float)
    a = ig.method.baseline_for(x.size)
    gap = net.forward(model, x)[y] - net.forward(model, a)[y]
    return float(abs(ig.values.sum() - gap))


def attribution_jacobian(model: net.Model, x, y: int, method: AttributionMethod) -> np.ndarray:
    """Exact d×d Jacobian of ``attribute`` with respect to the input."""
    x = np.asarray(x, dtype=float).ravel()
    d = x.size
    if method.tag == SALIENCY:
        return net.hessian_logit(model, x, y)
    if method.tag == INPUT_GRAD:
        return np.diag(net.grad_logit(model, x, y)) + x[:, None] * net.hessian_logit(model, x, y)
    a = method.baseline_for(d)
    m = method.steps
    pts = _path_points(x[None, :], a, m)
    C = net._onehot_rows(model, y, m)
    mean_grad = net.output_grads(model, pts, C).mean(axis=0)
    weighted = net._hessian_sum(model, pts, C, _alphas(m) / m)  # Σ_α (α/m²) H^(α)
    return np.diag(mean_grad) + (x - a)[:, None] * weighted


def attribution_vjp(model: net.Model, X, ys, S, method: AttributionMethod) -> np.ndarray:
    """Row-wise Hᵀs: the input gradient of s·g(x), without forming H."""
    X = net._as_batch(model, X)
    n, d = X.shape
    S = np.asarray(S, dtype=float).reshape(n, d)
    ys = np.broadcast_to(np.asarray(ys, dtype=int), (n,))
    C = net._onehot_rows(model, ys, n)
    if method.tag == SALIENCY:
        return net.hvp(model, X, C, S)
    if method.tag == INPUT_GRAD:
        G, HV = net.grad_and_hvp(model, X, C, S * X)
        return S * G + HV
    a = method.baseline_for(d)
    m = method.steps
    alphas = _alphas(m)
    # Hᵀs = s ⊙ mean_α ∇f + Σ_α (α/m²) ∇²f^(α) (s ⊙ (x - a))
    G, HV = net.path_derivatives(model, np.broadcast_to(a, (n, d)), X - a, alphas, C,
                                 np.full(m, 1.0 / m), V=S * (X - a), wh=alphas / m)
    return S * G + HV


def diag_dominance(H) -> float:
    """Share of absolute mass on the diagonal, Σ|H_ii| / Σ|H_ij| (1 for the zero matrix)."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ShapeError(f"expected a square matrix, got {H.shape}")
    total = np.abs(H).sum()
    if total == 0:
        return 1.0
    return float(np.abs(np.diag(H)).sum() / total)


def heatmap_grid(H, normalize: bool = True) -> np.ndarray:
    grid = np.abs(np.asarray(H, dtype=float))
    top = grid.max() if grid.size else 0.0
    return grid / top if normalize and top > 0 else grid


def write_heatmap_csv(H, path, normalize: bool = True) -> None:
    with open(Path(path), "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in heatmap_grid(H, normalize):
            writer.writerow([repr(float(v)) for v in row])
