"""Upper bounds on attribution deviation under norm-bounded input perturbations.

Conventions: H is the attribution Jacobian with H_ij = ∂g_i/∂x_j, so a
perturbation δ moves the attribution by Hδ to first order and
‖Hδ‖² = δᵀPδ with P = HᵀH, the Gram matrix over *input* space. The dominant
eigenvector of P is therefore the worst-case perturbation direction, which is
what the adaptive scale and the label-constraint witnesses need.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import attrib, metrics, net
from .errors import DomainError, ShapeError
from .numkit import abs_sum, as_square, power_iteration

L2 = "2"
LINF = "inf"


def norm_tag(p) -> str:
    """Canonical string for a perturbation norm: '2', 'inf' or a general p > 2."""
    s = str(p).lower().lstrip("l")
    if s in ("inf", "infinity", "∞"):
        return LINF
    value = float(s)
    if value == 2:
        return L2
    if value == math.inf:
        return LINF
    if value <= 2:
        raise DomainError(f"unsupported perturbation norm {p!r}")
    return repr(value)


def input_gram(H) -> np.ndarray:
    H = as_square(H, "attribution Jacobian")
    return H.T @ H


class L2Bound(NamedTuple):
    T_e: float
    xi_max: float
    v_max: np.ndarray
    converged: bool


def l2_bound(H, eps: float, P=None) -> L2Bound:
    """ξ_max·ε with ξ_max the top singular value of H."""
    if eps < 0:
        raise DomainError("epsilon must be non-negative")
    P = input_gram(H) if P is None else P
    pair = power_iteration(P)
    xi = math.sqrt(max(pair.value, 0.0))
    return L2Bound(xi * eps, xi, pair.vector, pair.converged)


def lp_factor(d: int, p) -> float:
    p = float(p)
    if not p > 2:
        raise DomainError("the p-norm relaxation is for p > 2")
    return d ** (0.5 - 1.0 / p)


def lp_relaxed_bound(H, eps: float, p, d: int | None = None, xi_max: float | None = None) -> float:
    """d^(1/2 - 1/p)·ξ_max·ε, valid for any ℓp ball with p > 2 (√d·ξ_max·ε for ℓ∞)."""
    H = as_square(H, "attribution Jacobian")
    d = H.shape[0] if d is None else d
    factor = lp_factor(d, p)
    if xi_max is None:
        xi_max = l2_bound(H, 1.0).xi_max
    return factor * xi_max * eps


def linf_bound(P, eps: float) -> float:
    """ε·√(Σ|P_ij|): bounds √(δᵀPδ) over the box ‖δ‖∞ ≤ ε."""
    if eps < 0:
        raise DomainError("epsilon must be non-negative")
    return eps * math.sqrt(abs_sum(P))


# ξ_max is only known to the eigen-solver tolerance, so ratios this close to 1
# are indistinguishable from an exactly linear attribution
RATIO_TOL = 1e-8


def adaptive_scale(model, x, y, method, eps, xi_max, v_max, g_x=None) -> float:
    """c = max{1, ‖g(x ± εv) - g(x)‖ / (ξ_max ε)}, larger of the two signs."""
    if eps <= 0:
        raise DomainError("adaptive scale needs epsilon > 0")
    if xi_max == 0:
        return 1.0
    x = np.asarray(x, dtype=float)
    v = np.asarray(v_max, dtype=float)
    if g_x is None:
        g_x = attrib.attributions(model, x, y, method)[0]
    shifted = attrib.attributions(model, np.stack([x + eps * v, x - eps * v]), y, method)
    ratio = np.linalg.norm(shifted - g_x, axis=1).max() / (xi_max * eps)
    return float(ratio) if ratio > 1.0 + RATIO_TOL else 1.0


def cosine_bound(T: float, g_norm: float):
    """Cosine-distance bound 1 - √(1 - T²/‖g‖²) and whether its precondition T ≤ ‖g‖ holds.

    Returns the trivial ceiling 2 with ``valid=False`` when T > ‖g‖.
    """
    if g_norm <= 0:
        raise DomainError("cosine bound undefined for a zero attribution")
    if T < 0:
        raise DomainError("T must be non-negative")
    if T > g_norm:
        return 2.0, False
    return 1.0 - math.sqrt(max(0.0, 1.0 - (T / g_norm) ** 2)), True


@dataclass(frozen=True, eq=False)
class LabelConstraint:
    M: np.ndarray
    b: float
    second_label: int

    def satisfied(self, delta) -> bool:
        return float(self.M @ np.asarray(delta, dtype=float)) < self.b


def build_label_constraint(model, x, y, method, H_y=None) -> LabelConstraint:
    """Half-space Mᵀδ < b keeping the prediction ahead of the runner-up label.

    M is the all-ones contraction of (∇g^{y'} - ∇g^{y}) over attribution
    features, b = f_y(x) - f_{y'}(x).
    """
    if not method.complete:
        raise DomainError("label constraints need an attribution satisfying completeness (integrated gradients)")
    x = np.asarray(x, dtype=float)
    out = net.forward(model, x)
    if model.num_classes < 2:
        raise ShapeError("label constraint needs at least two classes")
    others = out.copy()
    others[y] = -np.inf
    y2 = int(np.argmax(others))
    if H_y is None:
        H_y = attrib.attribution_jacobian(model, x, y, method)
    H_y2 = attrib.attribution_jacobian(model, x, y2, method)
    M = (H_y2 - H_y).sum(axis=0)
    return LabelConstraint(M, float(out[y] - out[y2]), y2)


class LabeledBound(NamedTuple):
    T_e: float
    witness: np.ndarray | None
    degenerate: bool


def labeled_l2_bound(xi_max: float, v_max, eps: float, lc: LabelConstraint) -> LabeledBound:
    """ξ_max·ε stays attainable under the label constraint if ±εv_max is feasible."""
    v = np.asarray(v_max, dtype=float)
    for sign in (1.0, -1.0):
        delta = sign * eps * v
        if lc.satisfied(delta):
            return LabeledBound(xi_max * eps, delta, False)
    return LabeledBound(xi_max * eps, None, True)


def feasible_corner(M, b: float, eps: float) -> np.ndarray | None:
    """A box corner ε·s with Mᵀ(εs) < b, or None.

    s = -sign(M) minimises Mᵀδ over the whole box, so it is feasible exactly
    when any corner is.
    """
    M = np.asarray(M, dtype=float)
    s = np.where(M >= 0, -1.0, 1.0)
    delta = eps * s
    return delta if float(M @ delta) < b else None


def labeled_linf_bound(P, eps: float, lc: LabelConstraint) -> LabeledBound:
    corner = feasible_corner(lc.M, lc.b, eps)
    return LabeledBound(linf_bound(P, eps), corner, corner is None)


def eta(model, x, y, method, delta, H=None) -> float:
    """Norm of the first-order Taylor remainder ‖g(x+δ) - g(x) - Hδ‖."""
    x = np.asarray(x, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if delta.shape != x.shape:
        raise ShapeError("perturbation and input dimensions differ")
    if H is None:
        H = attrib.attribution_jacobian(model, x, y, method)
    g = attrib.attributions(model, np.stack([x, x + delta]), y, method)
    return float(np.linalg.norm(g[1] - g[0] - H @ delta))


def max_epsilon_for_threshold(omega: float, xi_max: float, g_norm: float = 0.0,
                              metric: str = "euclid") -> float:
    """Largest ε whose ℓ2 certificate stays within a distance budget ω."""
    if omega < 0:
        raise DomainError("omega must be non-negative")
    if xi_max <= 0:
        raise DomainError("xi_max must be positive")
    if metric == "euclid":
        return omega / xi_max
    if metric == "cosine":
        if omega > 1:
            raise DomainError("cosine inversion only defined for omega in [0, 1]")
        if g_norm <= 0:
            raise DomainError("cosine inversion needs a nonzero attribution")
        return g_norm / xi_max * math.sqrt(1.0 - (1.0 - omega) ** 2)
    raise DomainError(f"unknown metric {metric!r}")


@dataclass
class BoundCertificate:
    sample_id: int
    label: int
    method: str
    norm: str
    epsilon: float
    xi_max: float
    T_e: float
    c: float
    T_prime_e: float
    T_c: float
    T_c_valid: bool
    g_norm: float
    label_constrained: bool = False
    b: float | None = None
    second_label: int | None = None
    witness: list | None = None
    degenerate: bool = False
    converged: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BoundCertificate":
        return cls(**d)

    @property
    def check_bound(self) -> float:
        """Euclidean bound attacks are checked against: T'_e for ℓ2, T_e otherwise."""
        return self.T_prime_e


@dataclass(frozen=True, eq=False)
class SampleAnalysis:
    """ε-independent quantities reused across every certificate of one sample."""
    x: np.ndarray
    y: int
    g: np.ndarray
    H: np.ndarray
    P: np.ndarray
    xi_max: float
    v_max: np.ndarray
    abs_sum_P: float
    converged: bool
    constraint: LabelConstraint | None


def analyse(model, x, y, method, label_constrained: bool = False) -> SampleAnalysis:
    x = np.asarray(x, dtype=float)
    y = int(y)
    g = attrib.attributions(model, x, y, method)[0]
    H = attrib.attribution_jacobian(model, x, y, method)
    P = input_gram(H)
    top = l2_bound(H, 1.0, P=P)
    lc = build_label_constraint(model, x, y, method, H_y=H) if label_constrained else None
    return SampleAnalysis(x, y, g, H, P, top.xi_max, top.v_max, abs_sum(P), top.converged, lc)


def certificate(model, method, sa: SampleAnalysis, eps: float, norm, sample_id: int = 0) -> BoundCertificate:
    norm = norm_tag(norm)
    if eps < 0:
        raise DomainError("epsilon must be non-negative")
    d = sa.x.size
    if norm == L2:
        T_e = sa.xi_max * eps
        c = adaptive_scale(model, sa.x, sa.y, method, eps, sa.xi_max, sa.v_max, sa.g) if eps > 0 else 1.0
    elif norm == LINF:
        T_e = linf_bound(sa.P, eps)
        c = 1.0
    else:
        radius = lp_factor(d, float(norm)) * eps
        T_e = radius * sa.xi_max
        c = adaptive_scale(model, sa.x, sa.y, method, radius, sa.xi_max, sa.v_max, sa.g) if eps > 0 else 1.0
    T_prime = c * T_e
    g_norm = float(np.linalg.norm(sa.g))
    if g_norm > 0:
        T_c, valid = cosine_bound(T_prime, g_norm)
    else:
        T_c, valid = 2.0, False

    cert = BoundCertificate(
        sample_id=int(sample_id), label=sa.y, method=method.describe(), norm=norm,
        epsilon=float(eps), xi_max=sa.xi_max, T_e=T_e, c=c, T_prime_e=T_prime,
        T_c=T_c, T_c_valid=valid, g_norm=g_norm, converged=sa.converged,
    )
    if sa.constraint is not None:
        lc = sa.constraint
        if norm == LINF:
            res = labeled_linf_bound(sa.P, eps, lc)
        else:
            res = labeled_l2_bound(sa.xi_max, sa.v_max, eps, lc)
        cert.label_constrained = True
        cert.b = lc.b
        cert.second_label = lc.second_label
        cert.degenerate = res.degenerate
        cert.witness = None if res.witness is None else res.witness.tolist()
    return cert


def certify(model, x, y, method, epsilons, norm=L2, label_constrained: bool = False,
            sample_id: int = 0) -> list[BoundCertificate]:
    """Certificates for one sample at each ε (the Jacobian is computed once)."""
    sa = analyse(model, x, y, method, label_constrained)
    return [certificate(model, method, sa, eps, norm, sample_id) for eps in epsilons]


def cosine_bound_degrees(cert: BoundCertificate) -> float:
    return metrics.to_degrees(cert.T_c)
