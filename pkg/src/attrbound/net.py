"""Fully connected softplus classifiers with exact input gradients and Hessians.

Hidden layers use softplus(z; β) = log(1 + exp(βz))/β, the output layer is
linear. Everything below works on row batches; the single-sample helpers
(`forward`, `grad_logit`, `hessian_logit`) are thin wrappers.

For an MLP the pre-activation z_l of layer l is affine in the previous
activation, so the Hessian of any output functional F = cᵀf is

    ∇²F(x) = Σ_l  J_lᵀ diag(u_l ⊙ softplus''(z_l)) J_l

with J_l = ∂z_l/∂x and u_l = ∂F/∂a_l the backprop adjoint on layer l's
activation. That sum is what `_hessian_sum` and `hvp` evaluate.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit, log_softmax, softmax

from .errors import DomainError, ShapeError, TrainingError

log = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Model:
    weights: tuple
    biases: tuple
    beta: float = 10.0

    def __post_init__(self):
        if len(self.weights) == 0 or len(self.weights) != len(self.biases):
            raise ShapeError("need one bias per weight matrix and at least one layer")
        ws, bs = [], []
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            W = np.array(W, dtype=float, ndmin=2)
            b = np.array(b, dtype=float).ravel()
            if W.ndim != 2 or b.shape != (W.shape[0],):
                raise ShapeError(f"layer {i}: weight {W.shape} incompatible with bias {b.shape}")
            if i > 0 and W.shape[1] != ws[-1].shape[0]:
                raise ShapeError(f"layer {i} expects {W.shape[1]} inputs, previous layer gives {ws[-1].shape[0]}")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise DomainError(f"layer {i} has non-finite parameters")
            W.setflags(write=False)
            b.setflags(write=False)
            ws.append(W)
            bs.append(b)
        if not self.beta > 0:
            raise DomainError("beta must be positive")
        object.__setattr__(self, "weights", tuple(ws))
        object.__setattr__(self, "biases", tuple(bs))
        object.__setattr__(self, "beta", float(self.beta))

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def num_classes(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def widths(self) -> list[int]:
        return [self.input_dim] + [W.shape[0] for W in self.weights]

    def __repr__(self):
        return f"Model(widths={self.widths}, beta={self.beta})"


INIT_SCHEMES = ("uniform", "he")


def init_model(widths, beta: float = 10.0, seed: int = 0, scheme: str = "uniform") -> Model:
    """Random model with layer widths ``[d, h1, ..., k]``.

    "uniform" draws weights and biases from U(-1/√fan_in, 1/√fan_in); "he"
    uses N(0, 2/fan_in) weights and zero biases.
    """
    if len(widths) < 2:
        raise ShapeError("need at least input and output widths")
    if scheme not in INIT_SCHEMES:
        raise DomainError(f"unknown init scheme {scheme!r}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        if scheme == "he":
            weights.append(rng.standard_normal((fan_out, fan_in)) * np.sqrt(2.0 / fan_in))
            biases.append(np.zeros(fan_out))
        else:
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, (fan_out, fan_in)))
            biases.append(rng.uniform(-bound, bound, fan_out))
    return Model(tuple(weights), tuple(biases), beta)


# -- activation ---------------------------------------------------------------

def softplus(z, beta):
    return np.logaddexp(0.0, beta * z) / beta


def softplus_d1(z, beta):
    return expit(beta * z)


def softplus_d2(z, beta):
    # σ(t)(1-σ(t)) = σ(t)σ(-t), which keeps full precision for large |t|
    t = beta * np.asarray(z, dtype=float)
    return beta * expit(t) * expit(-t)


def _activation(z, beta):
    """softplus, its slope σ(βz) and curvature βσ(1-σ) from a single exp(-β|z|)."""
    e = np.abs(z)
    e *= -beta
    np.exp(e, out=e)
    inv = e + 1.0
    np.reciprocal(inv, out=inv)
    curv = e * inv
    curv *= inv
    curv *= beta
    # σ(βz) = 1/2 ± (σ(β|z|) - 1/2); absolute accuracy only in the far tail
    slope = inv - 0.5
    np.copysign(slope, z, out=slope)
    slope += 0.5
    value = np.log1p(e, out=e)
    value /= beta
    value += np.maximum(z, 0.0)
    return value, slope, curv


# -- passes -------------------------------------------------------------------

def _as_batch(model: Model, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.input_dim:
        raise ShapeError(f"expected inputs of dimension {model.input_dim}, got shape {X.shape}")
    return X


@dataclass
class _Pass:
    acts: list    # input followed by each hidden activation
    slopes: list  # softplus'(z_l) per hidden layer
    curvs: list   # softplus''(z_l) per hidden layer
    out: np.ndarray


def _forward(model: Model, X: np.ndarray) -> _Pass:
    acts, slopes, curvs = [X], [], []
    a = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        a, slope, curv = _activation(a @ W.T + b, model.beta)
        acts.append(a)
        slopes.append(slope)
        curvs.append(curv)
    out = a @ model.weights[-1].T + model.biases[-1]
    return _Pass(acts, slopes, curvs, out)


def _adjoints(model: Model, fp: _Pass, C: np.ndarray):
    """Backprop an output cotangent C (n, k).

    Returns the adjoints on each hidden activation (bottom to top) and the
    input gradient.
    """
    r = C @ model.weights[-1]
    us = [None] * len(fp.slopes)
    for l in range(len(fp.slopes) - 1, -1, -1):
        us[l] = r
        r = (r * fp.slopes[l]) @ model.weights[l]
    return us, r


def _onehot_rows(model: Model, ys, n: int) -> np.ndarray:
    ys = np.broadcast_to(np.asarray(ys, dtype=int), (n,))
    if np.any(ys < 0) or np.any(ys >= model.num_classes):
        raise ShapeError(f"label out of range for {model.num_classes} classes")
    C = np.zeros((n, model.num_classes))
    C[np.arange(n), ys] = 1.0
    return C


def logits(model: Model, X) -> np.ndarray:
    """Batched logits (n, k)."""
    return _forward(model, _as_batch(model, X)).out


def forward(model: Model, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = logits(model, x)
    return out[0] if x.ndim == 1 else out


def predict(model: Model, X) -> np.ndarray:
    return np.argmax(logits(model, X), axis=1)


def output_grads(model: Model, X, C) -> np.ndarray:
    """Row-wise gradient of C_n·f(X_n) with respect to X_n."""
    X = _as_batch(model, X)
    return _adjoints(model, _forward(model, X), np.asarray(C, dtype=float).reshape(len(X), -1))[1]


def logit_grads(model: Model, X, ys) -> np.ndarray:
    X = _as_batch(model, X)
    return output_grads(model, X, _onehot_rows(model, ys, len(X)))


def grad_logit(model: Model, x, y: int) -> np.ndarray:
    """Exact ∂f_y/∂x for a single input."""
    return logit_grads(model, x, y)[0]


def _hessian_sum(model: Model, X: np.ndarray, C: np.ndarray, w: np.ndarray,
                 symmetrize: bool = True) -> np.ndarray:
    """Σ_n w_n ∇²(C_n·f)(X_n) as a single d×d matrix."""
    fp = _forward(model, X)
    us, _ = _adjoints(model, fp, C)
    d = model.input_dim
    H = np.zeros((d, d))
    J = None  # ∂z_l/∂x, shape (n, h_l, d)
    n_hidden = len(fp.slopes)
    for l in range(n_hidden):
        curv = us[l] * fp.curvs[l] * w[:, None]
        if l == 0:
            W1 = model.weights[0]
            H += (W1.T * curv.sum(axis=0)) @ W1
            if n_hidden > 1:
                J = np.broadcast_to(W1, (len(X),) + W1.shape)
        else:
            flat = J.reshape(-1, d)
            H += (flat * curv.reshape(-1, 1)).T @ flat
        if l + 1 < n_hidden:
            J = model.weights[l + 1] @ (fp.slopes[l][:, :, None] * J)
    return 0.5 * (H + H.T) if symmetrize else H


def hessian_logit(model: Model, x, y: int, symmetrize: bool = True) -> np.ndarray:
    """Exact ∇²f_y(x), assembled layer by layer."""
    X = _as_batch(model, x)
    if X.shape[0] != 1:
        raise ShapeError("hessian_logit takes a single input")
    return _hessian_sum(model, X, _onehot_rows(model, y, 1), np.ones(1), symmetrize)


def grad_and_hvp(model: Model, X, C, V):
    """Row-wise gradient of C_n·f and Hessian-vector product ∇²(C_n·f) V_n.

    Forward-over-reverse on a single forward pass; the two input-layer
    backprops share one matrix product.
    """
    X = _as_batch(model, X)
    n = len(X)
    C = np.asarray(C, dtype=float).reshape(n, -1)
    V = np.asarray(V, dtype=float).reshape(X.shape)
    fp = _forward(model, X)
    L = len(fp.slopes)
    if L == 0:
        return np.broadcast_to(C @ model.weights[0], X.shape).copy(), np.zeros_like(X)
    dzs = []
    da = V
    for l in range(L):
        dz = da @ model.weights[l].T
        dzs.append(dz)
        da = fp.slopes[l] * dz
    r = C @ model.weights[-1]        # adjoint on the top activation
    t = np.zeros_like(r)             # second-order adjoint
    for l in range(L - 1, -1, -1):
        rz = r * fp.slopes[l]
        tz = t * fp.slopes[l] + r * fp.curvs[l] * dzs[l]
        if l == 0:
            both = np.concatenate([rz, tz]) @ model.weights[0]
            return both[:n], both[n:]
        r = rz @ model.weights[l]
        t = tz @ model.weights[l]


def hvp(model: Model, X, C, V) -> np.ndarray:
    """Row-wise Hessian-vector products ∇²(C_n·f)(X_n) V_n."""
    return grad_and_hvp(model, X, C, V)[1]


def path_derivatives(model: Model, A, D, alphas, C, wg, V=None, wh=None):
    """Weighted sums of derivatives along the segments x_n(α) = A_n + α D_n.

    Returns Σ_j wg_j ∇F_n(x_n(α_j)) and, when V is given,
    Σ_j wh_j ∇²F_n(x_n(α_j)) V_n (else None), with F_n = C_n·f. The first
    layer is affine along each segment, so its pre-activations and the
    input-layer products are formed once per row rather than once per node.
    """
    A = _as_batch(model, A)
    n, d = A.shape
    D = np.asarray(D, dtype=float).reshape(n, d)
    alphas = np.asarray(alphas, dtype=float)
    wg = np.asarray(wg, dtype=float)
    m = alphas.size
    C = np.asarray(C, dtype=float).reshape(n, -1)
    W1 = model.weights[0]
    L = len(model.weights) - 1
    if L == 0:
        G = (C @ W1) * wg.sum()
        return G, (None if V is None else np.zeros((n, d)))

    z0 = A @ W1.T + model.biases[0]
    zd = D @ W1.T
    h1 = z0.shape[1]
    z = (z0[:, None, :] + alphas[None, :, None] * zd[:, None, :]).reshape(n * m, h1)
    slopes, curvs, dzs = [], [], []
    second = V is not None
    dz = np.repeat(np.asarray(V, dtype=float).reshape(n, d) @ W1.T, m, axis=0) if second else None
    for l in range(L):
        a, slope, curv = _activation(z, model.beta)
        slopes.append(slope)
        curvs.append(curv)
        dzs.append(dz)
        if l + 1 < L:
            W = model.weights[l + 1]
            z = a @ W.T + model.biases[l + 1]
            if second:
                dz = (slope * dz) @ W.T
    Cm = np.repeat(C, m, axis=0)
    r = Cm @ model.weights[-1]
    t = None
    for l in range(L - 1, -1, -1):
        rz = r * slopes[l]
        if second:
            tz = r * curvs[l] * dzs[l]
            if t is not None:
                tz += t * slopes[l]
        if l > 0:
            r = rz @ model.weights[l]
            if second:
                t = tz @ model.weights[l]
    G = np.einsum("j,njh->nh", wg, rz.reshape(n, m, h1)) @ W1
    if not second:
        return G, None
    wh = np.asarray(wh, dtype=float)
    HV = np.einsum("j,njh->nh", wh, tz.reshape(n, m, h1)) @ W1
    return G, HV


# -- training -----------------------------------------------------------------

@dataclass(frozen=True)
class AdversarialConfig:
    norm: str = "l2"
    epsilon: float = 0.1
    steps: int = 10


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    lr: float = 0.05
    optimizer: str = "momentum"
    momentum: float = 0.9
    seed: int = 0
    adversarial: AdversarialConfig | None = None

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1 or self.lr <= 0:
            raise DomainError("epochs >= 0, batch_size >= 1 and lr > 0 required")
        if self.optimizer not in ("sgd", "momentum"):
            raise DomainError(f"unknown optimizer {self.optimizer!r}")

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        adv = d.pop("adversarial", None)
        return cls(**d, adversarial=AdversarialConfig(**adv) if adv else None)


def cross_entropy(model: Model, X, ys) -> float:
    out = logits(model, X)
    ys = np.asarray(ys, dtype=int)
    return float(-log_softmax(out, axis=1)[np.arange(len(ys)), ys].mean())


def _param_grads(model: Model, X, ys):
    fp = _forward(model, X)
    acts = fp.acts
    delta = softmax(fp.out, axis=1)
    delta[np.arange(len(ys)), ys] -= 1.0
    delta /= len(ys)
    gWs, gbs = [None] * len(model.weights), [None] * len(model.weights)
    L = len(model.weights) - 1
    gWs[L] = delta.T @ acts[L]
    gbs[L] = delta.sum(axis=0)
    r = delta @ model.weights[L]
    for l in range(L - 1, -1, -1):
        dz = r * fp.slopes[l]
        gWs[l] = dz.T @ acts[l]
        gbs[l] = dz.sum(axis=0)
        r = dz @ model.weights[l]
    return gWs, gbs


def train(model: Model, X, y, cfg: TrainConfig) -> Model:
    """Mini-batch cross-entropy training; deterministic for a given ``cfg.seed``."""
    X = _as_batch(model, X)
    y = np.asarray(y, dtype=int)
    if len(X) == 0 or len(y) != len(X):
        raise ShapeError("training set must be nonempty with one label per row")
    if np.any(y < 0) or np.any(y >= model.num_classes):
        raise ShapeError("label out of range")
    if cfg.epochs == 0:
        return model

    rng = np.random.default_rng(cfg.seed)
    Ws = [W.copy() for W in model.weights]
    bs = [b.copy() for b in model.biases]
    vW = [np.zeros_like(W) for W in Ws]
    vb = [np.zeros_like(b) for b in bs]
    mu = cfg.momentum if cfg.optimizer == "momentum" else 0.0
    current = model

    if cfg.adversarial is not None:
        from .attack import AttackConfig, pgd_batch

        adv_cfg = AttackConfig(norm=cfg.adversarial.norm, epsilon=cfg.adversarial.epsilon,
                               steps=cfg.adversarial.steps, restarts=1, seed=cfg.seed)

    for epoch in range(cfg.epochs):
        order = rng.permutation(len(X))
        for start in range(0, len(X), cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            xb, yb = X[idx], y[idx]
            if cfg.adversarial is not None:
                seeds = rng.integers(0, 2**63 - 1, size=len(idx))
                xb = np.clip(xb + pgd_batch(current, xb, yb, adv_cfg, seeds), 0.0, 1.0)
            gWs, gbs = _param_grads(current, xb, yb)
            for l in range(len(Ws)):
                vW[l] = mu * vW[l] - cfg.lr * gWs[l]
                vb[l] = mu * vb[l] - cfg.lr * gbs[l]
                Ws[l] += vW[l]
                bs[l] += vb[l]
            if not all(np.all(np.isfinite(W)) for W in Ws):
                raise TrainingError(f"non-finite parameters at epoch {epoch}; lower the learning rate")
            current = Model(tuple(Ws), tuple(bs), model.beta)
        loss = cross_entropy(current, X, y)
        if not np.isfinite(loss):
            raise TrainingError(f"loss became {loss} at epoch {epoch}")
        log.debug("epoch %d loss %.5f", epoch, loss)
    return current


# -- serialization --------------------------------------------------------------

def model_to_dict(model: Model) -> dict:
    return {
        "version": FORMAT_VERSION,
        "beta": model.beta,
        "input_dim": model.input_dim,
        "num_classes": model.num_classes,
        "layers": [
            {"rows": W.shape[0], "cols": W.shape[1],
             "weights": W.ravel().tolist(), "bias": b.tolist()}
            for W, b in zip(model.weights, model.biases)
        ],
    }


def model_from_dict(doc: dict) -> Model:
    if doc.get("version") != FORMAT_VERSION:
        raise ShapeError(f"unsupported model format version {doc.get('version')!r}")
    weights, biases = [], []
    for layer in doc["layers"]:
        W = np.asarray(layer["weights"], dtype=float)
        if W.size != layer["rows"] * layer["cols"]:
            raise ShapeError("weight entry count does not match rows x cols")
        weights.append(W.reshape(layer["rows"], layer["cols"]))
        biases.append(np.asarray(layer["bias"], dtype=float))
    model = Model(tuple(weights), tuple(biases), doc["beta"])
    if model.input_dim != doc["input_dim"] or model.num_classes != doc["num_classes"]:
        raise ShapeError("declared dimensions disagree with layer shapes")
    return model


def save_model(model: Model, path) -> None:
    # json writes floats with repr(), which round-trips float64 exactly
    Path(path).write_text(json.dumps(model_to_dict(model)) + "\n")


def load_model(path) -> Model:
    return model_from_dict(json.loads(Path(path).read_text()))
