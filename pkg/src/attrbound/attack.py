"""Adversarial (PGD) and attribution (IFIA) attacks, and the campaign that
checks attacked attributions against their certificates."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import softmax

from . import attrib, metrics, net
from .bounds import LINF, BoundCertificate, norm_tag
from .errors import DomainError, ShapeError

BOX_TOL = 1e-9


@dataclass(frozen=True)
class AttackConfig:
    norm: str = "l2"
    epsilon: float = 0.1
    steps: int | None = None
    step_size: float | None = None
    restarts: int = 20
    topk: int | None = None
    seed: int = 0
    inner_ig_steps: int = 32

    def __post_init__(self):
        tag = norm_tag(self.norm)
        if tag not in ("2", LINF):
            raise DomainError(f"attacks support l2 and linf, got {self.norm!r}")
        object.__setattr__(self, "norm", "l2" if tag == "2" else "linf")
        if self.epsilon < 0:
            raise DomainError("epsilon must be non-negative")
        if self.steps is not None and self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.restarts < 0:
            raise DomainError("restarts must be >= 0")
        if self.topk is not None and self.topk < 1:
            raise DomainError("topk must be >= 1")

    @property
    def n_steps(self) -> int:
        if self.steps is not None:
            return self.steps
        return 20 if self.norm == "l2" else 200

    @property
    def alpha(self) -> float:
        if self.step_size is not None:
            return self.step_size
        if self.norm == "l2":
            return 2.5 * self.epsilon / self.n_steps
        return self.epsilon / self.n_steps

    def k_for(self, d: int) -> int:
        k = self.topk if self.topk is not None else max(1, round(d / 8))
        if k > d:
            raise DomainError(f"topk {k} exceeds dimension {d}")
        return k


def restart_rng(seed: int, sample: int, restart: int) -> np.random.Generator:
    return np.random.default_rng([seed, sample, restart])


def _to_box(X, delta):
    # clipping x+δ into [0,1] only shrinks |δ_i|, so norm-ball membership survives
    return np.clip(X + delta, 0.0, 1.0) - X


def _project_l2(delta, eps):
    norms = np.linalg.norm(delta, axis=1, keepdims=True)
    return delta * np.minimum(1.0, eps / np.maximum(norms, 1e-300))


def _random_init(rngs, d, cfg):
    rows = []
    for rng in rngs:
        if cfg.norm == "l2":
            u = rng.standard_normal(d)
            u /= np.linalg.norm(u)
            rows.append(u * cfg.epsilon * rng.random() ** (1.0 / d))
        else:
            rows.append(rng.uniform(-cfg.epsilon, cfg.epsilon, d))
    return np.array(rows)


def _ce_grad(model, X, ys):
    fp = net._forward(model, X)
    C = softmax(fp.out, axis=1)
    C[np.arange(len(ys)), ys] -= 1.0
    return net._adjoints(model, fp, C)[1]


def pgd_batch(model, X, ys, cfg: AttackConfig, rngs) -> np.ndarray:
    """PGD on cross-entropy for a batch of rows, one RNG (or seed) per row.

    ℓ2 steps move along the normalised gradient; ℓ∞ steps along its sign.
    Iterates stay in the ε-ball and keep x+δ inside [0, 1].
    """
    X = net._as_batch(model, X)
    ys = np.broadcast_to(np.asarray(ys, dtype=int), (len(X),))
    if cfg.epsilon == 0:
        return np.zeros_like(X)
    rngs = [r if isinstance(r, np.random.Generator) else np.random.default_rng(int(r)) for r in rngs]
    delta = _to_box(X, _random_init(rngs, X.shape[1], cfg))
    for _ in range(cfg.n_steps):
        g = _ce_grad(model, X + delta, ys)
        if cfg.norm == "l2":
            gn = np.linalg.norm(g, axis=1, keepdims=True)
            delta = _project_l2(delta + cfg.alpha * g / np.maximum(gn, 1e-300), cfg.epsilon)
        else:
            delta = np.clip(delta + cfg.alpha * np.sign(g), -cfg.epsilon, cfg.epsilon)
        delta = _to_box(X, delta)
    return delta


def pgd_l2(model, x, y, cfg: AttackConfig, sample: int = 0, restart: int = 0) -> np.ndarray:
    if cfg.norm != "l2":
        raise DomainError("pgd_l2 needs an l2 config")
    return pgd_batch(model, np.asarray(x)[None, :], [y], cfg, [restart_rng(cfg.seed, sample, restart)])[0]


def _ifia_rows(model, X, ys, S, preds, cfg: AttackConfig, inner, rngs) -> np.ndarray:
    """IFIA iterations on independent rows; S holds each row's -1 top-k mask."""
    delta = _to_box(X, _random_init(rngs, X.shape[1], cfg))
    delta[net.predict(model, X + delta) != preds] = 0.0
    for _ in range(cfg.n_steps):
        grad = attrib.attribution_vjp(model, X + delta, ys, S, inner)
        cand = _to_box(X, np.clip(delta + cfg.alpha * np.sign(grad), -cfg.epsilon, cfg.epsilon))
        keep = net.predict(model, X + cand) == preds
        delta[keep] = cand[keep]
    return delta


def _topk_mask(g_x, k):
    s = np.zeros(g_x.size)
    s[metrics.topk_indices(g_x, k)] = -1.0
    return s


def ifia_batch(model, x, y, cfg: AttackConfig, method: attrib.AttributionMethod, rngs,
               g_x=None) -> np.ndarray:
    """Top-k attribution attack on one input, one row per restart.

    Ascends L(δ) = -Σ_{i∈TopK(|g(x)|)} g_i(x+δ) with signed steps of size
    ε/steps, recomputing the attribution with ``cfg.inner_ig_steps`` path
    steps when the method is integrated gradients. A step that would change
    the predicted class is discarded for that row.
    """
    x = np.asarray(x, dtype=float)
    d = x.size
    R = len(rngs)
    if cfg.epsilon == 0 or R == 0:
        return np.zeros((R, d))
    if g_x is None:
        g_x = attrib.attributions(model, x, y, method)[0]
    inner = method.with_steps(cfg.inner_ig_steps) if method.complete else method
    S = np.tile(_topk_mask(g_x, cfg.k_for(d)), (R, 1))
    pred = int(np.argmax(net.forward(model, x)))
    return _ifia_rows(model, np.tile(x, (R, 1)), np.full(R, y), S, np.full(R, pred), cfg, inner, rngs)


def ifia_linf(model, x, y, cfg: AttackConfig, method=None, sample: int = 0, restart: int = 0) -> np.ndarray:
    if cfg.norm != "linf":
        raise DomainError("ifia_linf needs an linf config")
    method = method or attrib.AttributionMethod()
    return ifia_batch(model, x, y, cfg, method, [restart_rng(cfg.seed, sample, restart)])[0]


# -- campaign -----------------------------------------------------------------

@dataclass
class AttackRecord:
    sample_id: int
    restart: int
    delta: list
    label_preserved: bool
    euclid_dist: float
    cosine_dist: float
    kendall: float
    topk_intersection: float

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class SampleStats:
    sample_id: int
    n_records: int
    n_preserved: int
    T_e: float
    T_prime_e: float
    T_c: float
    T_c_valid: bool
    That_e: float | None
    That_c: float | None
    max_euclid: float | None
    kendall: float | None
    correct: bool


@dataclass
class CampaignReport:
    attack: str
    norm: str
    epsilon: float
    method: str
    restarts: int
    n_samples: int
    n_records: int
    n_label_preserved: int
    That_e: float | None
    T_e_mean: float
    Tprime_e_mean: float
    pct_outside_Te: float | None
    That_c_deg: float | None
    T_c_deg_mean: float | None
    n_Tc_invalid: int
    kendall_mean: float | None
    topk_mean: float | None
    min_gap_r: float | None
    n_violations_Tprime: int
    n_violations_Te: int
    n_violations_Tc: int
    samples: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "CampaignReport":
        d = dict(d)
        d["samples"] = [SampleStats(**s) for s in d.get("samples", [])]
        return cls(**d)

    def gaps(self) -> np.ndarray:
        """Per-sample T'_e - T̂_e over samples with label-preserved attacks."""
        rows = [s for s in self.samples if s.That_e is not None]
        return metrics.gaps([s.T_prime_e for s in rows], [s.That_e for s in rows])


def _mean(values):
    values = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(values)) if values else None


CHUNK = 8  # samples attacked together; fixed so results do not depend on worker count


def _attack_chunk(model, X, ys, sids, certs, cfg, method):
    """Attack a few samples at once (all restarts batched) and score every record."""
    n, d = X.shape
    R = cfg.restarts
    G = attrib.attributions(model, X, ys, method)
    preds = net.predict(model, X)
    rows = np.repeat(np.arange(n), R)
    Xr, yr, pr = X[rows], ys[rows], preds[rows]
    rngs = [restart_rng(cfg.seed, sids[i], r) for i in range(n) for r in range(R)]
    if len(rows) == 0 or cfg.epsilon == 0:
        deltas = np.zeros((len(rows), d))
    elif cfg.norm == "l2":
        deltas = pgd_batch(model, Xr, yr, cfg, rngs)
    else:
        inner = method.with_steps(cfg.inner_ig_steps) if method.complete else method
        k = cfg.k_for(d)
        S = np.stack([_topk_mask(g, k) for g in G])[rows]
        deltas = _ifia_rows(model, Xr, yr, S, pr, cfg, inner, rngs)
    preserved = net.predict(model, Xr + deltas) == pr if len(rows) else np.zeros(0, bool)
    G_adv = attrib.attributions(model, Xr + deltas, yr, method) if len(rows) else np.zeros((0, d))
    k = cfg.k_for(d)
    out = []
    for i in range(n):
        g_x = G[i]
        records = []
        for r in range(R):
            j = i * R + r
            g_adv = G_adv[j]
            try:
                cos = metrics.cosine_dist(g_adv, g_x)
            except DomainError:
                cos = math.nan
            try:
                tau = metrics.kendall_tau(g_x, g_adv)
            except DomainError:
                tau = math.nan
            records.append(AttackRecord(
                sample_id=sids[i], restart=r, delta=deltas[j].tolist(), label_preserved=bool(preserved[j]),
                euclid_dist=metrics.euclid_dist(g_adv, g_x), cosine_dist=cos, kendall=tau,
                topk_intersection=metrics.topk_intersection(g_x, g_adv, k),
            ))
        kept = [rec for rec in records if rec.label_preserved]
        cert = certs[i]
        out.append((records, SampleStats(
            sample_id=sids[i], n_records=len(records), n_preserved=len(kept),
            T_e=cert.T_e, T_prime_e=cert.T_prime_e, T_c=cert.T_c, T_c_valid=cert.T_c_valid,
            That_e=_mean([rec.euclid_dist for rec in kept]),
            That_c=_mean([rec.cosine_dist for rec in kept]),
            max_euclid=max((rec.euclid_dist for rec in records), default=None),
            kendall=_mean([rec.kendall for rec in kept]),
            correct=bool(preds[i] == ys[i]),
        )))
    return out


def run_campaign(model, X, ys, certs, cfg: AttackConfig, method: attrib.AttributionMethod,
                 sample_ids=None, record_sink=None, workers: int = 1) -> CampaignReport:
    """Attack every sample ``cfg.restarts`` times and compare with its certificate.

    Records whose prediction changed are left out of the labeled statistics
    (means, Kendall τ, gaps) but still count against the certificate, which
    holds without any label constraint. ``record_sink`` receives each
    AttackRecord in sample order.
    """
    X = net._as_batch(model, X)
    ys = np.asarray(ys, dtype=int)
    if len(X) == 0:
        raise ShapeError("campaign needs at least one sample")
    if len(certs) != len(X) or len(ys) != len(X):
        raise ShapeError("one label and one certificate per sample required")
    want_norm = "2" if cfg.norm == "l2" else LINF
    for cert in certs:
        if cert.norm != want_norm or not math.isclose(cert.epsilon, cfg.epsilon, rel_tol=1e-12, abs_tol=1e-15):
            raise ShapeError(f"certificate (norm {cert.norm}, eps {cert.epsilon}) does not match the attack "
                             f"(norm {cfg.norm}, eps {cfg.epsilon})")
    sample_ids = list(range(len(X))) if sample_ids is None else [int(s) for s in sample_ids]

    def job(lo):
        hi = min(lo + CHUNK, len(X))
        return _attack_chunk(model, X[lo:hi], ys[lo:hi], sample_ids[lo:hi], certs[lo:hi], cfg, method)

    starts = range(0, len(X), CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(job, starts))
    else:
        chunks = [job(lo) for lo in starts]
    results = [item for chunk in chunks for item in chunk]

    all_stats, n_rec, n_keep = [], 0, 0
    v_tp = v_te = v_tc = 0
    kendalls, topks = [], []
    for (records, stats), cert in zip(results, certs):
        for rec in records:
            if record_sink is not None:
                record_sink(rec)
            n_rec += 1
            v_tp += rec.euclid_dist > cert.T_prime_e
            v_te += rec.euclid_dist > cert.T_e
            if cert.T_c_valid and rec.cosine_dist > cert.T_c:
                v_tc += 1
            if rec.label_preserved:
                n_keep += 1
                kendalls.append(rec.kendall)
                topks.append(rec.topk_intersection)
        all_stats.append(stats)

    attacked = [s for s in all_stats if s.That_e is not None]
    valid_tc = [s for s in all_stats if s.T_c_valid]
    report = CampaignReport(
        attack="pgd" if cfg.norm == "l2" else "ifia",
        norm=want_norm, epsilon=float(cfg.epsilon), method=method.describe(),
        restarts=cfg.restarts, n_samples=len(X), n_records=n_rec, n_label_preserved=n_keep,
        That_e=_mean([s.That_e for s in attacked]),
        T_e_mean=float(np.mean([c.T_e for c in certs])),
        Tprime_e_mean=float(np.mean([c.T_prime_e for c in certs])),
        pct_outside_Te=(100.0 * sum(s.That_e > s.T_e for s in attacked) / len(attacked)) if attacked else None,
        That_c_deg=_mean([metrics.to_degrees(min(2.0, s.That_c)) for s in attacked if s.That_c is not None]),
        T_c_deg_mean=_mean([metrics.to_degrees(s.T_c) for s in valid_tc]),
        n_Tc_invalid=len(all_stats) - len(valid_tc),
        kendall_mean=_mean(kendalls),
        topk_mean=_mean(topks),
        min_gap_r=None,
        n_violations_Tprime=int(v_tp), n_violations_Te=int(v_te), n_violations_Tc=int(v_tc),
        samples=all_stats,
    )
    if attacked:
        report.min_gap_r = metrics.min_gap([s.T_prime_e for s in attacked], [s.That_e for s in attacked])
    return report
