"""Command-line harness: data, training, certification, attack campaigns, reports, diagnostics.

Every subcommand reads one JSON run configuration (``--config``) merged over
built-in defaults; command-line flags override individual keys. All outputs
go to the run directory (``--out``) and are byte-deterministic for a fixed
configuration.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import attack, attrib, bounds, data, metrics, net
from .errors import ConfigError, DomainError, ShapeError, TrainingError
from .numkit import central_jacobian

log = logging.getLogger("attrbound")

DEFAULTS = {
    "name": "blobs",
    "model_name": None,
    "seed": 0,
    "out": "run",
    "workers": 1,
    "dataset": {
        "kind": "synthetic",
        # synthetic
        "n": 1500, "d": 16, "classes": 4, "separation": 4.0, "sigma": 0.15, "seed": None,
        # mnist
        "images": None, "labels": None, "subset": None, "downscale": 2,
        # split: first n_train rows train, the next n_eval rows are certified and attacked
        "n_train": 1000, "n_eval": 500,
    },
    "model": {"hidden": [32], "beta": 10.0, "init": "uniform"},
    "train": {
        "epochs": 30, "batch_size": 32, "lr": 0.01, "optimizer": "momentum", "momentum": 0.9,
        "adversarial": {"norm": "l2", "epsilon": 0.2, "steps": 10},
    },
    "certify": {
        "method": "ig", "steps": 64, "label_constrained": True,
        "targets": [{"norm": "2", "epsilons": [0.05, 0.1]}, {"norm": "inf", "epsilons": [0.01, 0.05]}],
    },
    "attack": {"restarts": 20, "steps": None, "step_size": None, "topk": None, "inner_ig_steps": 32,
               "save_deltas": False},
    "report": {"bins": 20},
    "validate": {"epsilons": [0.01, 0.02, 0.05, 0.1], "n_samples": 20, "fd_step": 1e-4},
}

# checked in order, so the package errors win over their ValueError base
EXIT_CODES = {ConfigError: 2, ShapeError: 3, DomainError: 4, TrainingError: 5, OSError: 6,
              ValueError: 7, KeyError: 7, TypeError: 7}
ERROR_KINDS = {ConfigError: "config", ShapeError: "structural", DomainError: "domain",
               TrainingError: "training", OSError: "io", ValueError: "format", KeyError: "format",
               TypeError: "format"}


# -- configuration --------------------------------------------------------------

def _merge(base: dict, over: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in over.items():
        if key not in base:
            raise ConfigError(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, f"{path}{key}.")
        elif isinstance(base[key], dict) and key != "adversarial":
            raise ConfigError(f"config key {path + key!r} must be an object")
        else:
            out[key] = copy.deepcopy(value)
    return out


class RunConfig:
    """Validated view of a merged configuration document."""

    def __init__(self, doc: dict):
        self.doc = doc
        self.name = str(doc["name"])
        self.seed = int(doc["seed"])
        self.out = Path(doc["out"])
        self.workers = int(doc["workers"])
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        ds = doc["dataset"]
        if ds["kind"] not in ("synthetic", "mnist"):
            raise ConfigError(f"unknown dataset kind {ds['kind']!r}")
        if ds["kind"] == "mnist":
            for key in ("images", "labels"):
                if not ds[key] or not Path(ds[key]).exists():
                    raise ConfigError(f"dataset.{key} must name an existing IDX file, got {ds[key]!r}")
        if int(ds["n_train"]) < 0 or int(ds["n_eval"]) < 0:
            raise ConfigError("n_train and n_eval must be non-negative")
        cert = doc["certify"]
        if not cert["targets"]:
            raise ConfigError("certify.targets must not be empty")
        for t in cert["targets"]:
            if not t.get("epsilons"):
                raise ConfigError(f"empty epsilon list for norm {t.get('norm')!r}")
            try:
                bounds.norm_tag(t["norm"])
            except (DomainError, ValueError, KeyError) as exc:
                raise ConfigError(f"bad certification norm {t.get('norm')!r}") from exc
            if any(float(e) < 0 for e in t["epsilons"]):
                raise ConfigError("epsilons must be non-negative")
        try:
            self.method = attrib.AttributionMethod(cert["method"], int(cert["steps"]))
            self.train_cfg = net.TrainConfig.from_dict({**doc["train"], "seed": self.seed})
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        eps = doc["validate"]["epsilons"]
        if not eps or any(b <= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("validate.epsilons must be nonempty and strictly increasing")

    @property
    def model_name(self) -> str:
        if self.doc["model_name"]:
            return str(self.doc["model_name"])
        hidden = "-".join(str(h) for h in self.doc["model"]["hidden"])
        adv = self.doc["train"].get("adversarial")
        return f"mlp{hidden or '0'}{'-adv' if adv else ''}"

    @property
    def targets(self):
        return [(bounds.norm_tag(t["norm"]), [float(e) for e in t["epsilons"]])
                for t in self.doc["certify"]["targets"]]

    def path(self, name: str) -> Path:
        return self.out / name


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    doc = copy.deepcopy(DEFAULTS)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        doc = _merge(doc, user)
    for dotted, value in (overrides or {}).items():
        node = doc
        keys = dotted.split(".")
        for k in keys[:-1]:
            node = node[k]
        node[keys[-1]] = value
    return RunConfig(doc)


# -- file helpers ---------------------------------------------------------------

def _clean(obj):
    """NaN/inf become null so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def _dump(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, allow_nan=False)


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n")


def _read_jsonl(path: Path) -> list[dict]:
    if not path.exists():
        raise OSError(f"{path} not found")
    return [json.loads(line) for line in path.read_text().splitlines() if line.strip()]


def _require(path: Path, producer: str) -> Path:
    if not path.exists():
        raise OSError(f"{path} not found; run '{producer}' first")
    return path


def _eps_tag(norm: str, eps: float) -> str:
    return f"{'l2' if norm == bounds.L2 else 'linf' if norm == bounds.LINF else 'l' + norm}-eps{eps!r}"


def _dataset(cfg: RunConfig):
    X, y = data.load_csv(_require(cfg.path("dataset.csv"), "gen-data"))
    return X, y


def _split(cfg: RunConfig, X, y):
    ds = cfg.doc["dataset"]
    n_train, n_eval = int(ds["n_train"]), int(ds["n_eval"])
    if n_train + n_eval > len(X):
        raise ShapeError(f"dataset has {len(X)} rows, split needs {n_train} + {n_eval}")
    ids = np.arange(n_train, n_train + n_eval)
    return (X[:n_train], y[:n_train]), (X[ids], y[ids], ids)


def _model(cfg: RunConfig):
    return net.load_model(_require(cfg.path("model.json"), "train"))


# -- commands ---------------------------------------------------------------------

def cmd_gen_data(cfg: RunConfig) -> Path:
    ds = cfg.doc["dataset"]
    if ds["kind"] == "synthetic":
        seed = cfg.seed if ds["seed"] is None else int(ds["seed"])
        X, y = data.gaussian_blobs(int(ds["n"]), int(ds["d"]), int(ds["classes"]),
                                   float(ds["separation"]), float(ds["sigma"]), seed)
    else:
        X, y = data.load_mnist(ds["images"], ds["labels"], ds["subset"], int(ds["downscale"]))
    cfg.out.mkdir(parents=True, exist_ok=True)
    path = cfg.path("dataset.csv")
    data.save_csv(path, X, y)
    log.info("wrote %d samples (d=%d) to %s", len(X), X.shape[1], path)
    return path


def cmd_train(cfg: RunConfig) -> Path:
    X, y = _dataset(cfg)
    (Xtr, ytr), (Xev, yev, _) = _split(cfg, X, y)
    if len(Xtr) == 0:
        raise ShapeError("empty training split")
    m = cfg.doc["model"]
    widths = [X.shape[1], *[int(h) for h in m["hidden"]], int(y.max()) + 1]
    try:
        model0 = net.init_model(widths, float(m["beta"]), cfg.seed, m["init"])
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
    model = net.train(model0, Xtr, ytr, cfg.train_cfg)
    net.save_model(model, cfg.path("model.json"))
    summary = {
        "widths": widths, "beta": model.beta,
        "loss_init": net.cross_entropy(model0, Xtr, ytr), "loss_final": net.cross_entropy(model, Xtr, ytr),
        "train_accuracy": float(np.mean(net.predict(model, Xtr) == ytr)),
        "eval_accuracy": float(np.mean(net.predict(model, Xev) == yev)) if len(Xev) else None,
    }
    _write_json(cfg.path("train_summary.json"), summary)
    log.info("trained %s: train acc %.3f, eval acc %s", widths, summary["train_accuracy"], summary["eval_accuracy"])
    return cfg.path("model.json")


def _certify_sample(model, cfg, x, y, sid, targets):
    lc = bool(cfg.doc["certify"]["label_constrained"])
    sa = bounds.analyse(model, x, y, cfg.method, lc)
    return [bounds.certificate(model, cfg.method, sa, eps, norm, sid) for norm, epss in targets for eps in epss]


def cmd_certify(cfg: RunConfig) -> Path:
    model = _model(cfg)
    X, y = _dataset(cfg)
    _, (Xev, yev, ids) = _split(cfg, X, y)
    if cfg.doc["certify"]["label_constrained"] and not cfg.method.complete:
        raise DomainError("label-constrained certificates need integrated gradients")
    targets = cfg.targets

    def job(i):
        return _certify_sample(model, cfg, Xev[i], int(yev[i]), int(ids[i]), targets)

    with ThreadPoolExecutor(cfg.workers) as pool:
        per_sample = list(pool.map(job, range(len(Xev))))
    path = cfg.path("certificates.jsonl")
    with open(path, "w") as fh:
        for certs in per_sample:
            for c in certs:
                fh.write(_dump(c.to_dict()) + "\n")
    log.info("wrote %d certificates to %s", sum(map(len, per_sample)), path)
    return path


def _attack_targets(cfg: RunConfig):
    for norm, epss in cfg.targets:
        if norm not in (bounds.L2, bounds.LINF):
            log.warning("no attack for the l%s ball; skipping", norm)
            continue
        for eps in epss:
            yield norm, eps


def cmd_attack(cfg: RunConfig) -> list[Path]:
    model = _model(cfg)
    X, y = _dataset(cfg)
    _, (Xev, yev, ids) = _split(cfg, X, y)
    if len(Xev) == 0:
        raise ShapeError("campaign needs at least one sample")
    certs = [bounds.BoundCertificate.from_dict(d) for d in _read_jsonl(_require(cfg.path("certificates.jsonl"), "certify"))]
    a = cfg.doc["attack"]
    written = []
    for norm, eps in _attack_targets(cfg):
        by_id = {c.sample_id: c for c in certs
                 if c.norm == norm and math.isclose(c.epsilon, eps, rel_tol=1e-12, abs_tol=1e-15)}
        missing = [int(i) for i in ids if int(i) not in by_id]
        if missing:
            raise ShapeError(f"no {norm}-norm certificate at eps={eps} for samples {missing[:5]}; rerun certify")
        acfg = attack.AttackConfig(norm=norm, epsilon=eps, steps=a["steps"], step_size=a["step_size"],
                                   restarts=int(a["restarts"]), topk=a["topk"], seed=cfg.seed,
                                   inner_ig_steps=int(a["inner_ig_steps"]))
        tag = _eps_tag(norm, eps)
        rec_path = cfg.path(f"records-{tag}.ndjson")
        with open(rec_path, "w") as fh:
            def sink(rec):
                d = rec.to_dict()
                if not a["save_deltas"]:
                    d["delta"] = None
                fh.write(_dump(d) + "\n")

            report = attack.run_campaign(model, Xev, yev, [by_id[int(i)] for i in ids], acfg, cfg.method,
                                         sample_ids=[int(i) for i in ids], record_sink=sink,
                                         workers=cfg.workers)
        path = cfg.path(f"campaign-{tag}.json")
        _write_json(path, {"model": cfg.model_name, "dataset": cfg.name, "report": report.to_dict()})
        log.info("%s: %d records, %d T'_e violations", tag, report.n_records, report.n_violations_Tprime)
        written.append(path)
    return written


REPORT_COLUMNS = [
    "model", "dataset", "norm", "epsilon", "method", "That_e", "T_e_mean", "Tprime_e_mean",
    "pct_outside_Te", "That_c_deg", "T_c_deg_mean", "kendall_mean", "min_gap_r", "n_violations_Tprime",
    # extra columns
    "n_violations_Te", "n_violations_Tc", "n_Tc_invalid", "topk_mean", "n_samples", "n_records",
    "n_label_preserved",
]


def _csv_value(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else ""
    return str(v)


def cmd_report(cfg: RunConfig, files=None) -> Path:
    files = [Path(f) for f in files] if files else sorted(cfg.out.glob("campaign-*.json"))
    if not files:
        raise OSError(f"no campaign files in {cfg.out}; run 'attack' first")
    rows, summary, hist_rows = [], [], []
    bins = int(cfg.doc["report"]["bins"])
    for f in files:
        doc = json.loads(Path(f).read_text())
        rep = attack.CampaignReport.from_dict(doc["report"])
        row = {"model": doc.get("model", ""), "dataset": doc.get("dataset", ""), **rep.to_dict()}
        rows.append({k: row.get(k) for k in REPORT_COLUMNS})
        g = rep.gaps()
        entry = {"file": Path(f).name, **{k: row.get(k) for k in REPORT_COLUMNS},
                 "gaps": g.tolist(), "all_gaps_positive": bool(g.size and np.all(g > 0))}
        summary.append(entry)
        if g.size:
            attacked = [s for s in rep.samples if s.That_e is not None]
            counts, edges = metrics.gap_histogram([s.T_prime_e for s in attacked], [s.That_e for s in attacked], bins)
            for c, lo, hi in zip(counts, edges[:-1], edges[1:]):
                hist_rows.append([row["dataset"], row["model"], row["norm"], repr(float(row["epsilon"])),
                                  repr(float(lo)), repr(float(hi)), int(c)])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in rows:
        writer.writerow([_csv_value(r[k]) for k in REPORT_COLUMNS])
    path = cfg.path("report.csv")
    path.write_text(buf.getvalue())

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["dataset", "model", "norm", "epsilon", "bin_lo", "bin_hi", "count"])
    writer.writerows(hist_rows)
    cfg.path("gap_histogram.csv").write_text(buf.getvalue())
    _write_json(cfg.path("report.json"), {"campaigns": summary})
    log.info("report for %d campaign(s) in %s", len(rows), path)
    return path


def _eta_curve(model, cfg, Xs, ys, ids, G, Hs):
    out = []
    for eps in cfg.doc["validate"]["epsilons"]:
        etas = []
        for x, y, sid, H in zip(Xs, ys, ids, Hs):
            rng = np.random.default_rng([cfg.seed, int(sid), 7])
            delta = attack._to_box(x[None, :], eps * rng.choice([-1.0, 1.0], x.size)[None, :])[0]
            etas.append(bounds.eta(model, x, int(y), cfg.method, delta, H=H))
        g_norm = float(np.mean(np.linalg.norm(G, axis=1)))
        out.append({"epsilon": float(eps), "eta_mean": float(np.mean(etas)), "eta_max": float(np.max(etas)),
                    "g_norm_mean": g_norm, "ratio": float(np.mean(etas)) / g_norm if g_norm else None})
    return out


def cmd_validate(cfg: RunConfig) -> Path:
    model = _model(cfg)
    X, y = _dataset(cfg)
    _, (Xev, yev, ids) = _split(cfg, X, y)
    n = min(int(cfg.doc["validate"]["n_samples"]), len(Xev))
    if n == 0:
        raise ShapeError("validation needs at least one evaluation sample")
    Xs, ys, ids = Xev[:n], yev[:n], ids[:n]
    h = float(cfg.doc["validate"]["fd_step"])
    G = attrib.attributions(model, Xs, ys, cfg.method)
    Hs, dom, hess_res, jac_res = [], [], [], []
    for x, yy in zip(Xs, ys):
        yy = int(yy)
        H = attrib.attribution_jacobian(model, x, yy, cfg.method)
        Hs.append(H)
        dom.append(attrib.diag_dominance(H))
        hess = net.hessian_logit(model, x, yy)
        fd = central_jacobian(lambda t: net.grad_logit(model, t, yy), x, h)
        hess_res.append(float(np.linalg.norm(hess - fd) / max(np.linalg.norm(hess), 1e-300)))
        fdj = central_jacobian(lambda t: attrib.attributions(model, t, yy, cfg.method)[0], x, h)
        jac_res.append(float(np.linalg.norm(H - fdj) / max(np.linalg.norm(H), 1e-300)))
    diag = {
        "method": cfg.method.describe(), "n_samples": n, "sample_ids": [int(i) for i in ids],
        "eta_curve": _eta_curve(model, cfg, Xs, ys, ids, G, Hs),
        "diag_dominance": {"per_sample": dom, "mean": float(np.mean(dom)), "min": float(np.min(dom))},
        "hessian_fd_residual": {"per_sample": hess_res, "max": float(np.max(hess_res))},
        "jacobian_fd_residual": {"per_sample": jac_res, "max": float(np.max(jac_res))},
    }
    path = cfg.path("diagnostics.json")
    _write_json(path, diag)
    attrib.write_heatmap_csv(Hs[0], cfg.path("heatmap.csv"))
    log.info("diagnostics for %d samples in %s", n, path)
    return path


def cmd_pipeline(cfg: RunConfig) -> Path:
    cmd_gen_data(cfg)
    cmd_train(cfg)
    cmd_certify(cfg)
    cmd_attack(cfg)
    cmd_validate(cfg)
    return cmd_report(cfg)


# -- argument parsing -------------------------------------------------------------

def _global_options() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--seed", type=int, help="base seed for model init, training and attacks")
    p.add_argument("--workers", type=int, help="threads for certification and attacks")
    p.add_argument("--out", help="run directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _floats(text: str):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = _global_options()
    parser = argparse.ArgumentParser(prog="attrbound", parents=[common],
                                     description="Certified bounds on attribution deviations for softplus MLPs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", parents=[common], help="write the dataset CSV",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--kind", dest="dataset.kind", choices=["synthetic", "mnist"])
    p.add_argument("--n", dest="dataset.n", type=int)
    p.add_argument("--d", dest="dataset.d", type=int)
    p.add_argument("--classes", dest="dataset.classes", type=int)
    p.add_argument("--separation", dest="dataset.separation", type=float)
    p.add_argument("--sigma", dest="dataset.sigma", type=float)
    p.add_argument("--images", dest="dataset.images")
    p.add_argument("--labels", dest="dataset.labels")
    p.add_argument("--subset", dest="dataset.subset", type=int)
    p.add_argument("--downscale", dest="dataset.downscale", type=int)

    p = sub.add_parser("train", parents=[common], help="train the model", argument_default=argparse.SUPPRESS)
    p.add_argument("--epochs", dest="train.epochs", type=int)
    p.add_argument("--lr", dest="train.lr", type=float)
    p.add_argument("--batch-size", dest="train.batch_size", type=int)
    p.add_argument("--optimizer", dest="train.optimizer", choices=["sgd", "momentum"])
    p.add_argument("--beta", dest="model.beta", type=float)

    for name, helptext in (("certify", "write bound certificates"), ("attack", "run attack campaigns")):
        p = sub.add_parser(name, parents=[common], help=helptext, argument_default=argparse.SUPPRESS)
        p.add_argument("--norm", help="restrict to one norm (2, inf or p > 2)")
        p.add_argument("--eps", type=_floats, help="comma-separated epsilons for --norm")
        if name == "certify":
            p.add_argument("--method", dest="certify.method")
            p.add_argument("--steps", dest="certify.steps", type=int, help="IG path steps")
            p.add_argument("--no-label", dest="certify.label_constrained", action="store_false")
        else:
            p.add_argument("--restarts", dest="attack.restarts", type=int)
            p.add_argument("--attack-steps", dest="attack.steps", type=int)
            p.add_argument("--topk", dest="attack.topk", type=int)
            p.add_argument("--save-deltas", dest="attack.save_deltas", action="store_true")

    p = sub.add_parser("report", parents=[common], help="summarise campaigns", argument_default=argparse.SUPPRESS)
    p.add_argument("campaigns", nargs="*", help="campaign JSON files (default: all in the run directory)")

    p = sub.add_parser("validate", parents=[common], help="linearity and derivative diagnostics",
                       argument_default=argparse.SUPPRESS)
    p.add_argument("--eps", dest="validate.epsilons", type=_floats)
    p.add_argument("--n-samples", dest="validate.n_samples", type=int)

    sub.add_parser("pipeline", parents=[common], help="gen-data, train, certify, attack, validate, report",
                   argument_default=argparse.SUPPRESS)
    return parser


COMMANDS = {"gen-data": cmd_gen_data, "train": cmd_train, "certify": cmd_certify, "attack": cmd_attack,
            "validate": cmd_validate, "pipeline": cmd_pipeline}


def run(argv=None):
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    verbose = args.pop("verbose", False)
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, format="%(message)s")
    config_path = args.pop("config", None)
    campaigns = args.pop("campaigns", None)
    norm = args.pop("norm", None)
    eps = args.pop("eps", None)
    overrides = {k: v for k, v in args.items()}
    if norm is not None or eps is not None:
        base = load_config(config_path, overrides)
        if norm is None:
            raise ConfigError("--eps needs --norm")
        tag = bounds.norm_tag(norm)
        if eps is None:
            matches = [e for n_, e in base.targets if n_ == tag]
            if not matches:
                raise ConfigError(f"no epsilons configured for norm {norm!r}; pass --eps")
            eps = matches[0]
        overrides["certify.targets"] = [{"norm": tag, "epsilons": eps}]
    cfg = load_config(config_path, overrides)
    if command == "report":
        return cmd_report(cfg, campaigns)
    return COMMANDS[command](cfg)


def main(argv=None) -> int:
    try:
        run(argv)
    except tuple(EXIT_CODES) as exc:
        kind = next(k for k in EXIT_CODES if isinstance(exc, k))
        msg = " ".join(str(exc).split())
        print(f"error: {ERROR_KINDS[kind]}: {msg}", file=sys.stderr)
        return EXIT_CODES[kind]
    return 0


if __name__ == "__main__":
    sys.exit(main())
