import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from attrbound import cli, data, net

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MNIST_IMAGES = ROOT / "tests" / "data" / "mnist5k-images-idx3-ubyte.gz"
MNIST_LABELS = ROOT / "tests" / "data" / "mnist5k-labels-idx1-ubyte.gz"


def random_model(seed, widths=(6, 8, 5, 3), beta=2.0, scale=1.0):
    rng = np.random.default_rng(seed)
    ws, bs = [], []
    for a, b in zip(widths[:-1], widths[1:]):
        ws.append(rng.standard_normal((b, a)) * scale / np.sqrt(a))
        bs.append(rng.standard_normal(b) * 0.3)
    return net.Model(tuple(ws), tuple(bs), beta)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def _train_from_config(name, out):
    overrides = {"out": str(out)}
    if name == "mnist":
        overrides["dataset.images"] = str(MNIST_IMAGES)
        overrides["dataset.labels"] = str(MNIST_LABELS)
    cfg = cli.load_config(ROOT / "configs" / f"{name}.json", overrides)
    cli.cmd_gen_data(cfg)
    cli.cmd_train(cfg)
    X, y = data.load_csv(cfg.path("dataset.csv"))
    (Xtr, ytr), (Xev, yev, ids) = cli._split(cfg, X, y)
    return cfg, net.load_model(cfg.path("model.json")), Xtr, ytr, Xev, yev


@pytest.fixture(scope="session")
def blobs(tmp_path_factory):
    """The trained toy model of configs/blobs.json with its train/eval split."""
    return _train_from_config("blobs", tmp_path_factory.mktemp("blobs"))


@pytest.fixture(scope="session")
def mnist(tmp_path_factory):
    """The trained downscaled-MNIST model of configs/mnist.json with its split."""
    return _train_from_config("mnist", tmp_path_factory.mktemp("mnist"))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
