import numpy as np
import pytest
from hypothesis import given, strategies as st

from attrbound import attrib, net
from attrbound.attrib import AttributionMethod
from attrbound.errors import DomainError, ShapeError
from attrbound.numkit import central_jacobian
from conftest import random_model

METHODS = [AttributionMethod("saliency"), AttributionMethod("input_grad"), AttributionMethod("ig", 16)]


def linear_model(w):
    w = np.asarray(w, dtype=float)
    return net.Model((w[None, :],), (np.array([0.7]),))


def test_linear_model_attributions():
    w = np.array([1.0, -2.0, 0.5])
    x = np.array([0.3, 0.1, 0.9])
    m = linear_model(w)
    assert np.array_equal(attrib.attribute(m, x, 0, AttributionMethod("sm")).values, w)
    for steps in (1, 7, 64):
        ig = attrib.attribute(m, x, 0, AttributionMethod("ig", steps))
        assert np.allclose(ig.values, x * w, rtol=1e-15)
        assert attrib.completeness_residual(m, x, 0, ig) <= 1e-12
    assert np.allclose(attrib.attribution_jacobian(m, x, 0, AttributionMethod("ig", 9)), np.diag(w))
    assert not attrib.attribution_jacobian(m, x, 0, AttributionMethod("sm")).any()


def test_input_grad_at_origin_is_zero():
    m = random_model(0)
    assert not attrib.attribute(m, np.zeros(6), 1, AttributionMethod("input_grad")).values.any()


def test_ig_at_baseline_is_zero():
    m = random_model(1)
    meth = AttributionMethod("ig", 32)
    ig = attrib.attribute(m, np.zeros(6), 2, meth)
    assert not ig.values.any()
    assert attrib.completeness_residual(m, np.zeros(6), 2, ig) == 0.0
    H = attrib.attribution_jacobian(m, np.zeros(6), 2, meth)
    assert not (H - np.diag(np.diag(H))).any()


def test_general_baseline():
    m = random_model(2)
    a = np.full(6, 0.5)
    x = np.linspace(0, 1, 6)
    meth = AttributionMethod("ig", 512, baseline=a)
    ig = attrib.attribute(m, x, 0, meth)
    gap = net.forward(m, x)[0] - net.forward(m, a)[0]
    assert attrib.completeness_residual(m, x, 0, ig) <= 1e-2 * abs(gap)
    with pytest.raises(ShapeError):
        attrib.attribute(m, x, 0, AttributionMethod("ig", 4, baseline=np.zeros(3)))


def test_method_validation():
    with pytest.raises(DomainError):
        AttributionMethod("ig", 0)
    with pytest.raises(DomainError):
        AttributionMethod("lrp")
    with pytest.raises(DomainError):
        attrib.completeness_residual(random_model(0), np.zeros(6), 0,
                                     attrib.attribute(random_model(0), np.zeros(6), 0, AttributionMethod("sm")))
    assert AttributionMethod("IG", 8).describe() == "ig8"


def test_batched_matches_single(rng):
    m = random_model(3)
    X = rng.random((5, 6))
    ys = np.array([0, 1, 2, 0, 1])
    for meth in METHODS:
        batch = attrib.attributions(m, X, ys, meth)
        for i in range(5):
            assert np.allclose(batch[i], attrib.attribute(m, X[i], ys[i], meth).values, rtol=1e-13, atol=1e-15)


def test_ig_riemann_sum_by_hand():
    m = random_model(4)
    x = np.linspace(0.1, 0.9, 6)
    ref = sum(net.grad_logit(m, k / 5 * x, 1) for k in range(1, 6)) / 5 * x
    assert np.allclose(attrib.attribute(m, x, 1, AttributionMethod("ig", 5)).values, ref, rtol=1e-13)


@pytest.mark.parametrize("meth", METHODS, ids=lambda m: m.tag)
@pytest.mark.parametrize("seed", range(5))
def test_jacobian_matches_finite_differences(meth, seed):
    m = random_model(seed, (8, 12, 3))
    x = np.random.default_rng(seed).random(8)
    y = seed % 3
    H = attrib.attribution_jacobian(m, x, y, meth)
    fd = central_jacobian(lambda t: attrib.attribute(m, t, y, meth).values, x, 1e-4)
    assert np.linalg.norm(H - fd) <= 1e-4 * np.linalg.norm(H)


@pytest.mark.parametrize("meth", METHODS, ids=lambda m: m.tag)
def test_vjp_matches_dense_jacobian(meth, rng):
    m = random_model(6, (8, 10, 4))
    X = rng.random((4, 8))
    S = rng.standard_normal((4, 8))
    ys = np.array([3, 0, 1, 2])
    V = attrib.attribution_vjp(m, X, ys, S, meth)
    for i in range(4):
        H = attrib.attribution_jacobian(m, X[i], ys[i], meth)
        assert np.allclose(V[i], H.T @ S[i], rtol=1e-10, atol=1e-12)


def test_high_resolution_riemann_oracle(blobs):
    _, m, _, _, Xev, yev = blobs
    for x, y in zip(Xev[:5], yev[:5]):
        g = attrib.attribute(m, x, y, AttributionMethod("ig", 256)).values
        ref = attrib.attribute(m, x, y, AttributionMethod("ig", 10_000)).values
        assert np.linalg.norm(g - ref) <= 1e-3 * np.linalg.norm(g)


def test_completeness_residual_shrinks_with_steps(blobs):
    _, m, _, _, Xev, yev = blobs
    ms = (16, 32, 64, 128, 256, 512)
    res = np.array([[attrib.completeness_residual(m, x, y, attrib.attribute(m, x, y, AttributionMethod("ig", s)))
                     for s in ms] for x, y in zip(Xev[:20], yev[:20])])
    worse = (res[:, 1:] > res[:, :-1]).sum()
    assert worse <= 0.05 * res[:, 1:].size
    assert np.all(np.diff(np.median(res, axis=0)) < 0)


def test_diag_dominance_examples():
    assert attrib.diag_dominance(np.eye(5)) == 1.0
    assert attrib.diag_dominance(np.ones((4, 4))) == 0.25
    assert attrib.diag_dominance(np.zeros((3, 3))) == 1.0
    with pytest.raises(ShapeError):
        attrib.diag_dominance(np.ones((2, 3)))


@given(st.integers(0, 10_000))
def test_diag_dominance_in_unit_interval(seed):
    H = np.random.default_rng(seed).standard_normal((6, 6))
    assert 0.0 <= attrib.diag_dominance(H) <= 1.0


def _mnist_dd_scores(mnist, n=5):
    _, m, _, _, Xev, yev = mnist
    meth = AttributionMethod("ig", 128)
    return [attrib.diag_dominance(attrib.attribution_jacobian(m, x, y, meth)) for x, y in zip(Xev[:n], yev[:n])]


def test_ig_jacobian_concentrates_on_diagonal_on_mnist(mnist):
    # 196 diagonal entries out of 196² would carry ~0.5% of the mass if spread evenly
    assert min(_mnist_dd_scores(mnist)) > 0.1


@pytest.mark.xfail(strict=True, reason="the shipped single-hidden-layer model puts 0.2-0.5 of the "
                   "Jacobian mass on the diagonal, not a majority")
def test_ig_jacobian_is_diagonal_dominant_on_mnist(mnist):
    assert min(_mnist_dd_scores(mnist)) > 0.5


def test_singular_values_independent_of_orientation(rng):
    m = random_model(8, (8, 10, 3))
    H = attrib.attribution_jacobian(m, rng.random(8), 1, AttributionMethod("ig", 16))
    assert np.allclose(np.linalg.svd(H, compute_uv=False), np.linalg.svd(H.T, compute_uv=False))


def test_heatmap_export(tmp_path):
    H = np.array([[2.0, -1.0], [0.0, -4.0]])
    path = tmp_path / "h.csv"
    attrib.write_heatmap_csv(H, path)
    grid = np.loadtxt(path, delimiter=",")
    assert np.array_equal(grid, [[0.5, 0.25], [0.0, 1.0]])
