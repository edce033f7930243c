import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgcinit.errors import NotPositiveDefinite, ShapeError, UsageError
from rgcinit.rgc import RgcConfig, fit_ncc, fit_rgc, predict
from rgcinit.stats import ClassStatistics, fit_statistics
from rgcinit.tensor_store import LinearClassifier


def stats(means, cov, counts=None):
    means = np.asarray(means, dtype=float)
    counts = np.ones(len(means), dtype=int) * 10 if counts is None else np.asarray(counts)
    return ClassStatistics(means, counts, np.asarray(cov, dtype=float))


def random_stats(rng, k, d):
    a = rng.standard_normal((d, d))
    cov = a @ a.T / d + 0.05 * np.eye(d)
    cov = 0.5 * (cov + cov.T)
    return stats(rng.standard_normal((k, d)), cov)


def test_hand_example():
    s = stats([[1.0, 0.0], [-1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]])
    c = fit_rgc(s, RgcConfig(0.1))
    # oracle: explicit inverse of diag(0.1, 1.1)
    inv = np.linalg.inv(np.array([[0.1, 0.0], [0.0, 1.1]]))
    expected_w = (inv @ s.means.T).T
    assert np.allclose(c.weights, expected_w, rtol=1e-14, atol=0)
    assert np.allclose(c.weights, [[10.0, 0.0], [-10.0, 0.0]], rtol=1e-14)
    assert np.allclose(c.bias, [-5.0, -5.0], rtol=1e-14)
    assert c.metadata["source"] == "rgc" and c.metadata["epsilon"] == 0.1


def test_identity_covariance_matches_ncc():
    rng = np.random.default_rng(0)
    s = stats(rng.standard_normal((3, 4)), np.eye(4))
    r = fit_rgc(s, RgcConfig(0.0))
    n = fit_ncc(s)
    assert np.array_equal(r.weights, s.means)
    assert np.allclose(r.bias, -0.5 * np.sum(s.means**2, axis=1), rtol=1e-15)
    x = rng.standard_normal((50, 4))
    assert np.array_equal(predict(r, x), predict(n, x))


def test_zero_means_tie_to_class_zero():
    s = stats(np.zeros((3, 2)), np.eye(2))
    c = fit_rgc(s)
    assert np.array_equal(c.weights, np.zeros((3, 2))) and np.array_equal(c.bias, np.zeros(3))
    assert predict(c, np.random.default_rng(1).standard_normal((5, 2))).tolist() == [0] * 5


def test_zero_epsilon_singular_covariance():
    s = stats([[1.0, 0.0], [-1.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]])
    with pytest.raises(NotPositiveDefinite, match="epsilon > 0"):
        fit_rgc(s, RgcConfig(0.0))


def test_config_validation():
    with pytest.raises(UsageError):
        RgcConfig(-1.0)
    with pytest.raises(UsageError):
        RgcConfig(0.1, "bogus")


def test_relative_epsilon():
    s = stats([[1.0, 0.0], [-1.0, 0.0]], np.diag([2.0, 4.0]))
    c = fit_rgc(s, RgcConfig(0.5, "relative"))
    assert c.metadata["epsilon"] == 0.5 * 3.0
    assert np.allclose(c.weights[0], [1.0 / 3.5, 0.0], rtol=1e-15)


def test_ncc_examples():
    s = stats([[1.0, 0.0], [-1.0, 0.0]], np.eye(2))
    c = fit_ncc(s)
    # sqrt(0.25 + 9) < sqrt(2.25 + 9)
    assert predict(c, [[0.5, 3.0]]).tolist() == [0]
    assert predict(c, [[0.0, 7.0], [0.0, -2.0]]).tolist() == [0, 0]
    one = fit_ncc(stats([[2.0, 2.0]], np.eye(2)))
    assert predict(one, [[100.0, -3.0], [0.0, 0.0]]).tolist() == [0, 0]


def test_predict_scores_example():
    c = LinearClassifier([[10.0, 0.0], [-10.0, 0.0]], [-5.0, -5.0])
    assert np.allclose(c.scores([[0.3, 0.0]]), [[-2.0, -8.0]])
    assert predict(c, [[0.3, 0.0]]).tolist() == [0]


def test_predict_dim_mismatch():
    c = LinearClassifier(np.eye(2), np.zeros(2))
    with pytest.raises(ShapeError):
        predict(c, np.ones((3, 3)))


def test_class_independent_shift_keeps_argmax():
    rng = np.random.default_rng(2)
    c = LinearClassifier(rng.standard_normal((4, 3)), rng.standard_normal(4))
    x = rng.standard_normal((200, 3))
    shifted = LinearClassifier(c.weights + rng.standard_normal(3), c.bias + 3.7)
    scores = np.sort(c.scores(x), axis=1)
    clear = scores[:, -1] - scores[:, -2] > 1e-9
    assert np.array_equal(predict(c, x)[clear], predict(shifted, x)[clear])


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 5), st.integers(1, 8))
def test_residual(seed, k, d):
    rng = np.random.default_rng(seed)
    s = random_stats(rng, k, d)
    c = fit_rgc(s, RgcConfig(0.1))
    a = s.pooled_cov + 0.1 * np.eye(d)
    for w, mu in zip(c.weights, s.means):
        assert np.linalg.norm(a @ w - mu) <= 1e-9 * np.linalg.norm(mu)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_shrinkage(seed):
    rng = np.random.default_rng(seed)
    s = random_stats(rng, 3, 6)
    norms = [np.linalg.norm(fit_rgc(s, RgcConfig(e)).weights, axis=1) for e in (0.01, 0.1, 1, 10)]
    for before, after in zip(norms, norms[1:]):
        assert np.all(after <= before * (1 + 1e-12))


def test_ncc_limit_property():
    for seed in range(10):
        rng = np.random.default_rng(seed)
        s = random_stats(rng, 4, 5)
        eps = 1e6 * np.trace(s.pooled_cov) / 5
        r = fit_rgc(s, RgcConfig(eps))
        n = fit_ncc(s)
        x = rng.standard_normal((500, 5)) * 2
        ns = np.sort(n.scores(x), axis=1)
        clear = ns[:, -1] - ns[:, -2] > 1e-6
        assert np.array_equal(predict(r, x)[clear], predict(n, x)[clear])


def test_fit_uses_no_class_frequencies():
    rng = np.random.default_rng(3)
    x = rng.standard_normal((60, 3))
    y = np.arange(60) % 3
    s = fit_statistics(x, y)
    skewed = ClassStatistics(s.means, np.array([1, 50, 9]), s.pooled_cov)
    assert np.array_equal(fit_rgc(s).weights, fit_rgc(skewed).weights)
    assert np.array_equal(fit_rgc(s).bias, fit_rgc(skewed).bias)
