import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgcinit.errors import DivergedError, UsageError
from rgcinit.logreg import (
    TrainConfig,
    TrainTrace,
    cross_entropy,
    evaluate,
    gradients,
    lipschitz_bound,
    random_init,
    softmax,
    train,
    train_with_backoff,
)
from rgcinit.tensor_store import LinearClassifier


def numeric_gradient(c, x, y, decay, h=1e-6):
    gw = np.zeros_like(c.weights)
    gb = np.zeros_like(c.bias)
    for idx in np.ndindex(*c.weights.shape):
        up, down = c.weights.copy(), c.weights.copy()
        up[idx] += h
        down[idx] -= h
        gw[idx] = (cross_entropy(LinearClassifier(up, c.bias), x, y, decay)
                   - cross_entropy(LinearClassifier(down, c.bias), x, y, decay)) / (2 * h)
    for k in range(c.bias.size):
        up, down = c.bias.copy(), c.bias.copy()
        up[k] += h
        down[k] -= h
        gb[k] = (cross_entropy(LinearClassifier(c.weights, up), x, y, decay)
                 - cross_entropy(LinearClassifier(c.weights, down), x, y, decay)) / (2 * h)
    return gw, gb


def test_softmax_example():
    p = softmax(np.array([[math.log(3.0), 0.0]]))
    assert np.allclose(p, [[0.75, 0.25]], rtol=1e-15)


def test_softmax_large_logits_stay_finite():
    p = softmax(np.array([[1000.0, 0.0], [-1000.0, 1000.0]]))
    assert np.all(np.isfinite(p))
    assert np.allclose(p, [[1.0, 0.0], [0.0, 1.0]])


def test_uniform_loss_is_log_k():
    c = LinearClassifier(np.zeros((4, 3)), np.zeros(4))
    x = np.random.default_rng(0).standard_normal((10, 3))
    assert cross_entropy(c, x, np.arange(10) % 4) == pytest.approx(math.log(4), rel=1e-15)


def test_decay_term():
    c = LinearClassifier([[1.0, 0.0], [0.0, 0.0]], [0.0, 0.0])
    x = np.zeros((2, 2))
    base = cross_entropy(c, x, [0, 1])
    assert cross_entropy(c, x, [0, 1], 0.2) - base == pytest.approx(0.1, rel=1e-14)


def test_evaluate():
    c = LinearClassifier([[1.0], [-1.0]], [0.0, 0.0])
    acc, loss = evaluate(c, [[2.0], [-2.0], [1.0]], [0, 1, 1])
    assert acc == pytest.approx(2 / 3)
    assert loss > 0


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.integers(1, 4), st.integers(1, 6))
def test_gradient_matches_finite_differences(seed, k, d, n):
    rng = np.random.default_rng(seed)
    c = LinearClassifier(rng.standard_normal((k, d)), rng.standard_normal(k))
    x = rng.standard_normal((n, d))
    y = rng.integers(0, k, n)
    decay = float(rng.uniform(0, 0.1))
    gw, gb = gradients(c, x, y, decay)
    nw, nb = numeric_gradient(c, x, y, decay)
    analytic = np.concatenate([gw.ravel(), gb])
    numeric = np.concatenate([nw.ravel(), nb])
    assert np.linalg.norm(analytic - numeric) <= 1e-5 * max(np.linalg.norm(numeric), 1e-3)


def small_problem(seed=0):
    rng = np.random.default_rng(seed)
    y = np.arange(90) % 3
    centers = rng.standard_normal((3, 4))
    return centers[y] + rng.standard_normal((90, 4)), y


def test_full_batch_loss_decreases_at_safe_rate():
    x, y = small_problem()
    cfg = TrainConfig(1.0 / lipschitz_bound(x, 1e-3), 200, None, 1e-3, 0, 1)
    _, trace = train(random_init(3, 4, seed=1), x, y, cfg=cfg)
    losses = trace.column("train_loss")
    assert np.all(np.diff(losses) <= 1e-12)


def test_zero_iterations_returns_init():
    x, y = small_problem()
    init = random_init(3, 4, seed=2)
    model, trace = train(init, x, y, cfg=TrainConfig(0.1, 0))
    assert np.array_equal(model.weights, init.weights) and len(trace) == 1


def test_trace_row_count():
    x, y = small_problem()
    _, trace = train(random_init(3, 4), x, y, cfg=TrainConfig(0.1, 25, log_every=10))
    assert [r.iteration for r in trace] == [0, 10, 20]


def test_minibatch_is_seeded():
    x, y = small_problem()
    cfg = TrainConfig(0.1, 30, 16, 1e-3, 5)
    a, _ = train(random_init(3, 4), x, y, cfg=cfg)
    b, _ = train(random_init(3, 4), x, y, cfg=cfg)
    c, _ = train(random_init(3, 4), x, y, cfg=TrainConfig(0.1, 30, 16, 1e-3, 6))
    assert np.array_equal(a.weights, b.weights)
    assert not np.array_equal(a.weights, c.weights)


def test_convex_problem_has_one_minimum():
    x, y = small_problem(3)
    decay = 0.1
    cfg = TrainConfig(1.0 / lipschitz_bound(x, decay), 3000, None, decay, 0, 3000)
    a, ta = train(random_init(3, 4, seed=1), x, y, cfg=cfg)
    b, tb = train(LinearClassifier(np.zeros((3, 4)), np.zeros(3)), x, y, cfg=cfg)
    assert abs(ta.records[-1].train_loss - tb.records[-1].train_loss) <= 1e-10
    assert np.allclose(a.weights, b.weights, atol=1e-5)


def test_divergence_detected_and_backoff_recovers():
    x, y = small_problem()
    cfg = TrainConfig(1e3, 200, None, 1.0)
    with pytest.raises(DivergedError):
        train(random_init(3, 4), x, y, cfg=cfg)
    model, trace, lr = train_with_backoff(random_init(3, 4), x, y, cfg=cfg)
    assert lr < 1e3 and np.all(np.isfinite(model.weights))
    assert trace.records[-1].train_loss < trace.records[0].train_loss


def test_random_init_determinism_and_scale():
    a = random_init(50, 400, seed=3)
    assert np.array_equal(a.weights, random_init(50, 400, seed=3).weights)
    assert not np.array_equal(a.weights, random_init(50, 400, seed=4).weights)
    assert np.array_equal(a.bias, np.zeros(50))
    assert abs(a.weights.std() - math.sqrt(2 / 400)) < 0.002


def test_config_validation():
    with pytest.raises(UsageError):
        TrainConfig(0.0)
    with pytest.raises(UsageError):
        TrainConfig(0.1, -1)
    with pytest.raises(UsageError):
        TrainConfig(0.1, 10, 0)


def test_trace_csv_round_trip(tmp_path):
    x, y = small_problem()
    _, trace = train(random_init(3, 4), x, y, x[:10], y[:10], TrainConfig(0.1, 5))
    trace.write_csv(tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "iter,train_loss,train_acc,test_loss,test_acc,loss_ratio"
    assert len(lines) == 7
    back = TrainTrace.read_csv(tmp_path / "t.csv")
    assert back.records == trace.records


def test_trace_without_test_split_has_empty_cells(tmp_path):
    x, y = small_problem()
    _, trace = train(random_init(3, 4), x, y, cfg=TrainConfig(0.1, 1))
    trace.write_csv(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text().splitlines()[1].endswith(",,,")
