"""Softmax cross-entropy on a linear head: probabilities, loss, gradients and a
plain (mini-batch) gradient-descent trainer."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergedError, ShapeError, UsageError
from .sampling import Stream
from .stats import as_labels
from .tensor_store import LinearClassifier

PROB_FLOOR = 1e-300
# stream ids kept apart from the synthetic-data streams (0..K+2)
INIT_STREAM = 2**32
BATCH_STREAM = 2**32 + 1
TRACE_HEADER = ["iter", "train_loss", "train_acc", "test_loss", "test_acc", "loss_ratio"]


def _logits(c: LinearClassifier, x) -> np.ndarray:
    return c.scores(x)


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    np.exp(z, out=z)
    z /= z.sum(axis=1, keepdims=True)
    return z


def softmax_probs(c: LinearClassifier, x) -> np.ndarray:
    return softmax(_logits(c, x))


def _mean_nll(probs: np.ndarray, labels: np.ndarray) -> float:
    picked = probs[np.arange(labels.size), labels]
    return float(-np.mean(np.log(np.maximum(picked, PROB_FLOOR))))


def _decay_term(c: LinearClassifier, weight_decay: float) -> float:
    if weight_decay == 0:
        return 0.0
    return 0.5 * weight_decay * (float(np.sum(c.weights**2)) + float(np.sum(c.bias**2)))


def cross_entropy(c: LinearClassifier, x, y, weight_decay: float = 0.0) -> float:
    """Mean ``-log p(y_i | x_i)`` plus ``weight_decay/2 (||W||^2 + ||b||^2)``."""
    labels, _ = as_labels(y, c.num_classes)
    return _mean_nll(softmax_probs(c, x), labels) + _decay_term(c, weight_decay)


def gradients(c: LinearClassifier, x, y, weight_decay: float = 0.0):
    """Analytic ``(dW, db)`` of :func:`cross_entropy`."""
    labels, _ = as_labels(y, c.num_classes)
    x = np.asarray(x, dtype=np.float64)
    g = softmax_probs(c, x)
    g[np.arange(labels.size), labels] -= 1.0
    g /= labels.size
    return g.T @ x + weight_decay * c.weights, g.sum(axis=0) + weight_decay * c.bias


def evaluate(c: LinearClassifier, x, y) -> tuple[float, float]:
    """Top-1 accuracy (ties to the lowest index) and mean cross-entropy without decay."""
    labels, _ = as_labels(y, c.num_classes)
    probs = softmax_probs(c, x)
    accuracy = float(np.mean(np.argmax(probs, axis=1) == labels))
    return accuracy, _mean_nll(probs, labels)


def random_init(num_classes: int, dim: int, stddev="msra", seed: int = 0) -> LinearClassifier:
    """Gaussian weights (std ``sqrt(2/d)`` for ``"msra"``) and zero bias."""
    std = math.sqrt(2.0 / dim) if stddev == "msra" else float(stddev)
    w = std * Stream(seed, INIT_STREAM).normal((num_classes, dim))
    return LinearClassifier(w, np.zeros(num_classes), {"source": "random", "calibration": None})


def lipschitz_bound(x, weight_decay: float = 0.0) -> float:
    """Upper bound on the gradient Lipschitz constant of the mean softmax loss.

    The softmax Jacobian has spectral norm <= 1/2, so the Hessian is bounded
    by ``1/2 * lambda_max(E[x~ x~^T]) + decay`` with ``x~ = (x, 1)``.
    """
    x = np.asarray(x, dtype=np.float64)
    xa = np.hstack([x, np.ones((x.shape[0], 1))])
    second = xa.T @ xa / x.shape[0]
    return 0.5 * float(np.linalg.eigvalsh(second)[-1]) + weight_decay


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    iterations: int = 1000
    batch_size: int | None = None  # None: full batch
    weight_decay: float = 0.0005
    seed: int = 0
    log_every: int = 1

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise UsageError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.iterations < 0:
            raise UsageError(f"iterations must be >= 0, got {self.iterations}")
        if self.batch_size is not None and self.batch_size < 1:
            raise UsageError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.weight_decay < 0:
            raise UsageError("weight_decay must be >= 0")
        if self.log_every < 1:
            raise UsageError("log_every must be >= 1")


@dataclass
class TraceRecord:
    iteration: int
    train_loss: float
    train_accuracy: float
    test_loss: float | None = None
    test_accuracy: float | None = None

    @property
    def loss_ratio(self) -> float | None:
        if self.test_loss is None or self.test_loss == 0:
            return None
        return self.train_loss / self.test_loss


@dataclass
class TrainTrace:
    records: list[TraceRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def iterations_to(self, threshold: float) -> int | None:
        """First logged iteration whose training loss is at or below ``threshold``."""
        for r in self.records:
            if r.train_loss <= threshold:
                return r.iteration
        return None

    def write_csv(self, path) -> None:
        def fmt(v):
            return "" if v is None else repr(float(v))

        with open(path, "w", newline="") as fh:
            out = csv.writer(fh, lineterminator="\n")
            out.writerow(TRACE_HEADER)
            for r in self.records:
                out.writerow(
                    [r.iteration, fmt(r.train_loss), fmt(r.train_accuracy),
                     fmt(r.test_loss), fmt(r.test_accuracy), fmt(r.loss_ratio)]
                )

    @classmethod
    def read_csv(cls, path) -> "TrainTrace":
        def num(v):
            return None if v == "" else float(v)

        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        return cls([
            TraceRecord(int(r["iter"]), float(r["train_loss"]), float(r["train_acc"]),
                        num(r["test_loss"]), num(r["test_acc"]))
            for r in rows
        ])


def train(init: LinearClassifier, x_train, y_train, x_test=None, y_test=None,
          cfg: TrainConfig | None = None) -> tuple[LinearClassifier, TrainTrace]:
    """Gradient descent on the regularized cross-entropy.

    Records are taken before the update at every ``log_every``-th iteration
    (iteration ``T`` means after ``T`` updates), so a run of ``T`` iterations
    logs ``T // log_every + 1`` points. The logged training loss includes
    the decay term and is always over the full training set; mini-batches are
    drawn from a seeded Fisher-Yates permutation per epoch.
    """
    cfg = cfg or TrainConfig()
    labels, _ = as_labels(y_train, init.num_classes)
    x = np.ascontiguousarray(x_train, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != init.dim or x.shape[0] != labels.size:
        raise ShapeError(f"training data shape {x.shape} incompatible with model ({init.dim} dims)")
    has_test = x_test is not None and y_test is not None
    if has_test:
        test_labels, _ = as_labels(y_test, init.num_classes)
        xt = np.asarray(x_test, dtype=np.float64)
        if xt.ndim != 2 or xt.shape[1] != init.dim:
            raise ShapeError("test features do not match the model dimension")

    w = init.weights.copy()
    b = init.bias.copy()
    n = labels.size
    lr = cfg.learning_rate
    decay = cfg.weight_decay
    full = cfg.batch_size is None or cfg.batch_size >= n
    rows = np.arange(n)
    stream = Stream(cfg.seed, BATCH_STREAM)
    order: np.ndarray = np.empty(0, dtype=np.int64)
    cursor = 0
    trace = TrainTrace()

    def full_pass(w, b):
        probs = softmax(x @ w.T + b)
        loss = _mean_nll(probs, labels)
        if decay:
            loss += 0.5 * decay * (float(np.sum(w * w)) + float(np.sum(b * b)))
        acc = float(np.mean(np.argmax(probs, axis=1) == labels))
        return probs, loss, acc

    # overflow is caught below and reported as DivergedError
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(cfg.iterations + 1):
            log_now = it % cfg.log_every == 0
            if full or log_now:
                probs, loss, acc = full_pass(w, b)
                if not math.isfinite(loss):
                    raise DivergedError(it, lr)
            if log_now:
                rec = TraceRecord(it, loss, acc)
                if has_test:
                    tp = softmax(xt @ w.T + b)
                    rec.test_loss = _mean_nll(tp, test_labels)
                    rec.test_accuracy = float(np.mean(np.argmax(tp, axis=1) == test_labels))
                trace.records.append(rec)
            if it == cfg.iterations:
                break
            if full:
                g = probs.copy()
                g[rows, labels] -= 1.0
                g /= n
                xb = x
            else:
                if cursor + cfg.batch_size > order.size:
                    order = stream.permutation(n)
                    cursor = 0
                idx = order[cursor:cursor + cfg.batch_size]
                cursor += cfg.batch_size
                xb = x[idx]
                g = softmax(xb @ w.T + b)
                g[np.arange(idx.size), labels[idx]] -= 1.0
                g /= idx.size
            gw = g.T @ xb
            gb = g.sum(axis=0)
            if decay:
                gw += decay * w
                gb += decay * b
            w -= lr * gw
            b -= lr * gb
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise DivergedError(it + 1, lr)

    meta = dict(init.metadata)
    meta.update({"source": "trained", "init_source": init.metadata.get("source"),
                 "learning_rate": lr, "iterations": cfg.iterations,
                 "weight_decay": decay, "seed": cfg.seed})
    return LinearClassifier(w, b, meta), trace


def train_with_backoff(init, x_train, y_train, x_test=None, y_test=None,
                       cfg: TrainConfig | None = None, max_halvings: int = 20):
    """Run :func:`train`, halving the learning rate after every divergence.

    For this search a run also counts as diverged when its last logged
    training loss is above its first one, which catches rates that blow up
    too slowly to overflow within the iteration budget.
    """
    cfg = cfg or TrainConfig()
    for _ in range(max_halvings + 1):
        try:
            model, trace = train(init, x_train, y_train, x_test, y_test, cfg)
            if trace.records[-1].train_loss <= trace.records[0].train_loss:
                return model, trace, cfg.learning_rate
        except DivergedError:
            pass
        cfg = TrainConfig(cfg.learning_rate / 2, cfg.iterations, cfg.batch_size,
                          cfg.weight_decay, cfg.seed, cfg.log_every)
    raise DivergedError(-1, cfg.learning_rate)
