"""Class means and pooled within-class covariance."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyClassError, ShapeError
from .numerics import column_sums, scatter, sym_eigen
from .tensor_store import LabelVector


@dataclass(frozen=True)
class ClassStatistics:
    means: np.ndarray  # K x d
    counts: np.ndarray  # K
    pooled_cov: np.ndarray  # d x d, normalized by 1/N
    notes: dict = field(default_factory=dict)

    @property
    def num_classes(self) -> int:
        return self.means.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())


def as_labels(y, num_classes: int | None = None) -> tuple[np.ndarray, int]:
    """Normalize a LabelVector or integer array to ``(labels, K)``."""
    if isinstance(y, LabelVector):
        return y.labels, y.num_classes if num_classes is None else num_classes
    labels = np.asarray(y).ravel()
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == np.round(labels)):
            raise ShapeError("labels must be integers")
    labels = labels.astype(np.int64)
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if labels.size else 0
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        raise ShapeError(f"labels must lie in [0, {num_classes})")
    return labels, int(num_classes)


def _check_pair(x, labels) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"features must be 2-D, got shape {x.shape}")
    if x.shape[0] != labels.size:
        raise ShapeError(f"{x.shape[0]} feature rows but {labels.size} labels")
    return x


def class_means(x, y, num_classes: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    labels, k = as_labels(y, num_classes)
    x = _check_pair(x, labels)
    counts = np.bincount(labels, minlength=k)
    for c in range(k):
        if counts[c] == 0:
            raise EmptyClassError(c)
    means = np.empty((k, x.shape[1]))
    for c in range(k):
        means[c] = column_sums(x[labels == c]) / counts[c]
    return means, counts


def fit_statistics(x, y, num_classes: int | None = None) -> ClassStatistics:
    """Two-pass estimate: class means first, then the scatter of the centered rows.

    The pooled covariance is the maximum-likelihood ``(1/N) sum_i (x_i - mu_{y_i})(...)^T``,
    so classes are weighted by their sample counts. The centered rows span at
    most ``N - K`` dimensions; when that is below ``d`` the covariance is
    singular, which is reported as a warning (and in ``notes``) but not an
    error, since the ridge in the solver handles it.
    """
    labels, k = as_labels(y, num_classes)
    x = _check_pair(x, labels)
    means, counts = class_means(x, labels, k)
    n = labels.size
    notes = {}
    if n - k < x.shape[1]:
        msg = f"N-K={n - k} < d={x.shape[1]}: pooled covariance is rank-deficient"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes["warning"] = msg
    centered = x - means[labels]
    cov = scatter(centered) / n
    return ClassStatistics(means, counts, cov, notes)


def centered_pca(s: ClassStatistics, out_dim: int) -> tuple[np.ndarray, float]:
    """Top ``out_dim`` eigenvectors of the pooled covariance and their variance share."""
    if not 1 <= out_dim <= s.dim:
        raise ShapeError(f"out_dim must be in [1, {s.dim}], got {out_dim}")
    values, vectors = sym_eigen(s.pooled_cov)
    total = values.clip(min=0.0).sum()
    ratio = float(values[:out_dim].clip(min=0.0).sum() / total) if total > 0 else 1.0
    return vectors[:, :out_dim], ratio


def project_centered(x, y, s: ClassStatistics, out_dim: int) -> np.ndarray:
    """Subtract each row's class mean, then project onto the leading principal axes."""
    labels, _ = as_labels(y, s.num_classes)
    x = _check_pair(x, labels)
    if x.shape[1] != s.dim:
        raise ShapeError(f"features have {x.shape[1]} columns, statistics have {s.dim}")
    basis, _ = centered_pca(s, out_dim)
    return (x - s.means[labels]) @ basis
