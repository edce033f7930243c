"""Correlation matrix distance (CMD) between class covariances.

``cmd(R1, R2) = 1 - tr(R1 R2) / (||R1||_F ||R2||_F)``: 0 for proportional
matrices, 1 for trace-orthogonal ones. Applied, as in the covariance study it
comes from, directly to covariance matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, ShapeError, ValidationError
from .numerics import as_symmetric, scatter, stable_sum, symmetrize
from .stats import as_labels, centered_pca, fit_statistics
from .tensor_store import read_document, write_document

SLACK = 1e-12


def cmd_distance(r1, r2) -> float:
    r1 = as_symmetric(r1)
    r2 = as_symmetric(r2)
    if r1.shape != r2.shape:
        raise ShapeError(f"incompatible shapes {r1.shape} and {r2.shape}")
    n1 = np.sqrt(stable_sum((r1 * r1).ravel()))
    n2 = np.sqrt(stable_sum((r2 * r2).ravel()))
    if n1 == 0 or n2 == 0:
        raise ValidationError("distance is undefined for a zero matrix")
    # symmetric inputs: tr(R1 R2) = sum_ij R1_ij R2_ij, exactly symmetric in (R1, R2)
    trace = stable_sum((r1 * r2).ravel())
    dist = 1.0 - trace / (n1 * n2)
    if -SLACK <= dist < 0.0:
        dist = 0.0
    elif 1.0 < dist <= 1.0 + SLACK:
        dist = 1.0
    return float(dist)


@dataclass
class CmdReport:
    per_class_cmd: np.ndarray
    mean_cmd: float
    var_cmd: float
    pca_dims: int
    explained_variance_ratio: float

    def as_document(self) -> dict:
        return {
            "format_version": 1,
            "kind": "cmd-report",
            "per_class_cmd": self.per_class_cmd,
            "mean_cmd": self.mean_cmd,
            "var_cmd": self.var_cmd,
            "pca_dims": self.pca_dims,
            "explained_variance_ratio": self.explained_variance_ratio,
        }

    def write(self, path) -> None:
        write_document(self.as_document(), path)

    @classmethod
    def read(cls, path) -> "CmdReport":
        doc = read_document(path)
        return cls(np.array(doc["per_class_cmd"], dtype=float), doc["mean_cmd"], doc["var_cmd"],
                   doc["pca_dims"], doc["explained_variance_ratio"])


def class_covariances(z, labels, num_classes: int) -> list[np.ndarray]:
    """Per-class ``1/|C_k|``-normalized covariances of ``z`` around each class mean."""
    covs = []
    for k in range(num_classes):
        rows = z[labels == k]
        centered = rows - rows.mean(axis=0)
        covs.append(scatter(centered) / rows.shape[0])
    return covs


def cmd_study(x, y, pca_dims: int = 2, num_classes: int | None = None) -> CmdReport:
    """Class-mean centering, PCA to ``pca_dims``, per-class covariances, and the
    CMD of each against their unweighted mean. Variance is the population one."""
    labels, k = as_labels(y, num_classes)
    x = np.asarray(x, dtype=np.float64)
    if pca_dims < 1:
        raise ShapeError("pca_dims must be >= 1")
    if x.ndim != 2 or pca_dims > x.shape[1]:
        raise ShapeError(f"pca_dims={pca_dims} exceeds feature dim {x.shape[-1]}")
    counts = np.bincount(labels, minlength=k)
    for c in range(k):
        if counts[c] < pca_dims + 1:
            raise DataError(
                f"class {c} has {counts[c]} samples; need at least {pca_dims + 1} for pca_dims={pca_dims}"
            )
    s = fit_statistics(x, labels, k)
    basis, ratio = centered_pca(s, pca_dims)
    z = (x - s.means[labels]) @ basis
    covs = class_covariances(z, labels, k)
    mean_cov = symmetrize(sum(covs) / k)
    scores = np.array([cmd_distance(c, mean_cov) for c in covs])
    mean = stable_sum(scores) / k
    var = stable_sum((scores - mean) ** 2) / k
    return CmdReport(scores, float(mean), float(var), pca_dims, ratio)
