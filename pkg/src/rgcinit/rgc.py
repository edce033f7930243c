"""Regularized Gaussian classifier (RGC) and nearest-centroid weights.

Under a shared-covariance Gaussian model with equal class priors the
maximum-likelihood rule is linear::

    w_k = (Sigma + eps I)^-1 mu_k,    b_k = -1/2 w_k . mu_k

The quadratic term and the normalizer are class independent and never
computed. The system is solved through one Cholesky factorization shared by
all K right-hand sides.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotPositiveDefinite, ShapeError, UsageError
from .numerics import spd_factor, spd_solve
from .stats import ClassStatistics
from .tensor_store import LabelVector, LinearClassifier

DEFAULT_EPSILON = 0.1
EPSILON_MODES = ("absolute", "relative")


@dataclass(frozen=True)
class RgcConfig:
    """Ridge strength. ``relative`` scales epsilon by the mean eigenvalue trace(Sigma)/d."""

    epsilon: float = DEFAULT_EPSILON
    epsilon_mode: str = "absolute"

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise UsageError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.epsilon_mode not in EPSILON_MODES:
            raise UsageError(f"epsilon_mode must be one of {EPSILON_MODES}")

    def effective(self, s: ClassStatistics) -> float:
        if self.epsilon_mode == "relative":
            return self.epsilon * float(np.trace(s.pooled_cov)) / s.dim
        return float(self.epsilon)


def fit_rgc(s: ClassStatistics, cfg: RgcConfig | None = None) -> LinearClassifier:
    cfg = cfg or RgcConfig()
    eps = cfg.effective(s)
    a = s.pooled_cov + eps * np.eye(s.dim)
    try:
        factor = spd_factor(a)
    except NotPositiveDefinite as exc:
        hint = " (use epsilon > 0)" if eps == 0 else ""
        raise NotPositiveDefinite(
            exc.pivot, f"Sigma + {eps!r} I is not positive definite at pivot {exc.pivot}{hint}"
        ) from None
    weights = spd_solve(factor, s.means.T).T
    bias = -0.5 * np.einsum("kd,kd->k", weights, s.means)
    meta = {
        "source": "rgc",
        "epsilon": eps,
        "epsilon_requested": float(cfg.epsilon),
        "epsilon_mode": cfg.epsilon_mode,
        "calibration": None,
    }
    meta.update(s.notes)
    return LinearClassifier(weights, bias, meta)


def fit_ncc(s: ClassStatistics) -> LinearClassifier:
    """Nearest class centroid as a linear rule; the eps -> inf limit of RGC up to scale."""
    weights = s.means.copy()
    bias = -0.5 * np.einsum("kd,kd->k", weights, weights)
    return LinearClassifier(weights, bias, {"source": "ncc", "calibration": None})


def predict(c: LinearClassifier, x) -> np.ndarray:
    """Argmax of the linear scores; ties go to the lowest class index."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != c.dim:
        raise ShapeError(f"features have {x.shape[1]} columns, model expects {c.dim}")
    # np.argmax returns the first maximum
    return np.argmax(c.scores(x), axis=1)


def predict_labels(c: LinearClassifier, x) -> LabelVector:
    return LabelVector(predict(c, x), max(c.num_classes, 1))
