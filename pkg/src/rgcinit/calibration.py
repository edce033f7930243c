"""Affine recalibration of a classifier head against a reference head.

Any ``w_k -> alpha w_k + v``, ``b_k -> alpha b_k + beta`` with ``alpha > 0``
leaves the argmax unchanged but changes the softmax loss scale. We pick the
member whose weight mean, bias mean and weight spread match the reference
(expectations are uniform over each model's own class rows, so the two heads
may have different K).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWeights, ShapeError, UsageError
from .tensor_store import LinearClassifier


@dataclass(frozen=True)
class CalibrationParams:
    alpha: float
    beta: float
    v: np.ndarray

    def __post_init__(self):
        if not self.alpha > 0:
            raise UsageError(f"alpha must be > 0 to preserve the argmax, got {self.alpha}")
        v = np.asarray(self.v, dtype=np.float64).ravel()
        if not np.all(np.isfinite(v)):
            raise UsageError("calibration offset v is not finite")
        object.__setattr__(self, "v", v)

    def as_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta, "v": self.v.tolist()}


def weight_moments(c: LinearClassifier) -> tuple[np.ndarray, float, float]:
    """``(E w, E b, Var w)`` with ``Var w = E||w - E w||^2`` over class rows."""
    mean_w = c.weights.mean(axis=0)
    mean_b = float(c.bias.mean())
    var_w = float(np.mean(np.sum((c.weights - mean_w) ** 2, axis=1)))
    return mean_w, mean_b, var_w


def compute_calibration(
    new: LinearClassifier, ref: LinearClassifier, *, as_printed: bool = False
) -> CalibrationParams:
    """Moment-matching parameters taking ``new`` onto ``ref``'s scale.

    ``alpha = sqrt(Var(w_ref) / Var(w_new))`` makes the calibrated spread equal
    the reference spread. ``as_printed=True`` uses the reciprocal ratio instead,
    for comparison with the published formula.
    """
    if new.dim != ref.dim:
        raise ShapeError(f"model dim {new.dim} differs from reference dim {ref.dim}")
    mw, mb, var_new = weight_moments(new)
    rw, rb, var_ref = weight_moments(ref)
    if not var_new > 0:
        raise DegenerateWeights("weights to calibrate have zero spread across classes")
    if not var_ref > 0:
        raise DegenerateWeights("reference weights have zero spread across classes")
    ratio = var_new / var_ref if as_printed else var_ref / var_new
    alpha = math.sqrt(ratio)
    v = rw - alpha * mw
    beta = rb - alpha * mb
    return CalibrationParams(alpha, float(beta), v)


def apply_calibration(c: LinearClassifier, p: CalibrationParams) -> LinearClassifier:
    if p.v.shape != (c.dim,):
        raise ShapeError(f"offset has length {p.v.size}, model dim is {c.dim}")
    meta = dict(c.metadata)
    meta["calibration"] = p.as_dict()
    return LinearClassifier(p.alpha * c.weights + p.v, p.alpha * c.bias + p.beta, meta)
