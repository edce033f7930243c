"""Closed-form initialization of softmax classifier heads.

Fits a regularized Gaussian classifier (shared-covariance LDA-style rule with
a ridge) from pre-extracted features, optionally calibrates it against a
reference head, and provides the tooling to check it: a softmax-regression
trainer, a class-covariance similarity study and seeded synthetic data.
"""
from __future__ import annotations

__version__ = "0.1.0"

from .calibration import CalibrationParams, apply_calibration, compute_calibration
from .cmd import CmdReport, cmd_distance, cmd_study
from .errors import (
    ConvergenceError,
    DataError,
    DegenerateWeights,
    DivergedError,
    FormatError,
    LengthError,
    NotPositiveDefinite,
    NumericalError,
    RgcError,
    ShapeError,
    UsageError,
    ValidationError,
)
from .logreg import (
    TrainConfig,
    TrainTrace,
    cross_entropy,
    evaluate,
    random_init,
    softmax_probs,
    train,
)
from .numerics import BACKEND, spd_factor, spd_solve, stable_sum, sym_eigen
from .rgc import RgcConfig, fit_ncc, fit_rgc, predict
from .stats import ClassStatistics, fit_statistics, project_centered
from .synth import SynthSpec, bayes_classifier, generate, sample_split
from .tensor_store import (
    LabelVector,
    LinearClassifier,
    read_csv_features,
    read_features,
    read_labels,
    read_model,
    write_features,
    write_labels,
    write_model,
)
