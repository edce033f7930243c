"""Seeded Gaussian class data with known generating parameters.

Every random quantity comes from its own :class:`~rgcinit.sampling.Stream`
keyed by ``SynthSpec.seed``, so changing the sample count never changes the means
or covariances:

==========  ====================================================
stream 0    class means, ``mean_scale * N(0, I)``, K x d
stream 1    covariance eigenbases (one Q per class in distinct mode)
stream 2    training samples
stream 3+   further splits via :func:`sample_split`
==========  ====================================================

Shared mode uses ``Sigma = Q diag(lam) Q^T`` with ``lam`` log-spaced from 1
down to ``1/condition_number``. Distinct mode gives class ``k`` a spiked
covariance ``s_k Q_k diag(1, 1/c, ..., 1/c) Q_k^T`` with its own random basis
and a class scale ``s_k = c**(-k/(K-1))``, so classes differ in orientation
and in size.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import UsageError, ValidationError
from .numerics import spd_factor, spd_solve, symmetrize
from .sampling import Stream
from .tensor_store import LabelVector, LinearClassifier, read_document, write_document

COVARIANCE_MODES = ("shared", "distinct")


@dataclass(frozen=True)
class SynthSpec:
    num_classes: int
    dim: int
    samples_per_class: int
    seed: int = 0
    mean_scale: float = 1.0
    covariance_mode: str = "shared"
    condition_number: float = 10.0

    def __post_init__(self):
        if self.num_classes < 2:
            raise UsageError(f"num_classes must be >= 2, got {self.num_classes}")
        if self.dim < 1:
            raise UsageError(f"dim must be >= 1, got {self.dim}")
        if self.samples_per_class < 2:
            raise UsageError(f"samples_per_class must be >= 2, got {self.samples_per_class}")
        if not self.condition_number >= 1:
            raise UsageError(f"condition_number must be >= 1, got {self.condition_number}")
        if self.covariance_mode not in COVARIANCE_MODES:
            raise UsageError(f"covariance_mode must be one of {COVARIANCE_MODES}")
        if not 0 <= self.seed < 2**64:
            raise UsageError("seed must be an unsigned 64-bit integer")


@dataclass
class SynthTruth:
    means: np.ndarray  # K x d
    covariances: list[np.ndarray]  # one (shared) or K (distinct), d x d
    factors: list[np.ndarray]  # A with cov = A A^T, same layout
    covariance_mode: str
    spec: dict | None = None

    @property
    def shared_cov(self) -> np.ndarray:
        """The shared covariance, or the class average in distinct mode."""
        if len(self.covariances) == 1:
            return self.covariances[0]
        return symmetrize(sum(self.covariances) / len(self.covariances))

    def cov(self, k: int) -> np.ndarray:
        return self.covariances[0 if len(self.covariances) == 1 else k]


def log_spectrum(dim: int, condition_number: float) -> np.ndarray:
    if dim == 1:
        return np.ones(1)
    return np.asarray(condition_number, dtype=np.float64) ** (-np.arange(dim) / (dim - 1))


def random_orthogonal(stream: Stream, dim: int) -> np.ndarray:
    """Q from the QR factorization of a Gaussian matrix, with R's diagonal made positive."""
    q, r = np.linalg.qr(stream.normal((dim, dim)))
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    return q * signs


def make_truth(spec: SynthSpec) -> SynthTruth:
    k, d, cond = spec.num_classes, spec.dim, spec.condition_number
    means = spec.mean_scale * Stream(spec.seed, 0).normal((k, d))
    basis_stream = Stream(spec.seed, 1)
    if spec.covariance_mode == "shared":
        lam = log_spectrum(d, cond)
        q = random_orthogonal(basis_stream, d)
        factors = [q * np.sqrt(lam)]
    else:
        lam = np.full(d, 1.0 / cond)
        lam[0] = 1.0
        factors = []
        for c in range(k):
            scale = cond ** (-c / (k - 1))
            q = random_orthogonal(basis_stream, d)
            factors.append(q * np.sqrt(scale * lam))
    covariances = [symmetrize(a @ a.T) for a in factors]
    return SynthTruth(means, covariances, factors, spec.covariance_mode, asdict(spec))


def sample_from(truth: SynthTruth, samples_per_class: int, seed: int, stream: int):
    """Draw ``samples_per_class`` rows per class; labels are grouped 0,0,..,1,1,...."""
    k, d = truth.means.shape
    z = Stream(seed, stream).normal((k, samples_per_class, d))
    x = np.empty((k * samples_per_class, d))
    for c in range(k):
        a = truth.factors[0 if len(truth.factors) == 1 else c]
        x[c * samples_per_class:(c + 1) * samples_per_class] = truth.means[c] + z[c] @ a.T
    y = np.repeat(np.arange(k), samples_per_class)
    return x, LabelVector(y, k)


def generate(spec: SynthSpec):
    """``(features, labels, truth)`` for the training split (stream 2)."""
    truth = make_truth(spec)
    x, y = sample_from(truth, spec.samples_per_class, spec.seed, 2)
    return x, y, truth


def sample_split(spec: SynthSpec, samples_per_class: int, split: int = 1):
    """An independent split from the same distribution (split 1 uses stream 3)."""
    if split < 1:
        raise UsageError("split 0 is the training split; use generate()")
    return sample_from(make_truth(spec), samples_per_class, spec.seed, 2 + split)


def bayes_classifier(truth: SynthTruth) -> LinearClassifier:
    """Optimal linear rule under the generating model (equal priors).

    In distinct mode the class-averaged covariance stands in for the shared one.
    """
    factor = spd_factor(truth.shared_cov)
    weights = spd_solve(factor, truth.means.T).T
    bias = -0.5 * np.einsum("kd,kd->k", weights, truth.means)
    return LinearClassifier(weights, bias, {"source": "bayes", "calibration": None})


def write_truth(truth: SynthTruth, path) -> None:
    write_document(
        {
            "format_version": 1,
            "kind": "synth-truth",
            "spec": truth.spec or {},
            "covariance_mode": truth.covariance_mode,
            "means": truth.means,
            "covariances": [c for c in truth.covariances],
            "factors": [a for a in truth.factors],
        },
        path,
    )


def read_truth(path) -> SynthTruth:
    doc = read_document(path)
    if doc.get("kind") != "synth-truth":
        raise ValidationError(f"{path}: not a synth-truth document")
    means = np.array(doc["means"], dtype=np.float64)
    covs = [np.array(c, dtype=np.float64) for c in doc["covariances"]]
    factors = [np.array(a, dtype=np.float64) for a in doc["factors"]]
    return SynthTruth(means, covs, factors, doc["covariance_mode"], doc.get("spec"))
