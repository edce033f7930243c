"""Dense linear algebra used by the solvers.

Symmetric positive definite solves go through a Cholesky factorization (never
an explicit inverse), eigendecompositions through cyclic Jacobi, and long sums
through Neumaier compensation. The heavy lifting lives in ``_kernels`` (Cython)
with a pure-Python mirror; see :data:`BACKEND`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._backend import NAME as BACKEND
from ._backend import kernels
from .errors import ConvergenceError, NotPositiveDefinite, ShapeError, ValidationError

MAX_SWEEPS = 100
JACOBI_TOL = 1e-14


@dataclass(frozen=True)
class SpdFactorization:
    """Lower-triangular ``L`` with ``L @ L.T == a``."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def as_symmetric(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix has non-finite entries")
    if not np.array_equal(a, a.T):
        raise ValidationError("matrix is not exactly symmetric")
    return a


def symmetrize(a) -> np.ndarray:
    """Average with the transpose so the result is exactly symmetric."""
    a = np.asarray(a, dtype=np.float64)
    return 0.5 * (a + a.T)


def spd_factor(a) -> SpdFactorization:
    a = as_symmetric(a)
    lower, pivot = kernels.cholesky(np.ascontiguousarray(a))
    if pivot >= 0:
        raise NotPositiveDefinite(pivot)
    return SpdFactorization(lower)


def spd_solve(f: SpdFactorization, rhs) -> np.ndarray:
    """Solve ``a X = rhs`` reusing one factorization for every column of ``rhs``."""
    rhs = np.asarray(rhs, dtype=np.float64)
    vector = rhs.ndim == 1
    b = rhs[:, None] if vector else rhs
    if b.ndim != 2 or b.shape[0] != f.dim:
        raise ShapeError(f"rhs has shape {rhs.shape}, expected ({f.dim}, m)")
    x = kernels.cholesky_solve(f.lower, np.ascontiguousarray(b))
    return x[:, 0] if vector else x


def sym_eigen(a) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and orthonormal eigenvectors as columns.

    Each eigenvector is signed so that its largest-magnitude component is
    positive (first such component on ties).
    """
    a = as_symmetric(a)
    values, vectors, _, converged = kernels.jacobi_eigen(
        np.ascontiguousarray(a), MAX_SWEEPS, JACOBI_TOL
    )
    if not converged:
        raise ConvergenceError(f"Jacobi did not converge in {MAX_SWEEPS} sweeps")
    order = np.argsort(-values, kind="stable")
    values = values[order]
    vectors = vectors[:, order]
    if vectors.size:
        lead = np.argmax(np.abs(vectors), axis=0)
        signs = np.sign(vectors[lead, np.arange(vectors.shape[1])])
        signs[signs == 0] = 1.0
        vectors = vectors * signs
    return values, np.ascontiguousarray(vectors)


def stable_sum(values) -> float:
    return float(kernels.neumaier_sum(np.asarray(values, dtype=np.float64)))


def column_sums(x) -> np.ndarray:
    """Compensated column sums of a 2-D array (rows accumulated in order)."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape[0] == 0:
        return np.zeros(x.shape[1])
    return kernels.compensated_colsum(x)


def scatter(c) -> np.ndarray:
    """Compensated ``c.T @ c``; exactly symmetric."""
    c = np.ascontiguousarray(c, dtype=np.float64)
    if c.shape[0] == 0:
        return np.zeros((c.shape[1], c.shape[1]))
    return kernels.compensated_scatter(c)
