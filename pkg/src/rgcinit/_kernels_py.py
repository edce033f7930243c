"""Pure-Python/NumPy kernels.

Mirror of ``_kernels.pyx``. Every routine performs the same IEEE operations
in the same order as the compiled version (vectorized only across
independent lanes), so both backends return bitwise-identical results.
"""
from __future__ import annotations

import math

import numpy as np


def cholesky(a):
    """Lower Cholesky factor of ``a``; returns ``(L, failed_pivot)``, -1 on success."""
    a = np.array(a, dtype=np.float64, order="C", copy=True)
    n = a.shape[0]
    L = np.zeros_like(a)
    for j in range(n):
        pivot = a[j, j]
        if not pivot > 0.0 or not math.isfinite(pivot):
            return L, j
        d = math.sqrt(pivot)
        L[j, j] = d
        if j + 1 < n:
            col = a[j + 1:, j] / d
            L[j + 1:, j] = col
            # right-looking update: entry (i, k) receives its subtractions in pivot order
            a[j + 1:, j + 1:] -= np.multiply.outer(col, col)
    return L, -1


def cholesky_solve(L, b):
    """Solve ``L Lᵀ X = B`` for a d×m right-hand side."""
    L = np.asarray(L, dtype=np.float64)
    y = np.array(b, dtype=np.float64, order="C", copy=True)
    n = L.shape[0]
    for k in range(n):
        y[k] = y[k] / L[k, k]
        if k + 1 < n:
            y[k + 1:] -= np.multiply.outer(L[k + 1:, k], y[k])
    for k in range(n - 1, -1, -1):
        y[k] = y[k] / L[k, k]
        if k > 0:
            y[:k] -= np.multiply.outer(L[k, :k], y[k])
    return y


def jacobi_eigen(a, max_sweeps, tol):
    """Cyclic Jacobi; returns ``(diag, V, sweeps, converged)`` with eigenvalues unsorted."""
    A = np.array(a, dtype=np.float64, order="C", copy=True)
    n = A.shape[0]
    V = np.eye(n)
    norm = 0.0
    for value in A.ravel().tolist():
        norm += value * value
    limit = tol * math.sqrt(norm)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        rows = A.tolist()
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * rows[p][q] * rows[p][q]
        if math.sqrt(off) <= limit:
            return np.diagonal(A).copy(), V, sweep, True
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                app = A[p, p]
                aqq = A[q, q]
                theta = (aqq - app) / (2.0 * apq)
                t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                ap = A[:, p].copy()
                aq = A[:, q].copy()
                nap = c * ap - s * aq
                naq = s * ap + c * aq
                A[:, p] = nap
                A[p, :] = nap
                A[:, q] = naq
                A[q, :] = naq
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    return np.diagonal(A).copy(), V, max_sweeps, False


def neumaier_sum(values):
    s = 0.0
    comp = 0.0
    for x in np.asarray(values, dtype=np.float64).ravel().tolist():
        t = s + x
        if abs(s) >= abs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


def _neumaier_step(s, comp, x):
    t = s + x
    comp += np.where(np.abs(s) >= np.abs(x), (s - t) + x, (x - t) + s)
    return t, comp


def compensated_colsum(x):
    """Column sums of a 2-D array, compensated across rows."""
    x = np.asarray(x, dtype=np.float64)
    s = np.zeros(x.shape[1])
    comp = np.zeros(x.shape[1])
    for row in x:
        s, comp = _neumaier_step(s, comp, row)
    return s + comp


def compensated_scatter(c):
    """``sum_i c_i c_iᵀ`` over the rows of ``c``, compensated across rows."""
    c = np.asarray(c, dtype=np.float64)
    d = c.shape[1]
    s = np.zeros((d, d))
    comp = np.zeros((d, d))
    for row in c:
        s, comp = _neumaier_step(s, comp, np.multiply.outer(row, row))
    return s + comp
