# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Same arithmetic, same order as ``_kernels_py``."""
import numpy as np

from libc.math cimport sqrt, fabs, isfinite


def cholesky(a):
    cdef double[:, ::1] A = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = A.shape[0]
    L_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] L = L_arr
    cdef Py_ssize_t i, j, k
    cdef double pivot, d
    for j in range(n):
        pivot = A[j, j]
        if not (pivot > 0.0) or not isfinite(pivot):
            return L_arr, j
        d = sqrt(pivot)
        L[j, j] = d
        for i in range(j + 1, n):
            L[i, j] = A[i, j] / d
        for i in range(j + 1, n):
            for k in range(j + 1, i + 1):
                A[i, k] = A[i, k] - L[i, j] * L[k, j]
    return L_arr, -1


def cholesky_solve(L_in, b):
    cdef double[:, ::1] L = np.ascontiguousarray(L_in, dtype=np.float64)
    y_arr = np.array(b, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] y = y_arr
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t m = y.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double lkk
    for k in range(n):
        lkk = L[k, k]
        for c in range(m):
            y[k, c] = y[k, c] / lkk
        for i in range(k + 1, n):
            for c in range(m):
                y[i, c] = y[i, c] - L[i, k] * y[k, c]
    for k in range(n - 1, -1, -1):
        lkk = L[k, k]
        for c in range(m):
            y[k, c] = y[k, c] / lkk
        for i in range(k):
            for c in range(m):
                y[i, c] = y[i, c] - L[k, i] * y[k, c]
    return y_arr


def jacobi_eigen(a, int max_sweeps, double tol):
    A_arr = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] A = A_arr
    cdef Py_ssize_t n = A.shape[0]
    V_arr = np.eye(n)
    cdef double[:, ::1] V = V_arr
    cdef double[::1] ap = np.empty(n)
    cdef double[::1] aq = np.empty(n)
    cdef Py_ssize_t p, q, r
    cdef int sweep
    cdef double norm = 0.0, off, limit, apq, app, aqq, theta, t, c, s, vp, vq
    for p in range(n):
        for q in range(n):
            norm += A[p, q] * A[p, q]
    limit = tol * sqrt(norm)
    for sweep in range(max_sweeps + 1):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += 2.0 * A[p, q] * A[p, q]
        if sqrt(off) <= limit:
            return np.diagonal(A_arr).copy(), V_arr, sweep, True
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
                t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                for r in range(n):
                    ap[r] = A[r, p]
                    aq[r] = A[r, q]
                for r in range(n):
                    A[r, p] = c * ap[r] - s * aq[r]
                    A[p, r] = A[r, p]
                    A[r, q] = s * ap[r] + c * aq[r]
                    A[q, r] = A[r, q]
                A[p, p] = app - t * apq
                A[q, q] = aqq + t * apq
                A[p, q] = 0.0
                A[q, p] = 0.0
                for r in range(n):
                    vp = V[r, p]
                    vq = V[r, q]
                    V[r, p] = c * vp - s * vq
                    V[r, q] = s * vp + c * vq
    return np.diagonal(A_arr).copy(), V_arr, max_sweeps, False


def neumaier_sum(values):
    cdef double[::1] v = np.ascontiguousarray(np.asarray(values, dtype=np.float64).ravel())
    cdef double s = 0.0, comp = 0.0, t, x
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        x = v[i]
        t = s + x
        if fabs(s) >= fabs(x):
            comp += (s - t) + x
        else:
            comp += (x - t) + s
        s = t
    return s + comp


def compensated_colsum(x_in):
    cdef double[:, ::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    cdef Py_ssize_t n = x.shape[0], d = x.shape[1], i, j
    out = np.empty(d)
    cdef double[::1] o = out
    cdef double s, comp, t, v
    for j in range(d):
        s = 0.0
        comp = 0.0
        for i in range(n):
            v = x[i, j]
            t = s + v
            if fabs(s) >= fabs(v):
                comp += (s - t) + v
            else:
                comp += (v - t) + s
            s = t
        o[j] = s + comp
    return out


def compensated_scatter(c_in):
    cdef double[:, ::1] c = np.ascontiguousarray(c_in, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], d = c.shape[1], i, j, k
    S_arr = np.zeros((d, d))
    C_arr = np.zeros((d, d))
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] C = C_arr
    cdef double s, t, v, ci
    for i in range(n):
        for j in range(d):
            ci = c[i, j]
            for k in range(j, d):
                v = ci * c[i, k]
                s = S[j, k]
                t = s + v
                if fabs(s) >= fabs(v):
                    C[j, k] += (s - t) + v
                else:
                    C[j, k] += (v - t) + s
                S[j, k] = t
    for j in range(d):
        for k in range(j, d):
            S[j, k] = S[j, k] + C[j, k]
            S[k, j] = S[j, k]
    return S_arr
