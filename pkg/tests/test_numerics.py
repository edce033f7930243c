import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rgcinit import _kernels_py
from rgcinit.errors import NotPositiveDefinite, ShapeError
from rgcinit.numerics import column_sums, scatter, spd_factor, spd_solve, stable_sum, sym_eigen

try:
    from rgcinit import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def random_spd(rng, d, cond=None):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    lam = np.logspace(0, -math.log10(cond), d) if cond else rng.uniform(0.5, 2.0, d)
    a = (q * lam) @ q.T
    return 0.5 * (a + a.T)


def test_factor_identity():
    assert np.array_equal(spd_factor(np.eye(3)).lower, np.eye(3))


def test_factor_diagonal():
    assert np.array_equal(spd_factor(np.diag([4.0, 9.0])).lower, np.diag([2.0, 3.0]))


def test_factor_singular_reports_pivot():
    with pytest.raises(NotPositiveDefinite) as info:
        spd_factor(np.array([[0.0, 0.0], [0.0, 1.0]]))
    assert info.value.pivot == 0


def test_factor_residual_matches_numpy():
    rng = np.random.default_rng(1)
    a = random_spd(rng, 12)
    low = spd_factor(a).lower
    assert np.linalg.norm(low @ low.T - a) / np.linalg.norm(a) <= 1e-10
    assert np.allclose(low, np.linalg.cholesky(a), rtol=0, atol=1e-12)
    assert np.all(np.diag(low) > 0)


def test_solve_diagonal():
    x = spd_solve(spd_factor(np.diag([0.1, 1.1])), np.array([[1.0], [0.0]]))
    # oracle: elementwise division
    assert np.allclose(x[:, 0], [1.0 / 0.1, 0.0], rtol=1e-15, atol=0)


def test_solve_identity():
    rhs = np.arange(6.0).reshape(3, 2)
    assert np.array_equal(spd_solve(spd_factor(np.eye(3)), rhs), rhs)


def test_solve_random_residual():
    rng = np.random.default_rng(8)
    a = random_spd(rng, 8)
    rhs = rng.standard_normal((8, 3))
    x = spd_solve(spd_factor(a), rhs)
    assert np.linalg.norm(a @ x - rhs) / np.linalg.norm(rhs) <= 1e-10


def test_solve_shape_mismatch():
    with pytest.raises(ShapeError):
        spd_solve(spd_factor(np.eye(3)), np.ones((2, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 24), st.integers(0, 2**32 - 1), st.sampled_from([1.0, 1e3, 1e6]))
def test_solve_recovers_x(d, seed, cond):
    rng = np.random.default_rng(seed)
    a = random_spd(rng, d, cond if d > 1 else None)
    x = rng.standard_normal(d)
    x /= np.linalg.norm(x)
    back = spd_solve(spd_factor(a), a @ x)
    assert np.linalg.norm(back - x) <= 1e-8


def test_eigen_diagonal():
    values, vectors = sym_eigen(np.diag([3.0, 1.0, 2.0]))
    assert values.tolist() == [3.0, 2.0, 1.0]
    assert np.array_equal(np.abs(vectors), np.eye(3)[:, [0, 2, 1]])


def test_eigen_two_by_two():
    values, vectors = sym_eigen(np.array([[2.0, 1.0], [1.0, 2.0]]))
    # characteristic polynomial (2 - l)^2 - 1 = 0
    assert np.allclose(values, [3.0, 1.0], rtol=0, atol=1e-14)
    assert np.allclose(vectors[:, 0], [1 / math.sqrt(2)] * 2, atol=1e-14)


def test_eigen_sign_convention():
    rng = np.random.default_rng(2)
    a = random_spd(rng, 6)
    _, vectors = sym_eigen(a)
    _, again = sym_eigen(a)
    assert np.array_equal(vectors, again)
    for col in vectors.T:
        assert col[np.argmax(np.abs(col))] > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1))
def test_eigen_properties(d, seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((d, d))
    a = 0.5 * (m + m.T)
    values, vectors = sym_eigen(a)
    scale = np.linalg.norm(a)
    assert np.linalg.norm(a @ vectors - vectors * values) <= 1e-8 * scale
    assert np.linalg.norm(vectors.T @ vectors - np.eye(d)) <= 1e-10
    assert np.all(np.diff(values) <= 0)
    assert abs(values.sum() - np.trace(a)) <= 1e-10 * max(scale, 1.0)
    # independent oracle
    assert np.allclose(values, np.linalg.eigvalsh(a)[::-1], rtol=0, atol=1e-10 * max(scale, 1.0))


@pytest.mark.parametrize("a", [
    np.array([[2.0, 1.0], [1.0, 2.0]]),
    np.array([[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 1.0]]),
    np.diag([1.0, 2.0, 3.0, 4.0]),
])
def test_eigen_product_is_determinant(a):
    values, _ = sym_eigen(a)
    assert math.isclose(np.prod(values), np.linalg.det(a), rel_tol=1e-10)


def test_stable_sum_cases():
    assert stable_sum([1e16, 1.0, -1e16]) == 1.0
    assert stable_sum([]) == 0.0
    assert abs(stable_sum(np.full(10**6, 0.1)) - 1e5) <= 1e-6


def test_stable_sum_beats_naive():
    vals = [1.0] + [1e-16] * 10000
    assert stable_sum(vals) == math.fsum(vals)


def test_column_sums_and_scatter_against_fsum():
    rng = np.random.default_rng(5)
    x = rng.standard_normal((200, 4)) * 1e3
    assert np.allclose(column_sums(x), [math.fsum(c) for c in x.T], rtol=0, atol=1e-9)
    s = scatter(x)
    assert np.array_equal(s, s.T)
    oracle = np.array([[math.fsum(x[:, i] * x[:, j]) for j in range(4)] for i in range(4)])
    assert np.allclose(s, oracle, rtol=1e-15, atol=0)


@pytest.mark.skipif(_compiled is None, reason="compiled kernels not built")
@pytest.mark.parametrize("d", [1, 2, 7, 33])
def test_backends_bitwise_identical(d):
    rng = np.random.default_rng(d)
    a = random_spd(rng, d, 1e4 if d > 1 else None)
    l1, p1 = _compiled.cholesky(a)
    l2, p2 = _kernels_py.cholesky(a)
    assert p1 == p2 == -1 and np.array_equal(l1, l2)
    b = rng.standard_normal((d, 3))
    assert np.array_equal(_compiled.cholesky_solve(l1, b), _kernels_py.cholesky_solve(l2, b))
    m = rng.standard_normal((d, d))
    m = m + m.T
    e1 = _compiled.jacobi_eigen(m, 100, 1e-14)
    e2 = _kernels_py.jacobi_eigen(m, 100, 1e-14)
    assert e1[2:] == e2[2:]
    assert np.array_equal(e1[0], e2[0]) and np.array_equal(e1[1], e2[1])
    x = rng.standard_normal((50, d))
    assert np.array_equal(_compiled.compensated_scatter(x), _kernels_py.compensated_scatter(x))
    assert np.array_equal(_compiled.compensated_colsum(x), _kernels_py.compensated_colsum(x))
    v = rng.standard_normal(1000) * 10.0 ** rng.integers(-10, 10, 1000)
    assert _compiled.neumaier_sum(v) == _kernels_py.neumaier_sum(v)


@pytest.mark.skipif(_compiled is None, reason="compiled kernels not built")
def test_backends_agree_on_failure_pivot():
    a = np.diag([1.0, 2.0, -1.0, 3.0])
    assert _compiled.cholesky(a)[1] == _kernels_py.cholesky(a)[1] == 2


def test_deterministic_repeat():
    rng = np.random.default_rng(9)
    a = random_spd(rng, 16)
    assert np.array_equal(spd_factor(a).lower, spd_factor(a).lower)
    assert np.array_equal(sym_eigen(a)[1], sym_eigen(a)[1])


def test_environment_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, RGC_PURE_PYTHON="1")
    done = subprocess.run([sys.executable, "-c", "import rgcinit.numerics as n; print(n.BACKEND)"],
                          env=env, capture_output=True, text=True, check=True)
    assert done.stdout.strip() == "python"
