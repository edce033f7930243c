"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row reports the median wall time of both backends and checks that their
outputs are bitwise identical.
"""
import argparse
import statistics
import time

import numpy as np

from rgcinit import _kernels_py

try:
    from rgcinit import _kernels as _compiled
except ImportError:
    _compiled = None


def spd(rng, d):
    q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    a = (q * np.logspace(0, -3, d)) @ q.T + 1e-3 * np.eye(d)
    return 0.5 * (a + a.T)


def timed(fn, args, repeat):
    times = []
    out = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - start)
    return statistics.median(times), out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray):
        return a.tobytes() == b.tobytes()
    return a == b


def cases(rng):
    for d in (32, 128, 256):
        a = spd(rng, d)
        low, _ = _kernels_py.cholesky(a)
        yield f"cholesky d={d}", "cholesky", (a,)
        yield f"cholesky_solve d={d} rhs=10", "cholesky_solve", (low, rng.standard_normal((d, 10)))
    for d in (16, 64):
        yield f"jacobi_eigen d={d}", "jacobi_eigen", (spd(rng, d), 100, 1e-14)
    x = rng.standard_normal((5000, 64))
    yield "compensated_scatter 5000x64", "compensated_scatter", (x,)
    yield "compensated_colsum 5000x64", "compensated_colsum", (x,)
    yield "neumaier_sum n=1e6", "neumaier_sum", (rng.standard_normal(10**6),)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    if _compiled is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<32}{'cython s':>12}{'python s':>12}{'speedup':>10}  bitwise")
    for label, name, inputs in cases(rng):
        tc, oc = timed(getattr(_compiled, name), inputs, args.repeat)
        tp, op = timed(getattr(_kernels_py, name), inputs, args.repeat)
        print(f"{label:<32}{tc:>12.5f}{tp:>12.5f}{tp / tc:>9.1f}x  {'yes' if same(oc, op) else 'NO'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
