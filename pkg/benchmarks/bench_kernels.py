"""Compare the numba and numpy implementations of the float kernels.

Run with ``python3 benchmarks/bench_kernels.py``.  Each kernel is called once
to trigger compilation, then timed over several repeats; the table reports
the best time per call and the largest disagreement between backends.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from partheta import _kernels


def _best(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _cases(n_points: int, rng: np.random.Generator) -> dict:
    r = rng.uniform(1.0, 40.0, n_points)
    z = r * np.exp(1j * rng.uniform(-np.pi, np.pi, n_points))
    qs = 0.45 * np.sqrt(rng.uniform(0.05, 1.0, n_points)) * np.exp(1j * rng.uniform(0.05, np.pi, n_points))
    q = 0.43 + 0.12j
    return {
        "scaled_sum": lambda impl: impl["scaled_sum"](q, z, 3, 40),
        "triple": lambda impl: impl["triple"](q, z, 60, 30),
        # log D is defined modulo 2 pi i and the backends may pick different branches
        "logdisc": lambda impl: np.exp(1j * impl["logdisc"](qs[: max(8, n_points // 64)], 18).imag),
        "roots": lambda impl: impl["roots"](q, 24),
    }


def _diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(_diff(x, y) for x, y in zip(a, b))
    a, b = np.asarray(a), np.asarray(b)
    if a.ndim == 1 and a.shape == b.shape and a.dtype.kind == "c" and a.size < 64 and np.all(np.isfinite(a)):
        # root sets may come back in different orders
        a, b = np.sort_complex(a), np.sort_complex(b)
    scale = np.maximum(1.0, np.abs(a))
    return float(np.max(np.abs(a - b) / scale))


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        print("numba is not importable; only the numpy path is available")
    cases = _cases(args.points, np.random.default_rng(args.seed))
    nb, npy = _kernels.IMPLEMENTATIONS["numba"], _kernels.IMPLEMENTATIONS["numpy"]
    print(f"{'kernel':<12}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>10}{'max rel diff':>15}")
    for name, call in cases.items():
        warm_nb = call(nb)  # compile
        ref = call(npy)
        t_nb = _best(lambda: call(nb), args.repeats)
        t_np = _best(lambda: call(npy), args.repeats)
        print(f"{name:<12}{1e3 * t_nb:>12.3f}{1e3 * t_np:>12.3f}{t_np / t_nb:>10.1f}{_diff(warm_nb, ref):>15.2e}")


if __name__ == "__main__":
    main()
