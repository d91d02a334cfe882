"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Prints one row per kernel with the best-of-N time of each backend, the
speedup and the largest absolute difference between the two results.
"""

import argparse
import json
import timeit

import numpy as np

from tilecocycle import _fallback

try:
    from tilecocycle import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    M, E, d = 4, 4000, 2
    parent = rng.integers(0, M, E).astype(np.int64)
    child = rng.integers(0, M, E).astype(np.int64)
    offs = rng.normal(size=(E, d)) * 50
    lam = rng.normal(size=d)
    yield "fourier_level", (parent, child, offs, lam, M)

    mats = rng.uniform(0, 1, size=(20000, 2, 2)) * np.exp(1j * rng.uniform(0, 6.3, size=(20000, 2, 2)))
    yield "chain_product", (mats, 16)

    real = rng.uniform(0, 2, size=(100000, 3, 3))
    yield "chain_log_norms", (real, np.array([25000, 50000, 75000, 100000]))

    lo = rng.normal(size=(50000, 2))
    hi = lo + rng.uniform(0, 1, size=(50000, 2))
    w = rng.normal(size=50000) + 0j
    yield "box_transform_sum", (lo, hi, w, np.array([0.3, -1.7]))


def _diff(a, b):
    if isinstance(a, tuple):
        return max(_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="also write the rows to this file")
    args = ap.parse_args()
    rows = []
    for name, call_args in cases(np.random.default_rng(0)):
        slow = getattr(_fallback, name)
        t_py = min(timeit.repeat(lambda: slow(*call_args), number=1, repeat=args.repeat))
        row = {"kernel": name, "numpy_s": t_py}
        if _kernels is not None:
            fast = getattr(_kernels, name)
            t_cy = min(timeit.repeat(lambda: fast(*call_args), number=1, repeat=args.repeat))
            row.update(cython_s=t_cy, speedup=t_py / t_cy, max_abs_diff=_diff(fast(*call_args), slow(*call_args)))
        rows.append(row)
    print(f"{'kernel':<20}{'numpy [s]':>12}{'cython [s]':>12}{'speedup':>10}{'max diff':>12}")
    for r in rows:
        if "cython_s" in r:
            print(f"{r['kernel']:<20}{r['numpy_s']:>12.5f}{r['cython_s']:>12.5f}{r['speedup']:>10.1f}"
                  f"{r['max_abs_diff']:>12.1e}")
        else:
            print(f"{r['kernel']:<20}{r['numpy_s']:>12.5f}{'n/a':>12}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)


if __name__ == "__main__":
    main()
