"""Time the compiled kernels against the numpy fallback on desk-scale inputs.

    python benchmarks/bench_kernels.py [--repeat 5]

Each kernel is run on identical inputs by both backends; outputs are checked
for equality before timings are reported.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from pssl import _kernels_py
from pssl.concepts import ConceptClass

try:
    from pssl import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases():
    rect_xor = ConceptClass.xor_of(ConceptClass.rectangles(2, 2)).table
    thresh_xor = ConceptClass.xor_of(ConceptClass.thresholds(3)).table
    rng = np.random.default_rng(0)
    pts = np.array([0, 5, 10], dtype=np.int64)
    codes = _kernels_py.pack_codes(rect_xor, pts)
    comps = _kernels_py.compositions(14, 8)
    target = thresh_xor[:, rng.integers(0, 8, 64)].sum(axis=1).astype(np.int64)
    steps = 20000
    walk_in = (
        np.bincount(rng.integers(0, 8, 14), minlength=8).astype(np.int64),
        thresh_xor, target, 64, 14, 1.0,
        rng.random(steps), rng.integers(0, 8, steps, dtype=np.int64), rng.random(steps),
    )
    return {
        "pack_codes": lambda k: k.pack_codes(rect_xor, np.arange(16, dtype=np.int64)),
        "extension_counts": lambda k: k.extension_counts(rect_xor, codes, 3, 0),
        "compositions(14,8)": lambda k: k.compositions(14, 8),
        "max_count_deviation": lambda k: k.max_count_deviation(comps, thresh_xor, target, 64, 14),
        "metropolis_walk": lambda k: k.metropolis_walk(*walk_in),
    }


def same(a, b) -> bool:
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return bool(np.array_equal(a, b))


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled kernels not built; only the numpy fallback is available")
    print(f"{'kernel':<22}{'numpy (ms)':>12}{'cython (ms)':>13}{'speedup':>9}")
    for name, fn in cases().items():
        py = min(timeit.repeat(lambda: fn(_kernels_py), number=1, repeat=args.repeat)) * 1e3
        if _ckernels is None:
            print(f"{name:<22}{py:>12.2f}{'-':>13}{'-':>9}")
            continue
        if not same(fn(_kernels_py), fn(_ckernels)):
            raise SystemExit(f"{name}: backends disagree")
        cy = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{py:>12.2f}{cy:>13.2f}{py / cy:>8.1f}x")


if __name__ == "__main__":
    main()
