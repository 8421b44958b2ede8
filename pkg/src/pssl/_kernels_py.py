"""Pure-Python/numpy kernels.

These are the reference implementations of the hot loops. The compiled module
``_ckernels`` exposes the same functions with the same outputs bit for bit;
``pssl.kernels`` picks one at import time.
"""
from __future__ import annotations

import itertools
import math

import numpy as np


def pack_codes(table: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Encode each concept's labels on ``points`` as an integer (bit i = point i)."""
    points = np.asarray(points, dtype=np.int64)
    if points.size > 62:
        raise ValueError("at most 62 points can be packed")
    codes = np.zeros(table.shape[0], dtype=np.int64)
    for i, p in enumerate(points):
        codes |= table[:, p].astype(np.int64) << i
    return codes


def extension_counts(table: np.ndarray, codes: np.ndarray, k: int, start: int) -> np.ndarray:
    """Number of distinct dichotomies after appending each point ``p >= start``.

    ``codes`` holds the packed labels of a ``k``-point set; column ``p`` of the
    result counts distinct values of ``codes | table[:, p] << k``.
    """
    n_points = table.shape[1]
    if start >= n_points:
        return np.zeros(0, dtype=np.int64)
    ext = codes[:, None] | (table[:, start:].astype(np.int64) << k)
    ext.sort(axis=0)
    return 1 + np.count_nonzero(np.diff(ext, axis=0), axis=0).astype(np.int64)


def compositions(total: int, parts: int) -> np.ndarray:
    """All count vectors of ``parts`` nonnegative ints summing to ``total``.

    Rows follow ``itertools.combinations_with_replacement(range(parts), total)``
    order, read as multisets.
    """
    n_rows = math.comb(total + parts - 1, total)
    out = np.zeros((n_rows, parts), dtype=np.int32)
    for row, combo in enumerate(itertools.combinations_with_replacement(range(parts), total)):
        for x in combo:
            out[row, x] += 1
    return out


def max_count_deviation(
    comps: np.ndarray, query_table: np.ndarray, target: np.ndarray, n: int, mhat: int
) -> np.ndarray:
    """``max_q |target[q] * mhat - n * <comps[i], query_table[q]>|`` per row."""
    out = np.empty(comps.shape[0], dtype=np.int64)
    qt = query_table.astype(np.float64).T
    scaled_target = target.astype(np.int64) * mhat
    chunk = 1 << 16
    for lo in range(0, comps.shape[0], chunk):
        # float matmul is exact here: entries stay far below 2**53
        counts = np.rint(comps[lo:lo + chunk].astype(np.float64) @ qt).astype(np.int64)
        out[lo:lo + chunk] = np.abs(scaled_target[None, :] - n * counts).max(axis=1)
    return out


def metropolis_walk(
    counts: np.ndarray,
    query_table: np.ndarray,
    target: np.ndarray,
    n: int,
    mhat: int,
    epsilon: float,
    slot_uniforms: np.ndarray,
    proposal_points: np.ndarray,
    accept_uniforms: np.ndarray,
) -> tuple[np.ndarray, int]:
    """Random walk over size-``mhat`` multisets targeting ``exp(-eps*dev/(2*mhat))``.

    A step moves one uniformly chosen element to ``proposal_points[s]``. The
    Hastings correction for that proposal is ``(c[y] + 1) / c[x]``.
    """
    counts = np.array(counts, dtype=np.int64)
    qt = query_table.astype(np.int64)
    qcounts = qt @ counts
    scaled_target = target.astype(np.int64) * mhat
    dev = int(np.abs(scaled_target - n * qcounts).max())
    accepted = 0
    half_eps = 0.5 * epsilon
    for s in range(slot_uniforms.shape[0]):
        r = int(slot_uniforms[s] * mhat)
        if r >= mhat:
            r = mhat - 1
        x = 0
        acc = int(counts[0])
        while acc <= r:
            x += 1
            acc += int(counts[x])
        y = int(proposal_points[s])
        if y == x:
            continue
        new_q = qcounts + qt[:, y] - qt[:, x]
        new_dev = int(np.abs(scaled_target - n * new_q).max())
        log_ratio = half_eps * (dev - new_dev) / mhat + math.log((counts[y] + 1) / counts[x])
        u = float(accept_uniforms[s])
        if u <= 0.0 or math.log(u) < log_ratio:
            counts[x] -= 1
            counts[y] += 1
            qcounts = new_q
            dev = new_dev
            accepted += 1
    return counts, accepted
