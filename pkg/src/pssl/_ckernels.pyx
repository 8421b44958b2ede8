# cython: language_level=3
"""Compiled kernels. Same contracts and outputs as ``_kernels_py``."""
import math

import numpy as np
cimport numpy as cnp
from libc.math cimport log
from libc.stdlib cimport calloc, free
from libc.string cimport memset

cnp.import_array()


def pack_codes(const unsigned char[:, :] table, points):
    cdef long long[:] pts = np.ascontiguousarray(points, dtype=np.int64)
    cdef Py_ssize_t n_conc = table.shape[0], k = pts.shape[0], c, i
    if k > 62:
        raise ValueError("at most 62 points can be packed")
    out = np.zeros(n_conc, dtype=np.int64)
    cdef long long[:] codes = out
    cdef long long v
    for c in range(n_conc):
        v = 0
        for i in range(k):
            v |= (<long long>table[c, pts[i]]) << i
        codes[c] = v
    return out


def extension_counts(const unsigned char[:, :] table, const long long[:] codes, int k, Py_ssize_t start):
    cdef Py_ssize_t n_conc = table.shape[0], n_points = table.shape[1], p, c
    if start >= n_points:
        return np.zeros(0, dtype=np.int64)
    if k + 1 > 30:
        raise ValueError("extension_counts supports sets of at most 29 points")
    out = np.zeros(n_points - start, dtype=np.int64)
    cdef long long[:] res = out
    cdef Py_ssize_t size = (<Py_ssize_t>1) << (k + 1)
    cdef unsigned char* seen = <unsigned char*>calloc(size, 1)
    cdef long long v, distinct
    if seen == NULL:
        raise MemoryError()
    try:
        for p in range(start, n_points):
            memset(seen, 0, size)
            distinct = 0
            for c in range(n_conc):
                v = codes[c] | ((<long long>table[c, p]) << k)
                if not seen[v]:
                    seen[v] = 1
                    distinct += 1
            res[p - start] = distinct
    finally:
        free(seen)
    return out


def compositions(int total, int parts):
    cdef Py_ssize_t n_rows = math.comb(total + parts - 1, total)
    out = np.zeros((n_rows, parts), dtype=np.int32)
    cdef int[:, :] comp = out
    cdef int[:] seq = np.zeros(max(total, 1), dtype=np.int32)
    cdef int[:] counts = np.zeros(parts, dtype=np.int32)
    cdef Py_ssize_t row, j
    cdef int i, v
    counts[0] = total
    for row in range(n_rows):
        for j in range(parts):
            comp[row, j] = counts[j]
        if row + 1 == n_rows:
            break
        # successor of the nondecreasing sequence, as combinations_with_replacement
        i = total - 1
        while seq[i] == parts - 1:
            i -= 1
        v = seq[i] + 1
        for j in range(i, total):
            counts[seq[j]] -= 1
            seq[j] = v
            counts[v] += 1
    return out


def max_count_deviation(const int[:, :] comps, const unsigned char[:, :] query_table,
                        target, long long n, long long mhat):
    cdef long long[:] tgt = np.ascontiguousarray(target, dtype=np.int64)
    cdef Py_ssize_t n_rows = comps.shape[0], n_pts = comps.shape[1], n_q = query_table.shape[0]
    cdef Py_ssize_t r, q, x
    out = np.empty(n_rows, dtype=np.int64)
    cdef long long[:] res = out
    cdef long long best, cnt, dev
    for r in range(n_rows):
        best = 0
        for q in range(n_q):
            cnt = 0
            for x in range(n_pts):
                if query_table[q, x]:
                    cnt += comps[r, x]
            dev = tgt[q] * mhat - n * cnt
            if dev < 0:
                dev = -dev
            if dev > best:
                best = dev
        res[r] = best
    return out


cdef long long _deviation(long long[:] qcounts, long long[:] tgt, Py_ssize_t n_q,
                          long long n, long long mhat):
    cdef long long best = 0, dev
    cdef Py_ssize_t q
    for q in range(n_q):
        dev = tgt[q] * mhat - n * qcounts[q]
        if dev < 0:
            dev = -dev
        if dev > best:
            best = dev
    return best


def metropolis_walk(counts, const unsigned char[:, :] query_table, target,
                    long long n, long long mhat, double epsilon,
                    const double[:] slot_uniforms, const long long[:] proposal_points,
                    const double[:] accept_uniforms):
    out = np.array(counts, dtype=np.int64)
    cdef long long[:] cnt = out
    cdef long long[:] tgt = np.ascontiguousarray(target, dtype=np.int64)
    cdef Py_ssize_t n_q = query_table.shape[0], n_pts = query_table.shape[1]
    cdef long long[:] qc = np.zeros(n_q, dtype=np.int64)
    cdef long long[:] nq = np.zeros(n_q, dtype=np.int64)
    cdef Py_ssize_t q, x, y, s, steps = slot_uniforms.shape[0]
    cdef long long r, acc, dev, new_dev
    cdef long accepted = 0
    cdef double half_eps = 0.5 * epsilon, log_ratio, u
    for q in range(n_q):
        acc = 0
        for x in range(n_pts):
            if query_table[q, x]:
                acc += cnt[x]
        qc[q] = acc
    dev = _deviation(qc, tgt, n_q, n, mhat)
    for s in range(steps):
        r = <long long>(slot_uniforms[s] * mhat)
        if r >= mhat:
            r = mhat - 1
        x = 0
        acc = cnt[0]
        while acc <= r:
            x += 1
            acc += cnt[x]
        y = proposal_points[s]
        if y == x:
            continue
        for q in range(n_q):
            nq[q] = qc[q] + query_table[q, y] - query_table[q, x]
        new_dev = _deviation(nq, tgt, n_q, n, mhat)
        log_ratio = half_eps * <double>(dev - new_dev) / mhat + log(<double>(cnt[y] + 1) / <double>cnt[x])
        u = accept_uniforms[s]
        if u <= 0.0 or log(u) < log_ratio:
            cnt[x] -= 1
            cnt[y] += 1
            for q in range(n_q):
                qc[q] = nq[q]
            dev = new_dev
            accepted += 1
    return out, int(accepted)
