# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled popcount kernels over packed uint64 fingerprint rows."""

import numpy as np

cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()


cdef extern from *:
    """
    #if defined(__GNUC__) || defined(__clang__)
    #  define RXN_POPCOUNT(x) __builtin_popcountll(x)
    #else
    static int RXN_POPCOUNT(unsigned long long x) {
        int n = 0;
        while (x) { x &= x - 1; ++n; }
        return n;
    }
    #endif
    """
    int RXN_POPCOUNT(unsigned long long x) nogil


cdef inline int64_t _row_pop(const uint64_t[:] row) nogil:
    cdef int64_t total = 0
    cdef Py_ssize_t w
    for w in range(row.shape[0]):
        total += RXN_POPCOUNT(row[w])
    return total


cdef inline double _pair(const uint64_t[:] a, const uint64_t[:] b) nogil:
    cdef int64_t inter = 0, union_ = 0
    cdef Py_ssize_t w
    for w in range(a.shape[0]):
        inter += RXN_POPCOUNT(a[w] & b[w])
        union_ += RXN_POPCOUNT(a[w] | b[w])
    if union_ == 0:
        return 1.0
    return <double> inter / <double> union_


def popcounts(rows):
    cdef const uint64_t[:, :] m = np.ascontiguousarray(rows, dtype=np.uint64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(m.shape[0], dtype=np.int64)
    cdef Py_ssize_t i
    for i in range(m.shape[0]):
        out[i] = _row_pop(m[i])
    return out


def tanimoto_pair(a, b):
    cdef const uint64_t[:] av = np.ascontiguousarray(a, dtype=np.uint64)
    cdef const uint64_t[:] bv = np.ascontiguousarray(b, dtype=np.uint64)
    return _pair(av, bv)


def tanimoto_row(query, corpus, corpus_pops=None):
    cdef const uint64_t[:] q = np.ascontiguousarray(query, dtype=np.uint64)
    cdef const uint64_t[:, :] c = np.ascontiguousarray(corpus, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(c.shape[0])
    cdef Py_ssize_t i
    for i in range(c.shape[0]):
        out[i] = _pair(q, c[i])
    return out


def tanimoto_matrix(queries, corpus):
    cdef const uint64_t[:, :] q = np.ascontiguousarray(queries, dtype=np.uint64)
    cdef const uint64_t[:, :] c = np.ascontiguousarray(corpus, dtype=np.uint64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((q.shape[0], c.shape[0]))
    cdef Py_ssize_t i, j
    for i in range(q.shape[0]):
        for j in range(c.shape[0]):
            out[i, j] = _pair(q[i], c[j])
    return out


def topk_neighbors(queries, corpus, int k):
    """Top-k most similar corpus rows per query, similarity-descending with
    ties broken toward the lower index (matches the fallback's ordering)."""
    cdef const uint64_t[:, :] q = np.ascontiguousarray(queries, dtype=np.uint64)
    cdef const uint64_t[:, :] c = np.ascontiguousarray(corpus, dtype=np.uint64)
    cdef Py_ssize_t nq = q.shape[0], nc = c.shape[0]
    if k > nc:
        k = nc
    cdef cnp.ndarray[cnp.int64_t, ndim=2] idx_out = np.empty((nq, k), dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] sim_out = np.empty((nq, k))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] sims = np.empty(nc)
    cdef Py_ssize_t i, j
    for i in range(nq):
        for j in range(nc):
            sims[j] = _pair(q[i], c[j])
        if k < nc:
            part = np.argpartition(-sims, k - 1)[:k]
        else:
            part = np.arange(nc)
        order = part[np.lexsort((part, -sims[part]))]
        idx_out[i] = order
        sim_out[i] = sims[order]
    return idx_out, sim_out
