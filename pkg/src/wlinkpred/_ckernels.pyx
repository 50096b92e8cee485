# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled distance-2 scoring and triangle sums.

Must stay in lock-step with ``_pykernels``: same loop nesting, same
accumulation order, so both backends return bit-identical results.
"""
import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()

BACKEND = "cython"


def score_rows(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
               const double[::1] weights, const double[::1] denom, int mode,
               Py_ssize_t lo, Py_ssize_t hi):
    """Scores of non-adjacent pairs (x, y), lo <= x < hi, y > x.

    mode 0: sum 1/denom[z]; 1: sum (w_xz + w_zy)/denom[z];
    2: sum w_xz*w_zy/denom[z]. Output is sorted by (x, y).
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef vector[cnp.int64_t] rows, cols
    cdef vector[double] vals
    cdef vector[cnp.int64_t] touched
    cdef double[::1] acc = np.zeros(n)
    cdef cnp.int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t x, a, b, z, y, t
    cdef double wxz, c
    with nogil:
        for x in range(lo, hi):
            for a in range(indptr[x], indptr[x + 1]):
                mark[indices[a]] = x
            mark[x] = x
            for a in range(indptr[x], indptr[x + 1]):
                z = indices[a]
                wxz = weights[a]
                for b in range(indptr[z], indptr[z + 1]):
                    y = indices[b]
                    if y <= x or mark[y] == x:
                        continue
                    if mode == 0:
                        c = 1.0 / denom[z]
                    elif mode == 1:
                        c = (wxz + weights[b]) / denom[z]
                    else:
                        c = wxz * weights[b] / denom[z]
                    if acc[y] == 0.0:
                        touched.push_back(y)
                    acc[y] += c
            _sort(touched)
            for t in range(<Py_ssize_t>touched.size()):
                y = touched[t]
                if acc[y] > 0.0:
                    rows.push_back(x)
                    cols.push_back(y)
                    vals.push_back(acc[y])
                acc[y] = 0.0
            touched.clear()
    m = rows.size()
    r = np.empty(m, dtype=np.int64)
    k = np.empty(m, dtype=np.int64)
    v = np.empty(m, dtype=np.float64)
    cdef cnp.int64_t[::1] rv = r, kv = k
    cdef double[::1] vv = v
    for t in range(<Py_ssize_t>m):
        rv[t] = rows[t]
        kv[t] = cols[t]
        vv[t] = vals[t]
    return r, k, v


cdef extern from "<algorithm>" namespace "std" nogil:
    void std_sort "std::sort"[Iter](Iter first, Iter last)


cdef inline void _sort(vector[cnp.int64_t]& v) noexcept nogil:
    std_sort(v.begin(), v.end())


def triangle_sums(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices,
                  const double[::1] weights):
    """Per node i: count of ordered linked neighbour pairs, and the sum of
    w_ij * w_jk * w_ki over the same pairs."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    tu = np.zeros(n)
    tw = np.zeros(n)
    cdef double[::1] tri_u = tu, tri_w = tw
    cdef double[::1] wi = np.zeros(n)
    cdef cnp.int64_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef Py_ssize_t i, a, b, j, k
    cdef double w_ij
    with nogil:
        for i in range(n):
            for a in range(indptr[i], indptr[i + 1]):
                mark[indices[a]] = i
                wi[indices[a]] = weights[a]
            for a in range(indptr[i], indptr[i + 1]):
                j = indices[a]
                w_ij = weights[a]
                for b in range(indptr[j], indptr[j + 1]):
                    k = indices[b]
                    if mark[k] == i:
                        tri_u[i] += 1.0
                        tri_w[i] += w_ij * weights[b] * wi[k]
    return tu, tw
