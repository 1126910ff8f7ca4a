# cython: boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled grouped log-likelihood kernel.

Mirrors the NumPy fallback exactly: mixed-radix int64 row keys (target
columns in the low digits), sort, one run scan tallying cell and group
sizes into a single histogram, then the canonical evaluation of
sum_m (C_m - G_m) * m * log(m) in a log-prime basis: integer
coefficients per prime first, one float dot product with log(p) last,
ascending in p. Likelihoods that tie as real numbers come out bit-equal,
and a deterministic target yields exactly 0.0, matching the fallback's
semantics.
"""

from libc.math cimport log, log2, sqrt
from libc.stdint cimport int32_t, int64_t
from libc.stdlib cimport calloc, free, malloc
from libcpp.algorithm cimport sort


def grouped_ll_radix(const int32_t[:, ::1] codes, const int64_t[::1] cols,
                     const int64_t[::1] strides, int64_t t_prod, bint use_log2,
                     const int32_t[::1] spf):
    """Log-likelihood of the low-digit columns given the high-digit ones.

    The caller guarantees the full key space fits in an int64 and that
    ``spf`` maps every size up to the row count to its smallest prime
    factor.
    """
    cdef Py_ssize_t n_rows = codes.shape[1]
    cdef Py_ssize_t ncols = cols.shape[0]
    cdef int64_t *keys = <int64_t *> malloc(n_rows * sizeof(int64_t))
    cdef int64_t *hist = <int64_t *> calloc(n_rows + 1, sizeof(int64_t))
    cdef int64_t *coeff = <int64_t *> calloc(n_rows + 1, sizeof(int64_t))
    # distinct run sizes number at most 2*sqrt(2N) (cells plus groups)
    # and each contributes at most 63 distinct primes
    cdef Py_ssize_t cap = <Py_ssize_t> (63 * (2.0 * sqrt(2.0 * n_rows) + 4.0))
    cdef int64_t *touched = <int64_t *> malloc(cap * sizeof(int64_t))
    if keys == NULL or hist == NULL or coeff == NULL or touched == NULL:
        free(keys); free(hist); free(coeff); free(touched)
        raise MemoryError()

    cdef Py_ssize_t i, j, cell_start, group_start, m, ntouched
    cdef int64_t stride, prev_key, prev_group, group, weight, x, p, e, k, last
    cdef const int32_t *col
    cdef double acc = 0.0

    try:
        with nogil:
            col = &codes[<Py_ssize_t> cols[0], 0]
            stride = strides[0]
            for i in range(n_rows):
                keys[i] = col[i] * stride
            for j in range(1, ncols):
                col = &codes[<Py_ssize_t> cols[j], 0]
                stride = strides[j]
                for i in range(n_rows):
                    keys[i] += col[i] * stride
            sort(keys, keys + n_rows)

            prev_key = keys[0]
            prev_group = prev_key / t_prod
            cell_start = 0
            group_start = 0
            for i in range(1, n_rows + 1):
                if i == n_rows:
                    hist[i - cell_start] += 1
                    hist[i - group_start] -= 1
                elif keys[i] != prev_key:
                    hist[i - cell_start] += 1
                    cell_start = i
                    prev_key = keys[i]
                    group = prev_key / t_prod
                    if group != prev_group:
                        hist[i - group_start] -= 1
                        group_start = i
                        prev_group = group

            ntouched = 0
            for m in range(2, n_rows + 1):
                if hist[m] != 0:
                    weight = hist[m] * m
                    x = m
                    while x > 1:
                        p = spf[x]
                        e = 0
                        while x % p == 0:
                            x = x / p
                            e += 1
                        coeff[p] += weight * e
                        touched[ntouched] = p
                        ntouched += 1
            sort(touched, touched + ntouched)

            last = 0
            for i in range(ntouched):
                p = touched[i]
                if p == last:
                    continue
                last = p
                k = coeff[p]
                if k != 0:
                    if use_log2:
                        acc += k * log2(<double> p)
                    else:
                        acc += k * log(<double> p)
    finally:
        free(keys)
        free(hist)
        free(coeff)
        free(touched)
    return acc
