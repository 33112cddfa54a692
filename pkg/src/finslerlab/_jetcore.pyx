# cython: boundscheck=False, wraparound=False, cdivision=True
"""Hot kernel for truncated multivariate Taylor arithmetic.

The only operation that dominates runtime is the truncated product: a sparse
triple table (i, j, k) lists every coefficient pair whose product survives the
truncation, together with the target slot.  Everything else (derivative maps,
truncations) is cheap fancy indexing and stays in NumPy.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def multiply(double[::1] a, double[::1] b,
             int[::1] ti, int[::1] tj, int[::1] tk, Py_ssize_t size):
    """Truncated product of coefficient vectors a and b via a triple table."""
    out_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t t, m = ti.shape[0]
    for t in range(m):
        out[tk[t]] += a[ti[t]] * b[tj[t]]
    return out_arr


def fused_series(double[::1] u, double[::1] coef,
                 int[::1] ti, int[::1] tj, int[::1] tk, Py_ssize_t size):
    """Horner evaluation of sum_k coef[k] * u**k for a nilpotent-tail jet u.

    u must have zero constant term so the series is exact at truncation order
    len(coef) - 1.
    """
    cdef Py_ssize_t nc = coef.shape[0]
    out_arr = np.zeros(size, dtype=np.float64)
    tmp_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] tmp = tmp_arr
    cdef Py_ssize_t t, i, m = ti.shape[0]
    cdef Py_ssize_t k
    out[0] = coef[nc - 1]
    for k in range(nc - 2, -1, -1):
        for i in range(size):
            tmp[i] = 0.0
        for t in range(m):
            tmp[tk[t]] += out[ti[t]] * u[tj[t]]
        for i in range(size):
            out[i] = tmp[i]
        out[0] += coef[k]
    return out_arr
