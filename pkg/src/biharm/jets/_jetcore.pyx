# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled series kernels; same contract as ``_kernels``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef void _mul_row(const double* a, const double* b, double* out, Py_ssize_t size,
                   const Py_ssize_t* ia, const Py_ssize_t* ib,
                   const Py_ssize_t* starts) noexcept nogil:
    cdef Py_ssize_t g, t
    cdef double s
    for g in range(size):
        s = 0.0
        for t in range(starts[g], starts[g + 1]):
            s += a[ia[t]] * b[ib[t]]
        out[g] = s


def mul(const double[:, ::1] a, const double[:, ::1] b,
        const Py_ssize_t[::1] mul_a, const Py_ssize_t[::1] mul_b,
        const Py_ssize_t[::1] mul_starts):
    cdef Py_ssize_t rows = a.shape[0], size = a.shape[1], r
    out = np.empty((rows, size), dtype=np.float64)
    cdef double[:, ::1] o = out
    if rows == 0:
        return out
    with nogil:
        for r in range(rows):
            _mul_row(&a[r, 0], &b[r, 0], &o[r, 0], size,
                     &mul_a[0], &mul_b[0], &mul_starts[0])
    return out


def compose(const double[:, ::1] d, const double[:, ::1] coefs,
            const Py_ssize_t[::1] mul_a, const Py_ssize_t[::1] mul_b,
            const Py_ssize_t[::1] mul_starts):
    cdef Py_ssize_t rows = d.shape[0], size = d.shape[1]
    cdef Py_ssize_t order = coefs.shape[1] - 1
    cdef Py_ssize_t r, k, g
    out = np.zeros((rows, size), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[::1] tmp = np.empty(size, dtype=np.float64)
    if rows == 0:
        return out
    with nogil:
        for r in range(rows):
            o[r, 0] = coefs[r, order]
            for g in range(1, size):
                o[r, g] = 0.0
            for k in range(order - 1, -1, -1):
                _mul_row(&o[r, 0], &d[r, 0], &tmp[0], size,
                         &mul_a[0], &mul_b[0], &mul_starts[0])
                for g in range(size):
                    o[r, g] = tmp[g]
                o[r, 0] += coefs[r, k]
    return out
