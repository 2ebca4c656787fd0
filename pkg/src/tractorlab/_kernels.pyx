# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled jet hot kernels: truncated Taylor multiply-accumulate."""

import numpy as np

COMPILED = True


def jet_mul2(const double[:, ::1] a, const double[:, ::1] b,
             const int[::1] i_idx, const int[::1] j_idx, const int[::1] k_idx,
             const double[:, ::1] scatter, double[:, ::1] out):
    cdef Py_ssize_t B = a.shape[0]
    cdef Py_ssize_t M = i_idx.shape[0]
    cdef Py_ssize_t t, p
    cdef int i, j, k
    for t in range(M):
        i = i_idx[t]; j = j_idx[t]; k = k_idx[t]
        for p in range(B):
            out[p, k] += a[p, i] * b[p, j]
    return np.asarray(out)


def jet_matmul4(const double[:, :, :, ::1] a, const double[:, :, :, ::1] b,
                const int[::1] i_idx, const int[::1] j_idx, const int[::1] k_idx,
                const double[:, ::1] scatter, double[:, :, :, ::1] out):
    cdef Py_ssize_t B = a.shape[0]
    cdef Py_ssize_t r = a.shape[1]
    cdef Py_ssize_t kdim = a.shape[2]
    cdef Py_ssize_t c = b.shape[2]
    cdef Py_ssize_t M = i_idx.shape[0]
    cdef Py_ssize_t t, p, x, y, z
    cdef int i, j, k
    cdef double acc
    for t in range(M):
        i = i_idx[t]; j = j_idx[t]; k = k_idx[t]
        for p in range(B):
            for x in range(r):
                for y in range(c):
                    acc = 0.0
                    for z in range(kdim):
                        acc += a[p, x, z, i] * b[p, z, y, j]
                    out[p, x, y, k] += acc
    return np.asarray(out)
