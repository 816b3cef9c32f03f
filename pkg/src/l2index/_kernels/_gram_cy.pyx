# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Gram assembly.

Monomial values are built per node by power recurrences straight into a
column-major block, and each block is folded into the Gram matrix with a
Hermitian rank-k update (BLAS ``zherk``).  Chunking matches the numpy
fallback so both accumulate in the same order.
"""
import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport zherk

CHUNK = 2048


def gram(u, omega, exps, Py_ssize_t chunk=CHUNK):
    u = np.ascontiguousarray(u, dtype=complex)
    omega = np.ascontiguousarray(omega, dtype=float)
    exps = np.ascontiguousarray(exps, dtype=np.intp)
    cdef const double complex[:, ::1] uv = u
    cdef const double[::1] om = omega
    cdef const Py_ssize_t[:, ::1] ex = exps
    cdef Py_ssize_t M = uv.shape[0], n = uv.shape[1], nb = ex.shape[0]
    cdef Py_ssize_t maxdeg = int(exps.max()) if nb else 0

    G_arr = np.zeros((nb, nb), dtype=complex, order="F")
    V_arr = np.empty((chunk, nb), dtype=complex)
    pw_arr = np.empty((n, maxdeg + 1), dtype=complex)
    cdef double complex[::1, :] G = G_arr
    cdef double complex[:, ::1] V = V_arr
    cdef double complex[:, ::1] pw = pw_arr

    cdef Py_ssize_t start, k, i, j, d, b
    cdef double sw
    cdef double complex v, x
    cdef int nb_i = <int>nb, k_i, ld = <int>nb
    cdef double alpha = 1.0, beta = 1.0
    cdef char uplo = b'U', trans = b'N'

    if nb == 0:
        return G_arr
    start = 0
    while start < M:
        k = min(chunk, M - start)
        for i in range(k):
            sw = sqrt(om[start + i])
            for j in range(n):
                x = uv[start + i, j]
                pw[j, 0] = 1.0
                for d in range(1, maxdeg + 1):
                    pw[j, d] = pw[j, d - 1] * x
            for b in range(nb):
                v = sw
                for j in range(n):
                    v = v * pw[j, ex[b, j]]
                V[i, b] = v
        k_i = <int>k
        # V viewed column-major is (nb x k) with leading dimension nb
        zherk(&uplo, &trans, &nb_i, &k_i, &alpha, &V[0, 0], &ld, &beta, &G[0, 0], &ld)
        start += k

    for b in range(nb):
        for j in range(b + 1, nb):
            G[j, b] = G[b, j].conjugate()
    return np.ascontiguousarray(G_arr)
