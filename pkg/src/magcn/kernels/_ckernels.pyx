# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Twin of ``numpy_backend``: same names, same contracts. Matrix products go
straight to BLAS dgemm; the elementwise kernels are fused single passes,
which is where the speedup over chained numpy calls comes from on the small
matrices this package works with.
"""

import numpy as np

from libc.math cimport exp, tanh as c_tanh, sqrt
from scipy.linalg.cython_blas cimport dgemm

NAME = "compiled"


cdef inline void _gemm(char ta, char tb, int m, int n, int k,
                       double* a, int lda, double* b, int ldb,
                       double* c, int ldc) noexcept nogil:
    cdef double one = 1.0, zero = 0.0
    dgemm(&ta, &tb, &m, &n, &k, &one, a, &lda, b, &ldb, &zero, c, &ldc)


def matmul(double[:, ::1] a, double[:, ::1] b):
    cdef int m = a.shape[0], k = a.shape[1], n = b.shape[1]
    out = np.zeros((m, n))
    cdef double[:, ::1] c = out
    if m == 0 or n == 0 or k == 0:
        return out
    # Row-major C = A @ B is column-major C^T = B^T A^T.
    _gemm(b'N', b'N', n, m, k, &b[0, 0], n, &a[0, 0], k, &c[0, 0], n)
    return out


def matmul_tn(double[:, ::1] a, double[:, ::1] b):
    """a.T @ b for row-major a (k, m) and b (k, n)."""
    cdef int k = a.shape[0], m = a.shape[1], n = b.shape[1]
    out = np.zeros((m, n))
    cdef double[:, ::1] c = out
    if m == 0 or n == 0 or k == 0:
        return out
    _gemm(b'N', b'T', n, m, k, &b[0, 0], n, &a[0, 0], m, &c[0, 0], n)
    return out


def matmul_nt(double[:, ::1] a, double[:, ::1] b):
    """a @ b.T for row-major a (m, k) and b (n, k)."""
    cdef int m = a.shape[0], k = a.shape[1], n = b.shape[0]
    out = np.zeros((m, n))
    cdef double[:, ::1] c = out
    if m == 0 or n == 0 or k == 0:
        return out
    _gemm(b'T', b'N', n, m, k, &b[0, 0], k, &a[0, 0], k, &c[0, 0], n)
    return out


def softmax_rows(double[:, ::1] x):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] y = out
    cdef int i, j
    cdef double mx, s
    for i in range(m):
        mx = x[i, 0]
        for j in range(1, n):
            if x[i, j] > mx:
                mx = x[i, j]
        s = 0.0
        for j in range(n):
            y[i, j] = exp(x[i, j] - mx)
            s += y[i, j]
        for j in range(n):
            y[i, j] /= s
    return out


def softmax_rows_grad(double[:, ::1] y, double[:, ::1] gy):
    cdef int m = y.shape[0], n = y.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] gx = out
    cdef int i, j
    cdef double dot
    for i in range(m):
        dot = 0.0
        for j in range(n):
            dot += y[i, j] * gy[i, j]
        for j in range(n):
            gx[i, j] = y[i, j] * (gy[i, j] - dot)
    return out


def sigmoid(double[:, ::1] x):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] y = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            y[i, j] = 1.0 / (1.0 + exp(-x[i, j]))
    return out


def sigmoid_grad(double[:, ::1] y, double[:, ::1] gy):
    cdef int m = y.shape[0], n = y.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] gx = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            gx[i, j] = gy[i, j] * y[i, j] * (1.0 - y[i, j])
    return out


def tanh(double[:, ::1] x):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] y = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            y[i, j] = c_tanh(x[i, j])
    return out


def tanh_grad(double[:, ::1] y, double[:, ::1] gy):
    cdef int m = y.shape[0], n = y.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] gx = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            gx[i, j] = gy[i, j] * (1.0 - y[i, j] * y[i, j])
    return out


def relu(double[:, ::1] x):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] y = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            y[i, j] = x[i, j] if x[i, j] > 0.0 else 0.0
    return out


def relu_grad(double[:, ::1] y, double[:, ::1] gy):
    cdef int m = y.shape[0], n = y.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] gx = out
    cdef int i, j
    for i in range(m):
        for j in range(n):
            gx[i, j] = gy[i, j] if y[i, j] > 0.0 else 0.0
    return out


def l2norm_rows(double[:, ::1] x, double eps):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    norms_arr = np.empty(m)
    cdef double[:, ::1] y = out
    cdef double[::1] norms = norms_arr
    cdef int i, j
    cdef double s, r
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += x[i, j] * x[i, j]
        r = sqrt(s)
        norms[i] = r
        if r < eps:
            r = eps
        for j in range(n):
            y[i, j] = x[i, j] / r
    return out, norms_arr


def l2norm_rows_grad(double[:, ::1] x, double[::1] norms,
                     double[:, ::1] gy, double eps):
    cdef int m = x.shape[0], n = x.shape[1]
    out = np.empty((m, n))
    cdef double[:, ::1] gx = out
    cdef int i, j
    cdef double r, vdotg
    for i in range(m):
        r = norms[i]
        if r > eps:
            vdotg = 0.0
            for j in range(n):
                vdotg += x[i, j] * gy[i, j]
            for j in range(n):
                gx[i, j] = gy[i, j] / r - x[i, j] * vdotg / (r * r * r)
        else:
            for j in range(n):
                gx[i, j] = gy[i, j] / eps
    return out
