# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Cython implementation of the minibatch RMSProp softmax epoch.

Mirrors kernels._pure; see that module for the contract. Results may
differ from the numpy path by float rounding (different summation order)
but agree to ~1e-9 after training.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, sqrt, fmax
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()

BACKEND_NAME = "fast"


cdef void _rmsprop_apply(double[:, ::1] W, double[:, ::1] V, double[:, ::1] G,
                         double lr, double l2, double decay, double eps) noexcept nogil:
    cdef Py_ssize_t C = W.shape[0], D = W.shape[1], c, j
    cdef double g
    for c in range(C):
        for j in range(D):
            g = G[c, j]
            if l2 > 0.0:
                g += l2 * W[c, j]
            V[c, j] = decay * V[c, j] + (1.0 - decay) * g * g
            W[c, j] -= lr * g / (sqrt(V[c, j]) + eps)


def sgd_epoch_dense(double[:, ::1] W, double[:, ::1] V,
                    double[:, ::1] X, long long[::1] y, double[::1] wts,
                    long long[::1] order, double[::1] lrs,
                    double l2, double decay, double eps, Py_ssize_t batch_size):
    # The two O(bsz*C*D) products (logits and gradient) go through BLAS
    # dgemm on a contiguous copy of the batch rows; only the O(bsz*C)
    # softmax stays scalar.
    cdef Py_ssize_t n = order.shape[0], C = W.shape[0], D = W.shape[1]
    cdef Py_ssize_t start, bi, b, i, c, j, bsz
    cdef double zmax, zsum, wsum, coef
    cdef int im, ik, in_, ld
    cdef double one = 1.0, zero = 0.0
    cdef char trN = b'N', trT = b'T'
    G_np = np.empty((C, D), dtype=np.float64)
    P_np = np.empty((batch_size, C), dtype=np.float64)
    Xb_np = np.empty((batch_size, D), dtype=np.float64)
    cdef double[:, ::1] G = G_np
    cdef double[:, ::1] P = P_np
    cdef double[:, ::1] Xb = Xb_np
    b = 0
    start = 0
    while start < n:
        bsz = min(batch_size, n - start)
        wsum = 0.0
        for bi in range(bsz):
            i = order[start + bi]
            wsum += wts[i]
            for j in range(D):
                Xb[bi, j] = X[i, j]
        # P[:bsz] = Xb[:bsz] @ W.T  (row-major via column-major transpose)
        im = <int> C; in_ = <int> bsz; ik = <int> D; ld = <int> D
        dgemm(&trT, &trN, &im, &in_, &ik, &one,
              &W[0, 0], &ld, &Xb[0, 0], &ld, &zero, &P[0, 0], &im)
        for bi in range(bsz):
            i = order[start + bi]
            zmax = -1e300
            for c in range(C):
                zmax = fmax(zmax, P[bi, c])
            zsum = 0.0
            for c in range(C):
                P[bi, c] = exp(P[bi, c] - zmax)
                zsum += P[bi, c]
            coef = wts[i] / wsum
            for c in range(C):
                P[bi, c] = P[bi, c] / zsum * coef
            P[bi, y[i]] -= coef
        # G = P[:bsz].T @ Xb[:bsz]
        im = <int> D; in_ = <int> C; ik = <int> bsz
        dgemm(&trN, &trT, &im, &in_, &ik, &one,
              &Xb[0, 0], &im, &P[0, 0], &in_, &zero, &G[0, 0], &im)
        _rmsprop_apply(W, V, G, lrs[b], l2, decay, eps)
        start += batch_size
        b += 1


def sgd_epoch_sparse(double[:, ::1] W, double[:, ::1] V,
                     double[::1] data, long long[::1] indices, long long[::1] indptr,
                     Py_ssize_t n_cols, long long[::1] y, double[::1] wts,
                     long long[::1] order, double[::1] lrs,
                     double l2, double decay, double eps, Py_ssize_t batch_size):
    cdef Py_ssize_t n = order.shape[0], C = W.shape[0], D = W.shape[1]
    cdef Py_ssize_t start, bi, b, i, c, j, k, bsz
    cdef double zmax, zsum, wsum, coef, acc, p
    G_np = np.empty((C, D), dtype=np.float64)
    P_np = np.empty((batch_size, C), dtype=np.float64)
    cdef double[:, ::1] G = G_np
    cdef double[:, ::1] P = P_np
    b = 0
    start = 0
    while start < n:
        bsz = min(batch_size, n - start)
        wsum = 0.0
        for bi in range(bsz):
            wsum += wts[order[start + bi]]
        for c in range(C):
            for j in range(D):
                G[c, j] = 0.0
        for bi in range(bsz):
            i = order[start + bi]
            zmax = -1e300
            for c in range(C):
                acc = 0.0
                for k in range(indptr[i], indptr[i + 1]):
                    acc += W[c, indices[k]] * data[k]
                P[bi, c] = acc
                zmax = fmax(zmax, acc)
            zsum = 0.0
            for c in range(C):
                P[bi, c] = exp(P[bi, c] - zmax)
                zsum += P[bi, c]
            coef = wts[i] / wsum
            for c in range(C):
                P[bi, c] = P[bi, c] / zsum * coef
            P[bi, y[i]] -= coef
            for c in range(C):
                p = P[bi, c]
                for k in range(indptr[i], indptr[i + 1]):
                    G[c, indices[k]] += p * data[k]
        _rmsprop_apply(W, V, G, lrs[b], l2, decay, eps)
        start += batch_size
        b += 1
