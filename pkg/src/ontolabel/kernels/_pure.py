"""Numpy implementation of the minibatch RMSProp softmax epoch.

Semantics are shared with the Cython kernel in _fast.pyx: one call runs a
single epoch over instances in the given order, updating the weight matrix
W and the RMSProp accumulator V in place. The per-batch objective is the
weight-normalized cross-entropy of the batch plus (l2/2)*||W||^2.
"""

import numpy as np
from scipy import sparse as sp

BACKEND_NAME = "pure"


def _batch_update(W, V, Xb, yb, wb, lr, l2, decay, eps):
    Z = np.asarray(Xb @ W.T)
    Z -= Z.max(axis=1, keepdims=True)
    P = np.exp(Z)
    P /= P.sum(axis=1, keepdims=True)
    P[np.arange(len(yb)), yb] -= 1.0
    P *= (wb / wb.sum())[:, None]
    G = np.asarray(P.T @ Xb)
    if l2 > 0.0:
        G += l2 * W
    V *= decay
    V += (1.0 - decay) * G * G
    W -= lr * G / (np.sqrt(V) + eps)


def sgd_epoch_dense(W, V, X, y, wts, order, lrs, l2, decay, eps, batch_size):
    n = len(order)
    for b, start in enumerate(range(0, n, batch_size)):
        idx = order[start : start + batch_size]
        _batch_update(W, V, X[idx], y[idx], wts[idx], lrs[b], l2, decay, eps)


def sgd_epoch_sparse(W, V, data, indices, indptr, n_cols, y, wts, order, lrs, l2, decay, eps, batch_size):
    n = len(order)
    X = sp.csr_matrix((data, indices, indptr), shape=(len(y), n_cols), copy=False)
    for b, start in enumerate(range(0, n, batch_size)):
        idx = order[start : start + batch_size]
        _batch_update(W, V, X[idx], y[idx], wts[idx], lrs[b], l2, decay, eps)
