"""Linear softmax classifier used for both views of the co-training loop.

One implementation serves the main view (dense feature vectors) and the
auxiliary view (hashed sparse text features). Training is minibatch
RMSProp on weighted softmax cross-entropy with an L2 penalty; a sample
carrying m labels contributes m instances of weight 1/m each. Weights are
zero-initialized (the objective is convex) and shuffling is seeded, so a
(data, config, seed) triple always produces the same model.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import sparse as sp

from . import kernels
from .errors import DimensionMismatchError, DivergenceError, EmptyTrainingSetError
from .lexicon import Sample
from .ontology import Ontology
from .textfeat import SparseVector, featurize, tokenize

MAIN = "main"
AUX = "aux"

CONSTANT = "constant"
LINEAR_DECAY = "linear_decay"


@dataclass
class TrainConfig:
    epochs: int = 20
    learning_rate: float = 0.01
    l2_weight: float = 1e-4
    rmsprop_decay: float = 0.9
    rmsprop_epsilon: float = 1e-8
    batch_size: int = 64
    seed: int = 0
    lr_schedule: str = CONSTANT

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.l2_weight < 0:
            raise ValueError("l2_weight must be >= 0")


def main_defaults(seed: int = 0) -> TrainConfig:
    return TrainConfig(seed=seed)


def aux_defaults(seed: int = 0) -> TrainConfig:
    # 25 epochs at starting rate 1.0 with linear decay, no L2
    return TrainConfig(
        epochs=25,
        learning_rate=1.0,
        l2_weight=0.0,
        lr_schedule=LINEAR_DECAY,
        seed=seed,
    )


@dataclass
class Model:
    view: str
    class_ids: list[str]
    dim: int  # input dimension, bias not counted
    weights: np.ndarray  # |C| x (dim + 1), bias column last
    column_map: Optional[dict[int, int]] = None  # hash bucket -> column (aux only)
    train_losses: list[float] = field(default_factory=list)

    def predict_matrix(self, X) -> np.ndarray:
        """Softmax scores for a dense (n, dim) matrix or a sparse CSR in
        model column space. Rows sum to 1."""
        if X.shape[1] != self.dim:
            raise DimensionMismatchError(f"got dim {X.shape[1]}, model expects {self.dim}")
        Z = np.asarray(X @ self.weights[:, :-1].T) + self.weights[:, -1]
        Z -= Z.max(axis=1, keepdims=True)
        P = np.exp(Z)
        P /= P.sum(axis=1, keepdims=True)
        return P

    def map_sparse(self, vectors: list[SparseVector]) -> sp.csr_matrix:
        """Remap hashed bucket indices to model columns; unseen buckets are
        dropped (their weight is zero by construction)."""
        assert self.column_map is not None
        data, indices, indptr = [], [], [0]
        for v in vectors:
            for i, val in zip(v.indices, v.values):
                col = self.column_map.get(int(i))
                if col is not None:
                    indices.append(col)
                    data.append(val)
            indptr.append(len(indices))
        return sp.csr_matrix(
            (np.array(data), np.array(indices, dtype=np.int64), np.array(indptr, dtype=np.int64)),
            shape=(len(vectors), self.dim),
        )

    def to_json(self) -> str:
        obj = {
            "view": self.view,
            "classes": self.class_ids,
            "dim": self.dim,
            "weights": [[float(w) for w in row] for row in self.weights],
            "column_map": {str(k): v for k, v in self.column_map.items()} if self.column_map is not None else None,
        }
        return json.dumps(obj, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Model":
        obj = json.loads(text)
        cmap = obj["column_map"]
        return cls(
            view=obj["view"],
            class_ids=list(obj["classes"]),
            dim=int(obj["dim"]),
            weights=np.array(obj["weights"], dtype=np.float64),
            column_map={int(k): int(v) for k, v in cmap.items()} if cmap is not None else None,
        )


def predict_scores(model: Model, features) -> dict[str, float]:
    """Softmax score per class for one input. Dense ndarray for the main
    view, SparseVector for the auxiliary view."""
    if model.view == AUX:
        if not isinstance(features, SparseVector):
            raise DimensionMismatchError("aux model expects a SparseVector")
        X = model.map_sparse([features])
    else:
        features = np.asarray(features, dtype=np.float64)
        if features.shape != (model.dim,):
            raise DimensionMismatchError(f"got shape {features.shape}, model expects ({model.dim},)")
        X = features[None, :]
    p = model.predict_matrix(X)[0]
    return {c: float(p[i]) for i, c in enumerate(model.class_ids)}


def threshold_labels(scores: dict[str, float], tau: float) -> dict[str, float]:
    """Keep classes whose score reaches tau. With softmax scores and
    tau=0.3 at most 3 classes survive."""
    if not 0 < tau <= 1:
        raise ValueError("tau must be in (0, 1]")
    return {c: s for c, s in scores.items() if s >= tau}


def _instances(data: dict[str, dict[str, float]], class_index: dict[str, int]):
    ids, ys, wts = [], [], []
    for sid in sorted(data):
        labels = data[sid]
        if not labels:
            raise EmptyTrainingSetError(f"sample {sid!r} has an empty label set")
        w = 1.0 / len(labels)
        for c in sorted(labels):
            ids.append(sid)
            ys.append(class_index[c])
            wts.append(w)
    return ids, np.array(ys, dtype=np.int64), np.array(wts, dtype=np.float64)


def text_vectors(samples: list[Sample]) -> list[SparseVector]:
    return [featurize(tokenize(s.text or "")) for s in samples]


def _full_loss(W, X, y, wts, l2):
    Z = np.asarray(X @ W.T)
    Z -= Z.max(axis=1, keepdims=True)
    logp = Z - np.log(np.exp(Z).sum(axis=1, keepdims=True))
    ce = -(wts * logp[np.arange(len(y)), y]).sum() / wts.sum()
    return float(ce + 0.5 * l2 * (W * W).sum())


def loss_and_grad(W, X, y, wts, l2):
    """Full-batch objective and its analytic gradient (dense X)."""
    Z = X @ W.T
    Z -= Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    P = E / E.sum(axis=1, keepdims=True)
    logp = Z - np.log(E.sum(axis=1, keepdims=True))
    wsum = wts.sum()
    loss = -(wts * logp[np.arange(len(y)), y]).sum() / wsum + 0.5 * l2 * (W * W).sum()
    R = P.copy()
    R[np.arange(len(y)), y] -= 1.0
    G = (R * (wts / wsum)[:, None]).T @ X + l2 * W
    return float(loss), G


def _lr_for_step(cfg: TrainConfig, step: int, total_steps: int) -> float:
    if cfg.lr_schedule == LINEAR_DECAY:
        return cfg.learning_rate * (total_steps - step) / total_steps
    return cfg.learning_rate


def train(
    data: dict[str, dict[str, float]],
    samples: list[Sample],
    view: str,
    cfg: TrainConfig,
    ontology: Ontology,
) -> Model:
    """Fit a softmax model for one view. The class space is the full
    ontology (root excluded), so later iterations can introduce classes
    without re-indexing."""
    if not data:
        raise EmptyTrainingSetError("training set is empty")
    by_id = {s.id: s for s in samples}
    missing = [sid for sid in data if sid not in by_id]
    if missing:
        raise EmptyTrainingSetError(f"training set references unknown samples: {missing[:3]}")
    ids, y, wts = _instances(data, ontology.class_index)
    C = len(ontology.class_ids)

    if view == MAIN:
        dim = by_id[ids[0]].features.shape[0]
        X = np.empty((len(ids), dim + 1), dtype=np.float64)
        for i, sid in enumerate(ids):
            f = by_id[sid].features
            if f.shape[0] != dim:
                raise DimensionMismatchError(f"sample {sid!r} has dim {f.shape[0]}, expected {dim}")
            X[i, :dim] = f
        X[:, dim] = 1.0
        column_map = None
        sparse_X = None
    elif view == AUX:
        vecs = {sid: featurize(tokenize(by_id[sid].text or "")) for sid in set(ids)}
        buckets = sorted({int(b) for v in vecs.values() for b in v.indices})
        column_map = {b: i for i, b in enumerate(buckets)}
        dim = len(buckets)
        data_a, ind_a, ptr_a = [], [], [0]
        for sid in ids:
            v = vecs[sid]
            for b, val in zip(v.indices, v.values):
                ind_a.append(column_map[int(b)])
                data_a.append(val)
            ind_a.append(dim)  # bias column
            data_a.append(1.0)
            ptr_a.append(len(ind_a))
        sparse_X = (
            np.array(data_a, dtype=np.float64),
            np.array(ind_a, dtype=np.int64),
            np.array(ptr_a, dtype=np.int64),
        )
        X = sp.csr_matrix(sparse_X, shape=(len(ids), dim + 1))
    else:
        raise ValueError(f"unknown view {view!r}")

    W = np.zeros((C, dim + 1), dtype=np.float64)
    V = np.zeros_like(W)
    n = len(ids)
    n_batches = (n + cfg.batch_size - 1) // cfg.batch_size
    total_steps = cfg.epochs * n_batches
    rng = np.random.default_rng(cfg.seed)

    losses = []
    # loss of the zero-weight model; minibatch RMSProp wobbles (and can
    # transiently overshoot at high learning rates before a decay schedule
    # settles it), so divergence is judged on finiteness and on the final
    # loss, never on transient epochs
    baseline = _full_loss(W, X, y, wts, cfg.l2_weight)
    for epoch in range(cfg.epochs):
        order = rng.permutation(n).astype(np.int64)
        lrs = np.array(
            [_lr_for_step(cfg, epoch * n_batches + b, total_steps) for b in range(n_batches)],
            dtype=np.float64,
        )
        if view == MAIN:
            kernels.sgd_epoch_dense(
                W, V, X, y, wts, order, lrs,
                cfg.l2_weight, cfg.rmsprop_decay, cfg.rmsprop_epsilon, cfg.batch_size,
            )
        else:
            kernels.sgd_epoch_sparse(
                W, V, sparse_X[0], sparse_X[1], sparse_X[2], dim + 1, y, wts, order, lrs,
                cfg.l2_weight, cfg.rmsprop_decay, cfg.rmsprop_epsilon, cfg.batch_size,
            )
        loss = _full_loss(W, X, y, wts, cfg.l2_weight)
        if not np.isfinite(loss):
            raise DivergenceError("training loss is not finite", epoch + 1)
        losses.append(loss)
    if losses[-1] > baseline:
        raise DivergenceError(
            f"final loss {losses[-1]:.4g} above the zero-model baseline {baseline:.4g}",
            cfg.epochs,
        )

    return Model(
        view=view,
        class_ids=list(ontology.class_ids),
        dim=dim,
        weights=W,
        column_map=column_map,
        train_losses=losses,
    )


def gradient_check(cfg: TrainConfig, X, y, wts=None, step: float = 1e-5) -> float:
    """Max relative error between the analytic gradient and central finite
    differences on a small dense probe."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    if wts is None:
        wts = np.ones(n)
    C = int(y.max()) + 1
    rng = np.random.default_rng(cfg.seed)
    W = 0.1 * rng.standard_normal((C, d))
    _, G = loss_and_grad(W, X, y, wts, cfg.l2_weight)
    max_err = 0.0
    for c in range(C):
        for j in range(d):
            Wp = W.copy()
            Wp[c, j] += step
            lp, _ = loss_and_grad(Wp, X, y, wts, cfg.l2_weight)
            Wm = W.copy()
            Wm[c, j] -= step
            lm, _ = loss_and_grad(Wm, X, y, wts, cfg.l2_weight)
            fd = (lp - lm) / (2 * step)
            denom = max(1e-8, abs(fd) + abs(G[c, j]))
            max_err = max(max_err, abs(fd - G[c, j]) / denom)
    return max_err
