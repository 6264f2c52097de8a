"""The alternating two-view training loop.

Bootstraps from lexicon matches over the text descriptions, then
alternates: train the feature-view (main) classifier on the current
labeled set, reconcile its thresholded predictions with the initial
distant labels to teach the text-view (auxiliary) classifier, and vice
versa. Reconciliation is always against the initial distant labels, never
against a previous iteration's resolved set, which prevents semantic
drift. The loop runs a fixed number of iterations; a changed-prediction
fraction is recorded per half-iteration as a convergence diagnostic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import learner, metrics, resolve
from .errors import EmptyTrainingSetError, NoSupervisionError
from .lexicon import Lexicon, Sample, distant_labels
from .ontology import Ontology

LabelSet = dict[str, float]
TrainingSet = dict[str, LabelSet]


@dataclass
class CoTrainConfig:
    n_iter: int = 5
    tau: float = 0.3
    strategy: str = resolve.RELATION
    seed: int = 0
    main_cfg: Optional[learner.TrainConfig] = None
    aux_cfg: Optional[learner.TrainConfig] = None
    extra_labeled: Optional[TrainingSet] = None

    def __post_init__(self):
        if self.n_iter < 1:
            raise ValueError("n_iter must be >= 1")
        if not 0 < self.tau <= 1:
            raise ValueError("tau must be in (0, 1]")
        if self.main_cfg is None:
            self.main_cfg = learner.main_defaults(seed=self.seed)
        if self.aux_cfg is None:
            self.aux_cfg = learner.aux_defaults(seed=self.seed + 1)


@dataclass
class RunResult:
    main: learner.Model
    aux: learner.Model
    history: list[dict] = field(default_factory=list)
    d0_size: int = 0


def _threshold_rows(P: np.ndarray, ids: list[str], class_ids: list[str], tau: float) -> dict[str, LabelSet]:
    out = {}
    for i, sid in enumerate(ids):
        row = P[i]
        out[sid] = {class_ids[j]: float(row[j]) for j in np.flatnonzero(row >= tau)}
    return out


def _changed_fraction(prev: Optional[dict], cur: dict) -> Optional[float]:
    if prev is None:
        return None
    ids = prev.keys() | cur.keys()
    if not ids:
        return 0.0
    changed = sum(1 for sid in ids if set(prev.get(sid, ())) != set(cur.get(sid, ())))
    return changed / len(ids)


def _distinct_classes(ts: dict[str, LabelSet]) -> int:
    return len({c for labels in ts.values() for c in labels})


def _apply_extra(ts: TrainingSet, extra: Optional[TrainingSet], allowed_ids=None) -> TrainingSet:
    if not extra:
        return ts
    out = dict(ts)
    for sid, labels in extra.items():
        if allowed_ids is not None and sid not in allowed_ids:
            continue
        out[sid] = dict(labels)  # trusted labels win over resolution
    return out


def run(
    samples: list[Sample],
    o: Ontology,
    lex: Lexicon,
    cfg: CoTrainConfig,
    gold: Optional[dict[str, set]] = None,
    d0: Optional[TrainingSet] = None,
) -> RunResult:
    """Run the full loop and return both trained models plus a history
    with one record per half-iteration. ``d0`` overrides the lexicon
    bootstrap (used by the noise experiments); ``gold`` adds evaluation
    metrics to the history."""
    if not samples:
        raise EmptyTrainingSetError("corpus is empty")
    if d0 is None:
        d0 = distant_labels(lex, samples)
    if not d0:
        raise NoSupervisionError("no organic supervision found: no text matched any lexicon term")

    all_ids = [s.id for s in samples]
    X_all = np.stack([s.features for s in samples])
    text_samples = [s for s in samples if s.text is not None]
    text_ids = [s.id for s in text_samples]
    text_id_set = set(text_ids)
    text_vecs = learner.text_vectors(text_samples)

    history: list[dict] = []
    d_prev = _apply_extra(dict(d0), cfg.extra_labeled)
    prev_main_preds = prev_aux_preds = None
    f = f_t = None

    for k in range(1, cfg.n_iter + 1):
        f = learner.train(d_prev, samples, learner.MAIN, cfg.main_cfg, o)
        P = f.predict_matrix(X_all)
        main_preds = _threshold_rows(P, all_ids, f.class_ids, cfg.tau)
        d_t = resolve.resolve_all(cfg.strategy, d0, main_preds, o)
        d_t = {sid: v for sid, v in d_t.items() if sid in text_id_set}
        d_t = _apply_extra(d_t, cfg.extra_labeled, allowed_ids=text_id_set)
        if not d_t:
            raise EmptyTrainingSetError(
                f"iteration {k}: strategy {cfg.strategy!r} produced an empty text-view training set"
            )
        rec = {
            "iteration": k,
            "view": "main",
            "train_size": len(d_prev),
            "train_classes": _distinct_classes(d_prev),
            "final_loss": f.train_losses[-1],
            "produced_size": len(d_t),
            "produced_classes": _distinct_classes(d_t),
            "changed_fraction": _changed_fraction(prev_main_preds, main_preds),
        }
        if gold is not None:
            # evaluate what the system would emit: thresholded annotations,
            # the same artifact cmd_annotate writes and cmd_evaluate scores
            curve = metrics.pr_curve(main_preds, gold, o)
            rec["auprc"] = metrics.auprc(curve)
        history.append(rec)
        prev_main_preds = main_preds

        f_t = learner.train(d_t, samples, learner.AUX, cfg.aux_cfg, o)
        P_t = f_t.predict_matrix(f_t.map_sparse(text_vecs))
        aux_preds = _threshold_rows(P_t, text_ids, f_t.class_ids, cfg.tau)
        # samples without text keep their main-view predictions; distant
        # labels are absent for them so resolution passes those through
        preds_for_dk = dict(aux_preds)
        for sid in all_ids:
            if sid not in text_id_set:
                preds_for_dk[sid] = main_preds[sid]
        d_k = resolve.resolve_all(cfg.strategy, d0, preds_for_dk, o)
        d_k = _apply_extra(d_k, cfg.extra_labeled)
        if not d_k:
            raise EmptyTrainingSetError(
                f"iteration {k}: strategy {cfg.strategy!r} produced an empty training set"
            )
        rec = {
            "iteration": k,
            "view": "aux",
            "train_size": len(d_t),
            "train_classes": _distinct_classes(d_t),
            "final_loss": f_t.train_losses[-1],
            "produced_size": len(d_k),
            "produced_classes": _distinct_classes(d_k),
            "changed_fraction": _changed_fraction(prev_aux_preds, aux_preds),
        }
        if gold is not None:
            gold_text = {sid: v for sid, v in gold.items() if sid in text_id_set}
            curve = metrics.pr_curve(aux_preds, gold_text, o)
            rec["auprc"] = metrics.auprc(curve)
        history.append(rec)
        prev_aux_preds = aux_preds

        d_prev = d_k

    return RunResult(main=f, aux=f_t, history=history, d0_size=len(d0))


def annotate(main: learner.Model, samples: list[Sample], tau: float) -> dict[str, LabelSet]:
    """Thresholded main-view scores per sample; a sample may end up with
    no labels at all."""
    X = np.stack([s.features for s in samples])
    P = main.predict_matrix(X)
    return _threshold_rows(P, [s.id for s in samples], main.class_ids, tau)


def history_json(history: list[dict]) -> str:
    return json.dumps(history, sort_keys=True, indent=2)
