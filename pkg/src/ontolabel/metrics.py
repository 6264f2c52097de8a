"""Ontology-based micro precision/recall, PR curves, AUPRC and precision
at fixed recall.

Every predicted and true class is expanded with all its ancestors (root
excluded) before pooling counts over samples. Predicting an ancestor of
the true class therefore earns partial credit, while a class in an
unrelated branch earns none.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .errors import UnknownClassError
from .ontology import Ontology


@dataclass
class PRPoint:
    recall: float
    precision: float
    threshold: float


@dataclass
class PRCurve:
    points: list[PRPoint]  # ascending recall, strictly descending threshold
    max_achieved_recall: float


def ontology_pr(
    pred: Mapping[str, set],
    gold: Mapping[str, set],
    o: Ontology,
) -> tuple[float, float]:
    """Micro precision/recall after ancestor expansion. Sample ids present
    in pred but not gold are ignored (counted, not an error). Precision of
    zero predictions is 1.0 by convention."""
    inter = pred_total = gold_total = 0
    for sid, gold_labels in gold.items():
        ep = o.expand(pred.get(sid, ()))
        eg = o.expand(gold_labels)
        inter += len(ep & eg)
        pred_total += len(ep)
        gold_total += len(eg)
    precision = inter / pred_total if pred_total else 1.0
    recall = inter / gold_total if gold_total else 0.0
    return precision, recall


def pr_curve(
    scored: Mapping[str, Mapping[str, float]],
    gold: Mapping[str, set],
    o: Ontology,
) -> PRCurve:
    """Exact curve over the distinct score values (descending), plus the
    1.0 endpoint. Computed incrementally: lowering the threshold only adds
    (sample, class) pairs, so per-sample expansions grow monotonically.

    Points with no predictions at all (vacuous precision 1.0) are dropped
    unless the curve would otherwise be empty.
    """
    gexp = {sid: frozenset(o.expand(labels)) for sid, labels in gold.items()}
    gold_total = sum(len(v) for v in gexp.values())

    events = []  # (score, sid, class)
    ignored = 0
    for sid, labels in scored.items():
        if sid not in gexp:
            ignored += 1
            continue
        for c, s in labels.items():
            if c not in o:
                raise UnknownClassError(f"unknown class id {c!r}")
            events.append((s, sid, c))
    events.sort(key=lambda e: (-e[0], e[1], e[2]))

    cur_exp: dict[str, set] = {sid: set() for sid in gexp}
    inter = pred_total = 0
    points: list[PRPoint] = []

    def emit(threshold):
        precision = inter / pred_total if pred_total else 1.0
        recall = inter / gold_total if gold_total else 0.0
        points.append(PRPoint(recall, precision, threshold))

    if not events or events[0][0] < 1.0:
        emit(1.0)
    i = 0
    while i < len(events):
        score = events[i][0]
        while i < len(events) and events[i][0] == score:
            _, sid, c = events[i]
            have = cur_exp[sid]
            for a in o.expand([c]):
                if a not in have:
                    have.add(a)
                    pred_total += 1
                    if a in gexp[sid]:
                        inter += 1
            i += 1
        emit(score)

    points = _drop_vacuous(points)
    return PRCurve(points=points, max_achieved_recall=points[-1].recall if points else 0.0)


def _drop_vacuous(points: list[PRPoint]) -> list[PRPoint]:
    # a threshold above every score predicts nothing: drop that vacuous
    # point unless it is all we have
    if len(points) > 1 and points[0].threshold == 1.0 and points[0].recall == 0.0 and points[0].precision == 1.0:
        return points[1:]
    return points


def auprc(curve: PRCurve) -> float:
    """Trapezoidal area under precision over recall, the first point
    extended horizontally back to recall 0; nothing beyond the achieved
    recall is extrapolated."""
    if not curve.points:
        return 0.0
    pts = curve.points
    area = pts[0].recall * pts[0].precision
    for a, b in zip(pts, pts[1:]):
        area += (b.recall - a.recall) * (a.precision + b.precision) / 2.0
    return area


def precision_at_recall(curve: PRCurve, r: float) -> tuple[float, bool]:
    """Linear interpolation of precision at recall r. Returns (value,
    reached); (0.0, False) when r exceeds the achieved recall."""
    if not 0 <= r <= 1:
        raise ValueError("recall must be in [0, 1]")
    if not curve.points or r > curve.max_achieved_recall:
        return 0.0, False
    pts = curve.points
    if r <= pts[0].recall:
        return pts[0].precision, True
    for a, b in zip(pts, pts[1:]):
        if a.recall <= r <= b.recall:
            if b.recall == a.recall:
                return b.precision, True
            t = (r - a.recall) / (b.recall - a.recall)
            return a.precision + t * (b.precision - a.precision), True
    return pts[-1].precision, True


def curve_tsv(curve: PRCurve) -> str:
    lines = ["threshold\trecall\tprecision"]
    for p in curve.points:
        lines.append(f"{p.threshold!r}\t{p.recall!r}\t{p.precision!r}")
    return "\n".join(lines) + "\n"


def report(curve: PRCurve, n_samples: int, n_classes_predicted: int) -> dict:
    p05, reached = precision_at_recall(curve, 0.5)
    return {
        "auprc": auprc(curve),
        "precision_at_0.5": p05,
        "precision_at_0.5_reached": reached,
        "max_achieved_recall": curve.max_achieved_recall,
        "n_samples": n_samples,
        "n_classes_predicted": n_classes_predicted,
    }
