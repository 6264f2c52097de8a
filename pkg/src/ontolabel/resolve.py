"""Per-sample reconciliation of distant-supervision labels with classifier
predictions.

Five strategies. When no distant labels exist for a sample, every strategy
passes the prediction through. The hierarchy-aware strategy walks all
(distant, predicted) pairs: equal labels survive, of a hierarchically
related pair the more specific one survives, unrelated pairs contribute
nothing. Scores come from the side that contributed a label; when both
sides contributed, the larger score wins. Samples resolving to an empty
set are dropped from the produced training set.
"""

from __future__ import annotations

from typing import Mapping, Optional

from .errors import UnknownClassError
from .ontology import EQUAL, FIRST_MORE_SPECIFIC, SECOND_MORE_SPECIFIC, Ontology

STANDARD = "standard"
PREDICT = "predict"
UNION = "union"
INTERSECT = "intersect"
RELATION = "relation"

STRATEGIES = (STANDARD, PREDICT, UNION, INTERSECT, RELATION)

LabelSet = dict[str, float]


def _merge(out: LabelSet, c: str, score: float):
    out[c] = max(out.get(c, 0.0), score)


def resolve_sample(
    strategy: str,
    distant: Optional[LabelSet],
    predicted: LabelSet,
    o: Ontology,
) -> LabelSet:
    for c in list(distant or ()) + list(predicted):
        if c not in o:
            raise UnknownClassError(f"unknown class id {c!r}")
    if not distant:
        return dict(predicted)
    if strategy == STANDARD:
        return dict(distant)
    if strategy == PREDICT:
        return dict(predicted)
    if strategy == UNION:
        out: LabelSet = dict(distant)
        for c, s in predicted.items():
            _merge(out, c, s)
        return out
    if strategy == INTERSECT:
        return {c: max(distant[c], predicted[c]) for c in distant.keys() & predicted.keys()}
    if strategy == RELATION:
        out = {}
        for c1, s1 in distant.items():
            for c2, s2 in predicted.items():
                rel = o.specificity_relation(c1, c2)
                if rel == EQUAL:
                    _merge(out, c1, max(s1, s2))
                elif rel == FIRST_MORE_SPECIFIC:
                    _merge(out, c1, s1)
                elif rel == SECOND_MORE_SPECIFIC:
                    _merge(out, c2, s2)
        return out
    raise ValueError(f"unknown strategy {strategy!r}")


def resolve_all(
    strategy: str,
    distant: Mapping[str, LabelSet],
    predictions: Mapping[str, LabelSet],
    o: Ontology,
) -> dict[str, LabelSet]:
    """Apply resolve_sample over the union of sample ids; empty results
    are omitted."""
    out: dict[str, LabelSet] = {}
    for sid in sorted(distant.keys() | predictions.keys()):
        resolved = resolve_sample(strategy, distant.get(sid), predictions.get(sid, {}), o)
        if resolved:
            out[sid] = resolved
    return out
