"""PR curves, trapezoidal AUPRC and interpolated precision-at-recall."""

import numpy as np
import pytest

from conftest import assert_curve_valid, build_ontology, rng_for
from ontolabel import metrics
from ontolabel.metrics import PRCurve, PRPoint, auprc, pr_curve, precision_at_recall


def curve(*pts):
    return PRCurve(points=[PRPoint(r, p, t) for r, p, t in pts],
                   max_achieved_recall=pts[-1][0] if pts else 0.0)


def test_auprc_constant_precision():
    assert auprc(curve((1.0, 1.0, 0.5))) == 1.0


def test_auprc_hand_trapezoid():
    # first point extended back to recall 0, then one trapezoid
    c = curve((0.5, 1.0, 0.9), (1.0, 0.5, 0.1))
    assert np.isclose(auprc(c), 0.875)


def test_auprc_clipped_at_achieved_recall():
    assert np.isclose(auprc(curve((0.6, 1.0, 0.4))), 0.6)


def test_auprc_empty_curve():
    assert auprc(PRCurve(points=[], max_achieved_recall=0.0)) == 0.0


def test_precision_at_recall_hand_interpolation():
    c = curve((0.4, 0.9, 0.8), (0.6, 0.7, 0.2))
    v, reached = precision_at_recall(c, 0.5)
    assert reached and np.isclose(v, 0.8)


def test_precision_at_recall_edges():
    c = curve((0.4, 0.9, 0.8), (0.6, 0.7, 0.2))
    assert precision_at_recall(c, 0.0) == (0.9, True)  # leftmost extension
    assert precision_at_recall(c, 0.7) == (0.0, False)  # beyond achieved recall
    assert precision_at_recall(c, 0.6) == (0.7, True)
    with pytest.raises(ValueError):
        precision_at_recall(c, 1.5)


def test_pr_curve_single_sample_dedup():
    o = build_ontology({"A": []})
    c = pr_curve({"s": {"A": 0.9}}, {"s": {"A"}}, o)
    assert [(p.recall, p.precision, p.threshold) for p in c.points] == [(1.0, 1.0, 0.9)]
    assert c.max_achieved_recall == 1.0


def test_pr_curve_empty_scored():
    o = build_ontology({"A": []})
    c = pr_curve({}, {"s": {"A"}}, o)
    assert [(p.recall, p.precision, p.threshold) for p in c.points] == [(0.0, 1.0, 1.0)]


def test_pr_curve_drops_vacuous_start_when_real_points_exist():
    o = build_ontology({"A": [], "B": []})
    c = pr_curve({"s": {"B": 0.6}}, {"s": {"A"}}, o)
    # the zero-prediction point at threshold 1.0 is vacuous (P=1 by
    # convention) and dropped because a real point exists
    assert [(p.recall, p.precision, p.threshold) for p in c.points] == [(0.0, 0.0, 0.6)]


def test_pr_curve_invariants_random():
    rng = rng_for("curveinv")
    o = build_ontology({"A": [], "B": ["A"], "C": ["A"], "D": []})
    ids = o.class_ids
    for _ in range(25):
        gold = {f"s{i}": {ids[int(rng.integers(0, 4))]} for i in range(15)}
        scored = {
            f"s{i}": {c: float(rng.uniform()) for c in rng.choice(ids, size=2, replace=False)}
            for i in range(15)
        }
        c = pr_curve(scored, gold, o)
        assert_curve_valid(c)
        assert 0.0 <= auprc(c) <= 1.0


def test_pr_curve_ignores_unknown_sample_ids():
    o = build_ontology({"A": []})
    c = pr_curve({"s": {"A": 0.9}, "ghost": {"A": 0.9}}, {"s": {"A"}}, o)
    assert c.points[-1].recall == 1.0 and c.points[-1].precision == 1.0


def test_pr_curve_unknown_class_rejected():
    from ontolabel.errors import UnknownClassError

    o = build_ontology({"A": []})
    with pytest.raises(UnknownClassError):
        pr_curve({"s": {"Z": 0.9}}, {"s": {"A"}}, o)


def test_curve_tsv_format():
    text = metrics.curve_tsv(curve((0.5, 1.0, 0.9)))
    lines = text.splitlines()
    assert lines[0] == "threshold\trecall\tprecision"
    assert lines[1].split("\t") == ["0.9", "0.5", "1.0"]


def test_report_fields():
    rep = metrics.report(curve((0.5, 1.0, 0.9), (1.0, 0.5, 0.1)), n_samples=4,
                         n_classes_predicted=2)
    assert set(rep) == {
        "auprc", "precision_at_0.5", "precision_at_0.5_reached",
        "max_achieved_recall", "n_samples", "n_classes_predicted",
    }
    assert rep["precision_at_0.5_reached"] is True
    assert np.isclose(rep["auprc"], 0.875)
