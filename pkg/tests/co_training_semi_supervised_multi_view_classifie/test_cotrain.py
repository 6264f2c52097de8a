"""The alternating two-view loop: structure, invariants, determinism."""

import json

import numpy as np
import pytest

from conftest import build_ontology, tiny_corpus
from ontolabel import cotrain, learner, resolve
from ontolabel.errors import EmptyTrainingSetError, NoSupervisionError
from ontolabel.lexicon import Lexicon, Sample, distant_labels


def run_tiny(corpus, **cfg_kwargs):
    cfg = cotrain.CoTrainConfig(**{"seed": 5, **cfg_kwargs})
    return cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon, cfg,
                       gold=corpus.gold), cfg


def test_history_one_record_per_half_iteration():
    corpus = tiny_corpus()
    result, cfg = run_tiny(corpus, n_iter=3)
    assert len(result.history) == 6
    assert [r["view"] for r in result.history] == ["main", "aux"] * 3
    assert [r["iteration"] for r in result.history] == [1, 1, 2, 2, 3, 3]


def test_iteration_one_trains_on_distant_labels():
    corpus = tiny_corpus()
    result, cfg = run_tiny(corpus)
    d0 = distant_labels(corpus.lexicon, corpus.samples)
    assert result.d0_size == len(d0)
    assert result.history[0]["train_size"] == len(d0)


def test_single_standard_iteration_equals_distant_baseline():
    corpus = tiny_corpus()
    result, cfg = run_tiny(corpus, n_iter=1, strategy=resolve.STANDARD)
    d0 = distant_labels(corpus.lexicon, corpus.samples)
    baseline = learner.train(d0, corpus.samples, learner.MAIN,
                             learner.main_defaults(seed=cfg.seed), corpus.ontology)
    assert np.array_equal(result.main.weights, baseline.weights)


def test_full_run_deterministic():
    corpus = tiny_corpus()
    a, _ = run_tiny(corpus, n_iter=2)
    b, _ = run_tiny(corpus, n_iter=2)
    assert a.history == b.history
    assert np.array_equal(a.main.weights, b.main.weights)
    assert np.array_equal(a.aux.weights, b.aux.weights)


def test_textless_samples_never_enter_text_view_training():
    corpus = tiny_corpus(missing_text_fraction=0.4)
    result, _ = run_tiny(corpus, n_iter=2)
    n_text = sum(1 for s in corpus.samples if s.text is not None)
    for rec in result.history:
        if rec["view"] == "aux":
            assert rec["train_size"] <= n_text


def test_empty_corpus_rejected():
    corpus = tiny_corpus()
    with pytest.raises(EmptyTrainingSetError):
        cotrain.run([], corpus.ontology, corpus.lexicon, cotrain.CoTrainConfig())


def test_no_organic_supervision_rejected():
    corpus = tiny_corpus()
    silent = [Sample(id=s.id, features=s.features, text=None) for s in corpus.samples]
    with pytest.raises(NoSupervisionError, match="no organic supervision"):
        cotrain.run(silent, corpus.ontology, corpus.lexicon, cotrain.CoTrainConfig())


def test_unreachable_threshold_empties_training_set():
    # tau = 1.0 is unreachable for a softmax over >1 classes, so Relation
    # prunes every sample at iteration 1 and the loop reports it
    corpus = tiny_corpus()
    with pytest.raises(EmptyTrainingSetError, match="iteration 1.*relation"):
        cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon,
                    cotrain.CoTrainConfig(tau=1.0, strategy=resolve.RELATION))


def test_d0_override_replaces_bootstrap():
    corpus = tiny_corpus()
    d0 = distant_labels(corpus.lexicon, corpus.samples)
    half = dict(list(d0.items())[: len(d0) // 2])
    result = cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon,
                         cotrain.CoTrainConfig(seed=5), d0=half)
    assert result.d0_size == len(half)
    assert result.history[0]["train_size"] == len(half)


def test_extra_labeled_overrides_resolution():
    corpus = tiny_corpus()
    sid = corpus.samples[0].id
    wrong_leaf = corpus.ontology.leaves()[-1]
    extra = {sid: {wrong_leaf: 1.0}}
    result = cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon,
                         cotrain.CoTrainConfig(seed=5, n_iter=1, extra_labeled=extra))
    # the trusted label joins the initial training set with precedence
    d0 = distant_labels(corpus.lexicon, corpus.samples)
    assert result.history[0]["train_size"] == len(set(d0) | {sid})


def test_changed_fraction_diagnostic():
    corpus = tiny_corpus()
    result, _ = run_tiny(corpus, n_iter=3)
    mains = [r for r in result.history if r["view"] == "main"]
    assert mains[0]["changed_fraction"] is None
    for rec in mains[1:]:
        assert 0.0 <= rec["changed_fraction"] <= 1.0


def test_history_has_losses_classes_and_auprc():
    corpus = tiny_corpus()
    result, _ = run_tiny(corpus, n_iter=1)
    for rec in result.history:
        assert np.isfinite(rec["final_loss"])
        assert rec["train_classes"] >= 1
        assert rec["produced_classes"] >= 0
        assert 0.0 <= rec["auprc"] <= 1.0


def test_history_json_round_trips():
    corpus = tiny_corpus()
    result, _ = run_tiny(corpus, n_iter=1)
    assert json.loads(cotrain.history_json(result.history)) == result.history


def test_annotate_zero_weight_model():
    o = build_ontology({f"C{i}": [] for i in range(5)})
    model = learner.Model(view=learner.MAIN, class_ids=o.class_ids, dim=2,
                          weights=np.zeros((5, 3)))
    samples = [Sample(id="s", features=np.zeros(2))]
    # uniform scores 0.2 < tau=0.3: nothing annotated
    assert cotrain.annotate(model, samples, 0.3) == {"s": {}}
    # boundary: score == tau is retained
    out = cotrain.annotate(model, samples, 0.2)
    assert set(out["s"]) == set(o.class_ids)


def test_annotate_beats_lexicon_matching_alone():
    from ontolabel import metrics

    corpus = tiny_corpus()
    result, cfg = run_tiny(corpus)
    annotated = cotrain.annotate(result.main, corpus.samples, cfg.tau)
    model_pred = {sid: set(labels) for sid, labels in annotated.items()}
    lex_pred = {
        s.id: corpus.lexicon.match_text(s.text) if s.text else set()
        for s in corpus.samples
    }
    _, model_recall = metrics.ontology_pr(model_pred, corpus.gold, corpus.ontology)
    _, lex_recall = metrics.ontology_pr(lex_pred, corpus.gold, corpus.ontology)
    assert model_recall > lex_recall


def test_config_validation():
    with pytest.raises(ValueError):
        cotrain.CoTrainConfig(n_iter=0)
    with pytest.raises(ValueError):
        cotrain.CoTrainConfig(tau=0.0)
    with pytest.raises(ValueError):
        cotrain.CoTrainConfig(tau=1.5)
