"""Synthetic corpora and the comparative experiments.

The generator builds a random rooted DAG of classes, gives every leaf a
Gaussian feature cluster, and writes text descriptions that mention one
term for the gold class. Its knobs recreate the failure modes the loop is
meant to survive: held-out synonyms (used in text but absent from the
lexicon, so only co-training can label those samples), ambiguous synonyms
shared between sibling or unrelated leaves, general mentions that name a
parent class instead of the leaf, misleading mentions naming a fixed
unrelated decoy class, feature twins that only the text view can separate,
and a power-law class skew that makes tail classes rare.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from . import cotrain, learner, metrics, resolve
from .errors import EmptyTrainingSetError
from .lexicon import Lexicon, Sample, distant_labels
from .ontology import Node, Ontology, ROOT

_TEMPLATES = (
    "profiled sample taken from {m} specimen",
    "replicate series of {m} material, batch run",
    "experimental assay on {m}, standard protocol",
    "archived record: {m} preparation, quality checked",
    "{m} derived extract, processed for analysis",
)

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


@dataclass
class SynthConfig:
    n_classes: int = 30
    n_samples: int = 4500
    feature_dim: int = 64
    dag_depth: int = 3
    synonyms_per_class: int = 3
    held_out_synonym_fraction: float = 0.4
    ambiguity_fraction: float = 0.2
    cross_ambiguity_fraction: float = 0.15
    general_mention_fraction: float = 0.24
    noise_mention_fraction: float = 0.0
    decoy_coverage: float = 0.5
    twin_fraction: float = 0.0
    missing_text_fraction: float = 0.3
    feature_noise_sigma: float = 0.52
    class_skew: float = 2.0
    seed: int = 7

    def __post_init__(self):
        if self.n_classes < 2 or self.feature_dim < 2:
            raise ValueError("need n_classes >= 2 and feature_dim >= 2")
        if self.synonyms_per_class < 1:
            raise ValueError("synonyms_per_class must be >= 1")
        for name in (
            "held_out_synonym_fraction",
            "ambiguity_fraction",
            "cross_ambiguity_fraction",
            "general_mention_fraction",
            "noise_mention_fraction",
            "decoy_coverage",
            "twin_fraction",
            "missing_text_fraction",
        ):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.class_skew < 0:
            raise ValueError("class_skew must be >= 0")


@dataclass
class SynthCorpus:
    ontology: Ontology
    lexicon: Lexicon
    samples: list[Sample]
    gold: dict[str, set]
    config: SynthConfig = None
    held_out_synonyms: dict[str, list[str]] = field(default_factory=dict)


def _word(rng, used: set) -> str:
    while True:
        n = int(rng.integers(5, 9))
        w = "".join(_LETTERS[int(i)] for i in rng.integers(0, 26, n))
        if w not in used:
            used.add(w)
            return w


def gen_synthetic(cfg: SynthConfig) -> SynthCorpus:
    rng = np.random.default_rng(cfg.seed)
    used_words: set = set(w for t in _TEMPLATES for w in t.split())

    # level sizes roughly double per level so most classes are leaves
    depth = cfg.dag_depth
    weights = [2**i for i in range(depth)]
    total = sum(weights)
    sizes = [max(1, round(cfg.n_classes * w / total)) for w in weights]
    sizes[-1] += cfg.n_classes - sum(sizes)
    if min(sizes) < 1:
        raise ValueError("n_classes too small for dag_depth")

    nodes: dict[str, Node] = {}
    levels: list[list[str]] = []
    idx = 0
    for li, size in enumerate(sizes):
        level = []
        for _ in range(size):
            cid = f"C{idx:04d}"
            idx += 1
            if li == 0:
                parents = frozenset({ROOT})
            else:
                prev = levels[li - 1]
                p1 = prev[int(rng.integers(0, len(prev)))]
                parents = {p1}
                if len(prev) > 1 and rng.random() < 0.3:
                    p2 = prev[int(rng.integers(0, len(prev)))]
                    parents.add(p2)
                parents = frozenset(parents)
            nodes[cid] = Node(name=_word(rng, used_words), parents=parents)
            level.append(cid)
        levels.append(level)

    # synonyms: some withheld from the lexicon, some shared with a sibling
    lexicon_syns: dict[str, list[str]] = {cid: [] for cid in nodes}
    held_out: dict[str, list[str]] = {cid: [] for cid in nodes}
    n_held = 0
    if cfg.held_out_synonym_fraction > 0:
        n_held = max(1, round(cfg.held_out_synonym_fraction * cfg.synonyms_per_class))
        n_held = min(n_held, cfg.synonyms_per_class)
    for cid in sorted(nodes):
        for j in range(cfg.synonyms_per_class):
            syn = _word(rng, used_words)
            if j < cfg.synonyms_per_class - n_held:
                lexicon_syns[cid].append(syn)
            else:
                held_out[cid].append(syn)

    parent_to_leaves: dict[str, list[str]] = {}
    interior = {p for n in nodes.values() for p in n.parents}
    leaves = sorted(c for c in nodes if c not in interior)
    for leaf in leaves:
        for p in nodes[leaf].parents:
            parent_to_leaves.setdefault(p, []).append(leaf)
    for leaf in leaves:
        siblings = sorted(
            {s for p in nodes[leaf].parents for s in parent_to_leaves[p] if s != leaf}
        )
        unrelated = [s for s in leaves if s != leaf and s not in siblings]
        for syn in list(lexicon_syns[leaf]):
            # a synonym can be ambiguous with a sibling (mild noise: the
            # expansion metric credits the shared parent) or with a leaf in
            # an unrelated branch (severe noise)
            if siblings and rng.random() < cfg.ambiguity_fraction:
                other = siblings[int(rng.integers(0, len(siblings)))]
                lexicon_syns[other].append(syn)
            if unrelated and rng.random() < cfg.cross_ambiguity_fraction:
                other = unrelated[int(rng.integers(0, len(unrelated)))]
                lexicon_syns[other].append(syn)

    nodes = {
        cid: dataclasses.replace(n, synonyms=tuple(sorted(lexicon_syns[cid])))
        for cid, n in nodes.items()
    }
    ontology = Ontology(nodes)
    lex = Lexicon()
    for cid in ontology.class_ids:
        lex.add(nodes[cid].name, cid)
        for syn in nodes[cid].synonyms:
            lex.add(syn, cid)

    # a subset of leaves gets one fixed unrelated decoy class: their
    # misleading mentions consistently name the decoy, so the noise is
    # systematic per class rather than averaging out across the corpus
    decoys: dict[str, str] = {}
    covered = [leaves[int(i)] for i in rng.permutation(len(leaves))]
    covered = sorted(covered[: round(cfg.decoy_coverage * len(leaves))])
    for leaf in covered:
        siblings = {s for p in nodes[leaf].parents for s in parent_to_leaves[p]}
        unrelated = [l for l in leaves if l != leaf and l not in siblings]
        if unrelated:
            decoys[leaf] = unrelated[int(rng.integers(0, len(unrelated)))]

    centroids = {leaf: rng.uniform(0.0, 1.0, cfg.feature_dim) for leaf in leaves}
    # feature twins: pairs of unrelated leaves sharing a centroid — classes
    # the feature view alone can never separate (only the text view can)
    n_twin_pairs = int(cfg.twin_fraction * len(leaves) / 2)
    if n_twin_pairs:
        order = [leaves[int(i)] for i in rng.permutation(len(leaves))]
        paired = 0
        while paired < n_twin_pairs and len(order) >= 2:
            a = order.pop()
            sibs = {s for p in nodes[a].parents for s in parent_to_leaves[p]}
            partner = next((b for b in order if b not in sibs), None)
            if partner is None:
                continue
            order.remove(partner)
            centroids[partner] = centroids[a]
            paired += 1
    # power-law class frequencies: skew 0 is uniform; higher skews make the
    # tail classes rare, so discovering them takes more data
    probs = np.array([1.0 / (r + 1) ** cfg.class_skew for r in range(len(leaves))])
    probs /= probs.sum()

    samples: list[Sample] = []
    gold: dict[str, set] = {}
    for i in range(cfg.n_samples):
        sid = f"S{i:05d}"
        leaf = leaves[int(rng.choice(len(leaves), p=probs))]
        feats = centroids[leaf] + rng.normal(0.0, cfg.feature_noise_sigma, cfg.feature_dim)
        if rng.random() < cfg.missing_text_fraction:
            text = None
        else:
            parents = sorted(p for p in nodes[leaf].parents if p != ROOT)
            if leaf in decoys and rng.random() < cfg.noise_mention_fraction:
                # misleading description naming the class's decoy
                mention = nodes[decoys[leaf]].name
            elif parents and rng.random() < cfg.general_mention_fraction:
                mention = nodes[parents[int(rng.integers(0, len(parents)))]].name
            elif held_out[leaf] and rng.random() < cfg.held_out_synonym_fraction:
                mention = held_out[leaf][int(rng.integers(0, len(held_out[leaf])))]
            else:
                pool = [nodes[leaf].name] + list(nodes[leaf].synonyms)
                mention = pool[int(rng.integers(0, len(pool)))]
            template = _TEMPLATES[int(rng.integers(0, len(_TEMPLATES)))]
            text = template.format(m=mention)
        samples.append(Sample(id=sid, features=feats, text=text))
        gold[sid] = {leaf}

    return SynthCorpus(
        ontology=ontology,
        lexicon=lex,
        samples=samples,
        gold=gold,
        config=cfg,
        held_out_synonyms=held_out,
    )


def perturb_labels(
    d0: dict[str, dict[str, float]],
    fraction: float,
    o: Ontology,
    seed: int,
) -> dict[str, dict[str, float]]:
    """Replace floor(fraction * n) entries, chosen uniformly, with a single
    uniformly random class at score 1.0."""
    if not 0 <= fraction <= 1:
        raise ValueError("fraction must be in [0, 1]")
    rng = np.random.default_rng(seed)
    ids = sorted(d0)
    n_replace = math.floor(fraction * len(ids))
    chosen = set(rng.choice(ids, size=n_replace, replace=False)) if n_replace else set()
    out = {}
    for sid in ids:
        if sid in chosen:
            c = o.class_ids[int(rng.integers(0, len(o.class_ids)))]
            out[sid] = {c: 1.0}
        else:
            out[sid] = dict(d0[sid])
    return out


def _final_main_auprc(result: cotrain.RunResult) -> float:
    main_recs = [r for r in result.history if r["view"] == "main"]
    return main_recs[-1]["auprc"]


def _distant_only_auprc(
    corpus: SynthCorpus, cfg: cotrain.CoTrainConfig, d0: dict[str, dict[str, float]]
) -> float:
    model = learner.train(d0, corpus.samples, learner.MAIN, cfg.main_cfg, corpus.ontology)
    annotated = cotrain.annotate(model, corpus.samples, cfg.tau)
    return metrics.auprc(metrics.pr_curve(annotated, corpus.gold, corpus.ontology))


def run_strategy_comparison(corpus: SynthCorpus, cfg: cotrain.CoTrainConfig) -> list[dict]:
    """One run per strategy on identical inputs; reports AUPRC and the
    number of distinct classes annotated at score >= tau."""
    rows = []
    for strategy in resolve.STRATEGIES:
        scfg = dataclasses.replace(cfg, strategy=strategy)
        result = cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon, scfg, gold=corpus.gold)
        annotated = cotrain.annotate(result.main, corpus.samples, cfg.tau)
        n_classes = len({c for labels in annotated.values() for c in labels})
        rows.append(
            {
                "strategy": strategy,
                "auprc": _final_main_auprc(result),
                "n_classes": n_classes,
            }
        )
    return rows


def run_noise_sweep(
    corpus: SynthCorpus,
    cfg: cotrain.CoTrainConfig,
    fractions: list[float],
) -> list[dict]:
    """Perturb the bootstrap labels at each fraction and rerun the loop."""
    if sorted(fractions) != list(fractions):
        raise ValueError("fractions must be sorted ascending")
    d0 = distant_labels(corpus.lexicon, corpus.samples)
    rows = []
    for frac in fractions:
        d0p = perturb_labels(d0, frac, corpus.ontology, seed=cfg.seed)
        try:
            result = cotrain.run(
                corpus.samples, corpus.ontology, corpus.lexicon, cfg, gold=corpus.gold, d0=d0p
            )
            auprc, collapsed = _final_main_auprc(result), False
        except EmptyTrainingSetError:
            # under extreme perturbation the loop can prune itself to an
            # empty training set; fall back to the supervision-only model,
            # the best output the system can still produce
            auprc, collapsed = _distant_only_auprc(corpus, cfg, d0p), True
        rows.append({"fraction": frac, "auprc": auprc, "collapsed": collapsed})
    return rows


def run_threshold_sweep(
    corpus: SynthCorpus,
    cfg: cotrain.CoTrainConfig,
    taus: list[float],
    eval_tau: float = 0.3,
) -> list[dict]:
    """Vary the loop's resolution threshold while scoring every run's
    final model at one fixed annotation threshold, isolating the
    threshold's effect on training from its effect on the emitted
    annotation set."""
    rows = []
    for tau in taus:
        rcfg = dataclasses.replace(cfg, tau=tau)
        result = cotrain.run(corpus.samples, corpus.ontology, corpus.lexicon, rcfg)
        annotated = cotrain.annotate(result.main, corpus.samples, eval_tau)
        auprc = metrics.auprc(metrics.pr_curve(annotated, corpus.gold, corpus.ontology))
        rows.append({"tau": tau, "auprc": auprc})
    return rows


def run_data_scaling(
    corpus: SynthCorpus,
    cfg: cotrain.CoTrainConfig,
    fractions: list[float],
    repeats: int,
    count_tau: float = 0.5,
) -> list[dict]:
    """Subsample the corpus at each fraction (one subsample per repeat
    seed), run the loop, and report mean AUPRC and the mean number of
    distinct classes appearing in high-confidence annotations (score >=
    count_tau, stricter than the loop threshold so noise classes do not
    inflate the count)."""
    rows = []
    for frac in fractions:
        if not 0 < frac <= 1:
            raise ValueError("fractions must be in (0, 1]")
        auprcs, counts = [], []
        for r in range(repeats):
            rng = np.random.default_rng(cfg.seed * 1000 + r)
            n = max(1, round(frac * len(corpus.samples)))
            idx = sorted(rng.choice(len(corpus.samples), size=n, replace=False))
            subset = [corpus.samples[i] for i in idx]
            gold = {s.id: corpus.gold[s.id] for s in subset}
            rcfg = dataclasses.replace(cfg, seed=cfg.seed + r)
            result = cotrain.run(subset, corpus.ontology, corpus.lexicon, rcfg, gold=gold)
            annotated = cotrain.annotate(result.main, subset, max(cfg.tau, count_tau))
            counts.append(len({c for labels in annotated.values() for c in labels}))
            auprcs.append(_final_main_auprc(result))
        rows.append(
            {
                "fraction": frac,
                "mean_auprc": float(np.mean(auprcs)),
                "mean_n_classes": float(np.mean(counts)),
                "repeats": repeats,
            }
        )
    return rows


def lexicon_tsv(lex: Lexicon) -> str:
    lines = []
    for term in sorted(lex.entries):
        for cid in sorted(lex.entries[term]):
            lines.append(f"{cid}\t{term}")
    return "\n".join(lines) + "\n"


def gold_tsv(gold: dict[str, set]) -> str:
    lines = []
    for sid in sorted(gold):
        for cid in sorted(gold[sid]):
            lines.append(f"{sid}\t{cid}")
    return "\n".join(lines) + "\n"
