"""Shared helpers: small ontology builders and independent brute-force
oracles used by both the unit tests and the acceptance suite. The oracles
deliberately reimplement the semantics from scratch (plain DFS closures,
pairwise enumeration) so they share no code with the package."""

import itertools

import numpy as np

from ontolabel.ontology import ROOT, Node, Ontology


def build_ontology(parent_map, names=None, synonyms=None):
    """Ontology from {class_id: [parent ids]}; empty list means top-level."""
    names = names or {}
    synonyms = synonyms or {}
    nodes = {}
    for cid, parents in parent_map.items():
        nodes[cid] = Node(
            name=names.get(cid, f"name {cid}"),
            parents=frozenset(parents) if parents else frozenset({ROOT}),
            synonyms=tuple(synonyms.get(cid, ())),
        )
    return Ontology(nodes)


def closure_oracle(parent_map, cid):
    """Strict ancestors by plain DFS over the parent map, root excluded."""
    seen = set()
    stack = [p for p in parent_map[cid] if p != ROOT]
    while stack:
        p = stack.pop()
        if p in seen:
            continue
        seen.add(p)
        stack.extend(q for q in parent_map[p] if q != ROOT)
    return seen


def random_parent_map(rng, n_nodes, multi_parent_p=0.4):
    """Random rooted DAG: node i picks parents among nodes < i (or the root)."""
    ids = [f"N{i}" for i in range(n_nodes)]
    pm = {}
    for i, cid in enumerate(ids):
        if i == 0 or rng.random() < 0.25:
            pm[cid] = []
        else:
            k = 2 if (i >= 2 and rng.random() < multi_parent_p) else 1
            pm[cid] = list(rng.choice(ids[:i], size=min(k, i), replace=False))
    return pm


def all_parent_maps(n_nodes):
    """Every DAG on n ordered nodes where node i's parents are any subset
    of the earlier nodes (empty subset = top-level)."""
    ids = [f"N{i}" for i in range(n_nodes)]
    per_node = []
    for i in range(n_nodes):
        prev = ids[:i]
        subsets = []
        for r in range(len(prev) + 1):
            subsets.extend(itertools.combinations(prev, r))
        per_node.append(subsets)
    for combo in itertools.product(*per_node):
        yield dict(zip(ids, (list(c) for c in combo)))


def resolve_oracle(strategy, distant, predicted, parent_map):
    """Pairwise brute-force reconciliation, scores included."""
    if not distant:
        return dict(predicted)
    if strategy == "standard":
        return dict(distant)
    if strategy == "predict":
        return dict(predicted)
    if strategy == "union":
        out = dict(distant)
        for c, s in predicted.items():
            out[c] = max(out.get(c, 0.0), s)
        return out
    if strategy == "intersect":
        return {
            c: max(distant[c], predicted[c]) for c in set(distant) & set(predicted)
        }
    assert strategy == "relation"
    out = {}

    def put(c, s):
        out[c] = max(out.get(c, 0.0), s)

    for c1, s1 in distant.items():
        anc1 = closure_oracle(parent_map, c1)
        for c2, s2 in predicted.items():
            anc2 = closure_oracle(parent_map, c2)
            if c1 == c2:
                put(c1, max(s1, s2))
            elif c2 in anc1:
                put(c1, s1)
            elif c1 in anc2:
                put(c2, s2)
    return out


def ontology_pr_oracle(pred, gold, parent_map):
    """Micro PR by materializing full ancestor-expanded sets per sample."""
    inter = pred_total = gold_total = 0
    for sid, gold_labels in gold.items():
        ep = set()
        for c in pred.get(sid, ()):
            ep.add(c)
            ep |= closure_oracle(parent_map, c)
        eg = set()
        for c in gold_labels:
            eg.add(c)
            eg |= closure_oracle(parent_map, c)
        inter += len(ep & eg)
        pred_total += len(ep)
        gold_total += len(eg)
    precision = inter / pred_total if pred_total else 1.0
    recall = inter / gold_total if gold_total else 0.0
    return precision, recall


def tiny_corpus(n_classes=6, n_samples=150, seed=3, **overrides):
    """A small synthetic corpus for fast loop/CLI tests."""
    from ontolabel import harness

    cfg = dict(
        n_classes=n_classes,
        n_samples=n_samples,
        feature_dim=8,
        dag_depth=2,
        cross_ambiguity_fraction=0.0,
        general_mention_fraction=0.0,
        noise_mention_fraction=0.0,
        class_skew=0.0,
        feature_noise_sigma=0.3,
        seed=seed,
    )
    cfg.update(overrides)
    return harness.gen_synthetic(harness.SynthConfig(**cfg))


def blob_samples(rng, centroids, n_per, sigma):
    """Dense samples drawn around the given centroids; returns (samples,
    labels dict) with class ids C0, C1, ..."""
    from ontolabel.lexicon import Sample

    samples, labels = [], {}
    i = 0
    for ci, c in enumerate(centroids):
        for _ in range(n_per):
            sid = f"S{i:04d}"
            samples.append(Sample(id=sid, features=c + sigma * rng.standard_normal(len(c))))
            labels[sid] = {f"C{ci}": 1.0}
            i += 1
    return samples, labels


def assert_curve_valid(curve):
    prev_r, prev_t = -1.0, float("inf")
    for p in curve.points:
        assert 0.0 <= p.recall <= 1.0 and 0.0 <= p.precision <= 1.0
        assert p.recall >= prev_r - 1e-12
        assert p.threshold < prev_t
        prev_r, prev_t = p.recall, p.threshold


def rng_for(name):
    import zlib

    return np.random.default_rng(zlib.crc32(name.encode()))
