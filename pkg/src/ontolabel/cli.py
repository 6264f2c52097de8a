"""Batch command-line front-end.

Subcommands: annotate, evaluate, synth, strategy-compare, noise-sweep,
data-scaling. Every command writes a manifest next to its outputs with the
fully resolved configuration, input digests and seed, and all file writes
are atomic (temp file + rename). Exit codes: 0 ok, 2 bad input, 3 no
organic supervision, 4 training divergence.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import tempfile

from . import __version__, cotrain, harness, metrics, resolve
from .errors import (
    DivergenceError,
    FormatError,
    NoSupervisionError,
    OntolabelError,
    UnknownClassError,
)
from .lexicon import dump_samples_jsonl, lexicon_from_ontology, load_lexicon_tsv, load_samples_jsonl
from .ontology import parse_obo_subset, parse_ontology_tsv

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NO_SUPERVISION = 3
EXIT_DIVERGENCE = 4


def atomic_write(path: str, content: str):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(content)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _digest(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(path: str, command: str, config: dict, inputs: dict[str, str], outputs: list[str]):
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "config": config,
        "inputs": {role: _digest(p) for role, p in inputs.items() if p},
        "input_roles": {role: os.path.basename(p) for role, p in inputs.items() if p},
        "outputs": sorted(os.path.basename(p) for p in outputs),
    }
    atomic_write(path, json.dumps(manifest, sort_keys=True, indent=2) + "\n")


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as f:
        return f.read()


def load_ontology(args):
    if getattr(args, "obo", None):
        return parse_obo_subset(_read(args.obo))
    return parse_ontology_tsv(_read(args.ontology))


def _load_label_tsv(path: str, o) -> dict[str, set]:
    gold: dict[str, set] = {}
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"expected sample_id<TAB>class_id, got {len(parts)} fields", lineno)
        sid, cid = parts
        if cid not in o:
            raise FormatError(f"unknown class id {cid!r}", lineno)
        gold.setdefault(sid, set()).add(cid)
    return gold


def _load_pred_tsv(path: str, o) -> dict[str, dict[str, float]]:
    scored: dict[str, dict[str, float]] = {}
    for lineno, line in enumerate(_read(path).splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"expected sample_id<TAB>class_id<TAB>score, got {len(parts)} fields", lineno)
        sid, cid, score = parts
        if cid not in o:
            raise FormatError(f"unknown class id {cid!r}", lineno)
        scored.setdefault(sid, {})[cid] = float(score)
    return scored


def annotations_tsv(annotations: dict[str, dict[str, float]]) -> str:
    lines = []
    for sid in sorted(annotations):
        for cid, score in sorted(annotations[sid].items(), key=lambda kv: (-kv[1], kv[0])):
            lines.append(f"{sid}\t{cid}\t{score!r}")
    return "\n".join(lines) + "\n" if lines else ""


def cmd_annotate(args) -> int:
    o = load_ontology(args)
    samples = load_samples_jsonl(_read(args.samples))
    if args.lexicon:
        lex = load_lexicon_tsv(_read(args.lexicon), o)
    else:
        lex = lexicon_from_ontology(o)
    extra = None
    if args.labels:
        extra = {sid: {c: 1.0 for c in cids} for sid, cids in _load_label_tsv(args.labels, o).items()}
    cfg = cotrain.CoTrainConfig(
        n_iter=args.iters,
        tau=args.threshold,
        strategy=args.resolve,
        seed=args.seed,
        extra_labeled=extra,
    )
    result = cotrain.run(samples, o, lex, cfg)
    annotations = cotrain.annotate(result.main, samples, args.threshold)
    atomic_write(args.out, annotations_tsv(annotations))
    outputs = [args.out]
    if args.model_out:
        os.makedirs(args.model_out, exist_ok=True)
        for name, model in (("main", result.main), ("aux", result.aux)):
            path = os.path.join(args.model_out, f"{name}.json")
            atomic_write(path, model.to_json() + "\n")
            outputs.append(path)
    if args.history:
        atomic_write(args.history, cotrain.history_json(result.history) + "\n")
        outputs.append(args.history)
    config = {
        "iters": args.iters,
        "threshold": args.threshold,
        "resolve": args.resolve,
        "seed": args.seed,
        "main_cfg": dataclasses.asdict(cfg.main_cfg),
        "aux_cfg": dataclasses.asdict(cfg.aux_cfg),
        "lexicon_source": "file" if args.lexicon else "ontology names and synonyms",
    }
    inputs = {
        "samples": args.samples,
        "ontology": args.ontology,
        "obo": args.obo,
        "lexicon": args.lexicon,
        "labels": args.labels,
    }
    write_manifest(args.out + ".manifest.json", "annotate", config, inputs, outputs)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    o = load_ontology(args)
    gold = _load_label_tsv(args.gold, o)
    scored = _load_pred_tsv(args.pred, o)
    curve = metrics.pr_curve(scored, gold, o)
    n_classes = len({c for labels in scored.values() for c in labels})
    rep = metrics.report(curve, n_samples=len(gold), n_classes_predicted=n_classes)
    text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    outputs = []
    if args.report:
        atomic_write(args.report, text)
        outputs.append(args.report)
    else:
        sys.stdout.write(text)
    if args.curve:
        atomic_write(args.curve, metrics.curve_tsv(curve))
        outputs.append(args.curve)
    if args.report:
        inputs = {"pred": args.pred, "gold": args.gold, "ontology": args.ontology, "obo": args.obo}
        write_manifest(args.report + ".manifest.json", "evaluate", {}, inputs, outputs)
    return EXIT_OK


def _synth_config(args) -> harness.SynthConfig:
    return harness.SynthConfig(
        n_classes=args.n_classes,
        n_samples=args.n_samples,
        feature_dim=args.feature_dim,
        dag_depth=args.dag_depth,
        synonyms_per_class=args.synonyms_per_class,
        held_out_synonym_fraction=args.held_out_fraction,
        ambiguity_fraction=args.ambiguity_fraction,
        cross_ambiguity_fraction=args.cross_ambiguity_fraction,
        general_mention_fraction=args.general_mention_fraction,
        noise_mention_fraction=args.noise_mention_fraction,
        decoy_coverage=args.decoy_coverage,
        twin_fraction=args.twin_fraction,
        missing_text_fraction=args.missing_text_fraction,
        feature_noise_sigma=args.noise_sigma,
        class_skew=args.class_skew,
        seed=args.seed,
    )


def _write_corpus(corpus: harness.SynthCorpus, out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    files = {
        "ontology.tsv": corpus.ontology.to_tsv(),
        "lexicon.tsv": harness.lexicon_tsv(corpus.lexicon),
        "samples.jsonl": dump_samples_jsonl(corpus.samples),
        "gold.tsv": harness.gold_tsv(corpus.gold),
    }
    paths = []
    for name, content in files.items():
        path = os.path.join(out_dir, name)
        atomic_write(path, content)
        paths.append(path)
    return paths


def cmd_synth(args) -> int:
    cfg = _synth_config(args)
    corpus = harness.gen_synthetic(cfg)
    outputs = _write_corpus(corpus, args.out_dir)
    write_manifest(
        os.path.join(args.out_dir, "manifest.json"),
        "synth",
        dataclasses.asdict(cfg),
        {},
        outputs,
    )
    return EXIT_OK


def _experiment_cfg(args) -> cotrain.CoTrainConfig:
    return cotrain.CoTrainConfig(
        n_iter=args.iters,
        tau=args.threshold,
        strategy=args.resolve,
        seed=args.seed,
    )


def _run_experiment(args, runner, command: str, extra_config: dict) -> int:
    synth_cfg = _synth_config(args)
    corpus = harness.gen_synthetic(synth_cfg)
    cfg = _experiment_cfg(args)
    rows = runner(corpus, cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    report_path = os.path.join(args.out_dir, "report.json")
    atomic_write(report_path, json.dumps(rows, sort_keys=True, indent=2) + "\n")
    tsv_path = os.path.join(args.out_dir, "report.tsv")
    cols = list(rows[0].keys()) if rows else []
    lines = ["\t".join(cols)]
    for row in rows:
        lines.append("\t".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in cols))
    atomic_write(tsv_path, "\n".join(lines) + "\n")
    config = {
        "synth": dataclasses.asdict(synth_cfg),
        "iters": args.iters,
        "threshold": args.threshold,
        "resolve": args.resolve,
        "seed": args.seed,
        **extra_config,
    }
    write_manifest(
        os.path.join(args.out_dir, "manifest.json"), command, config, {}, [report_path, tsv_path]
    )
    return EXIT_OK


def cmd_strategy_compare(args) -> int:
    return _run_experiment(
        args, harness.run_strategy_comparison, "strategy-compare", {}
    )


def cmd_noise_sweep(args) -> int:
    fractions = _parse_fractions(args.fractions)
    return _run_experiment(
        args,
        lambda corpus, cfg: harness.run_noise_sweep(corpus, cfg, fractions),
        "noise-sweep",
        {"fractions": fractions},
    )


def cmd_data_scaling(args) -> int:
    fractions = _parse_fractions(args.fractions)
    return _run_experiment(
        args,
        lambda corpus, cfg: harness.run_data_scaling(corpus, cfg, fractions, args.repeats),
        "data-scaling",
        {"fractions": fractions, "repeats": args.repeats},
    )


def _parse_fractions(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise FormatError(f"bad fractions list {text!r}") from None


def _add_ontology_args(p, required=True):
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--ontology", help="ontology TSV (id<TAB>name<TAB>parent1|parent2|...)")
    g.add_argument("--obo", help="OBO-subset ontology file")


def _add_cotrain_args(p):
    p.add_argument("--resolve", choices=resolve.STRATEGIES, default=resolve.RELATION)
    p.add_argument("--iters", type=int, default=5)
    p.add_argument("--threshold", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)


def _add_synth_args(p):
    d = harness.SynthConfig()
    p.add_argument("--n-classes", type=int, default=d.n_classes)
    p.add_argument("--n-samples", type=int, default=d.n_samples)
    p.add_argument("--feature-dim", type=int, default=d.feature_dim)
    p.add_argument("--dag-depth", type=int, default=d.dag_depth)
    p.add_argument("--synonyms-per-class", type=int, default=d.synonyms_per_class)
    p.add_argument("--held-out-fraction", type=float, default=d.held_out_synonym_fraction)
    p.add_argument("--ambiguity-fraction", type=float, default=d.ambiguity_fraction)
    p.add_argument("--cross-ambiguity-fraction", type=float, default=d.cross_ambiguity_fraction)
    p.add_argument("--general-mention-fraction", type=float, default=d.general_mention_fraction)
    p.add_argument("--noise-mention-fraction", type=float, default=d.noise_mention_fraction)
    p.add_argument("--decoy-coverage", type=float, default=d.decoy_coverage)
    p.add_argument("--twin-fraction", type=float, default=d.twin_fraction)
    p.add_argument("--missing-text-fraction", type=float, default=d.missing_text_fraction)
    p.add_argument("--noise-sigma", type=float, default=d.feature_noise_sigma)
    p.add_argument("--class-skew", type=float, default=d.class_skew)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ontolabel")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("annotate", help="run the co-training loop and write annotations")
    p.add_argument("--samples", required=True, help="corpus JSONL")
    _add_ontology_args(p)
    p.add_argument("--lexicon", help="lexicon TSV; defaults to ontology names + synonyms")
    p.add_argument("--labels", help="optional gold labels TSV to add to every training set")
    p.add_argument("--out", required=True, help="annotations TSV output")
    _add_cotrain_args(p)
    p.add_argument("--model-out", help="directory for main.json / aux.json")
    p.add_argument("--history", help="per-iteration history JSON output")
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("evaluate", help="ontology-based PR evaluation of an annotations file")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    _add_ontology_args(p)
    p.add_argument("--curve", help="curve TSV output")
    p.add_argument("--report", help="report JSON output (stdout if omitted)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    _add_synth_args(p)
    p.add_argument("--seed", type=int, default=harness.SynthConfig().seed)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    for name, func, extra in (
        ("strategy-compare", cmd_strategy_compare, ()),
        ("noise-sweep", cmd_noise_sweep, ("fractions",)),
        ("data-scaling", cmd_data_scaling, ("fractions", "repeats")),
    ):
        p = sub.add_parser(name, help=f"run the {name.replace('-', ' ')} experiment")
        _add_synth_args(p)
        _add_cotrain_args(p)
        if "fractions" in extra:
            p.add_argument("--fractions", required=True, help="comma-separated list")
        if "repeats" in extra:
            p.add_argument("--repeats", type=int, default=5)
        p.add_argument("--out-dir", required=True)
        p.set_defaults(func=func)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoSupervisionError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_SUPERVISION
    except DivergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (FormatError, UnknownClassError, OntolabelError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
