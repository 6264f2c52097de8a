"""Class lexicon, token-boundary text matching and distant-supervision
label generation.

Normalization: casefold, every non-alphanumeric character becomes a space,
whitespace collapsed. Matching is at token boundaries (never substrings),
so "ovary" does not fire inside "discovery". Multi-word terms match as
contiguous token runs. Ambiguous terms keep all their classes; the
co-training loop is what corrects that noise later.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .errors import FormatError
from .ontology import Ontology

_NON_ALNUM = re.compile(r"[^0-9a-z]+")


def normalize(text: str) -> str:
    return _NON_ALNUM.sub(" ", text.casefold()).strip()


def tokens_of(text: str) -> list[str]:
    n = normalize(text)
    return n.split() if n else []


@dataclass
class Sample:
    """One data point: a dense feature vector plus an optional free-text
    description (None when no description exists)."""

    id: str
    features: np.ndarray
    text: Optional[str] = None


class Lexicon:
    """Maps normalized terms to the set of class ids they may denote."""

    def __init__(self):
        self.entries: dict[str, set[str]] = {}
        # term token tuples indexed by first token, for the matcher
        self._by_first: dict[str, list[tuple[str, ...]]] = {}

    def __len__(self):
        return len(self.entries)

    def add(self, term: str, class_id: str):
        norm = normalize(term)
        if not norm:
            raise FormatError(f"empty lexicon term for class {class_id!r}")
        toks = tuple(norm.split())
        if norm not in self.entries:
            self.entries[norm] = set()
            self._by_first.setdefault(toks[0], []).append(toks)
        self.entries[norm].add(class_id)

    def match_text(self, text: str) -> set[str]:
        """Union of classes for every term occurring in the text as a
        contiguous token run. Overlapping matches all count."""
        toks = tokens_of(text)
        hits: set[str] = set()
        for i, tok in enumerate(toks):
            for term in self._by_first.get(tok, ()):
                if tuple(toks[i : i + len(term)]) == term:
                    hits |= self.entries[" ".join(term)]
        return hits


def lexicon_from_ontology(o: Ontology) -> Lexicon:
    """Every node's name and synonyms become entries for that node."""
    lex = Lexicon()
    for cid in o.class_ids:
        node = o.nodes[cid]
        lex.add(node.name, cid)
        for syn in node.synonyms:
            lex.add(syn, cid)
    return lex


def load_lexicon_tsv(text: str, o: Ontology, base: Lexicon | None = None) -> Lexicon:
    """Parse ``class_id<TAB>term`` lines, merging into ``base`` if given."""
    lex = base if base is not None else Lexicon()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise FormatError(f"expected 2 tab-separated fields, got {len(parts)}", lineno)
        cid, term = parts
        if cid not in o:
            raise FormatError(f"unknown class id {cid!r}", lineno)
        if not normalize(term):
            raise FormatError(f"empty term for class {cid!r}", lineno)
        lex.add(term, cid)
    return lex


def distant_labels(lex: Lexicon, samples: Iterable[Sample]) -> dict[str, dict[str, float]]:
    """Initial training set: every sample whose text matches at least one
    class gets all matched classes at score 1.0. Output ordered by id."""
    d0: dict[str, dict[str, float]] = {}
    for s in sorted(samples, key=lambda s: s.id):
        if s.text is None:
            continue
        hits = lex.match_text(s.text)
        if hits:
            d0[s.id] = {c: 1.0 for c in sorted(hits)}
    return d0


def load_samples_jsonl(text: str) -> list[Sample]:
    """One JSON object per line: id (string), features (number array),
    optional text (string)."""
    samples = []
    seen = set()
    dim = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise FormatError(f"bad JSON: {e}", lineno) from None
        if "id" not in obj or "features" not in obj:
            raise FormatError("sample needs 'id' and 'features'", lineno)
        if obj["id"] in seen:
            raise FormatError(f"duplicate sample id {obj['id']!r}", lineno)
        seen.add(obj["id"])
        feats = np.asarray(obj["features"], dtype=np.float64)
        if feats.ndim != 1:
            raise FormatError("features must be a flat number array", lineno)
        if dim is None:
            dim = feats.shape[0]
        elif feats.shape[0] != dim:
            raise FormatError(f"feature dimension {feats.shape[0]} != {dim}", lineno)
        samples.append(Sample(id=obj["id"], features=feats, text=obj.get("text")))
    return samples


def dump_samples_jsonl(samples: Iterable[Sample]) -> str:
    lines = []
    for s in samples:
        obj = {"id": s.id, "features": [float(v) for v in s.features]}
        if s.text is not None:
            obj["text"] = s.text
        lines.append(json.dumps(obj, sort_keys=True))
    return "\n".join(lines) + "\n"
