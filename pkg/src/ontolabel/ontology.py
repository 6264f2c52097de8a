"""Rooted DAG of annotation classes with ancestry queries.

Class ids are opaque strings. A virtual root ``ROOT`` is inserted above
every top-level class so the graph always has a single root; the root is
never a legal label and is excluded from every expansion result.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormatError, UnknownClassError

ROOT = "ROOT"

EQUAL = "equal"
FIRST_MORE_SPECIFIC = "first_more_specific"
SECOND_MORE_SPECIFIC = "second_more_specific"
UNRELATED = "unrelated"


@dataclass
class Node:
    name: str
    parents: frozenset[str]
    synonyms: tuple[str, ...] = ()


class Ontology:
    """Immutable after construction; ancestor sets are memoized up front
    because evaluation expands labels per sample per threshold."""

    def __init__(self, nodes: dict[str, Node], n_obsolete_dropped: int = 0):
        self.nodes = nodes
        self.root = ROOT
        self.n_obsolete_dropped = n_obsolete_dropped
        self._validate()
        # lexicographic ordering keeps the model layout stable across runs
        self.class_ids = sorted(nodes)
        self.class_index = {c: i for i, c in enumerate(self.class_ids)}
        self._ancestors = self._compute_ancestors()

    def __len__(self):
        return len(self.nodes)

    def __contains__(self, class_id):
        return class_id in self.nodes

    def _validate(self):
        for cid, node in self.nodes.items():
            for p in node.parents:
                if p != ROOT and p not in self.nodes:
                    raise FormatError(f"unknown parent {p!r} of {cid!r}")
            if not node.parents:
                raise FormatError(f"node {cid!r} has no parent")

    def _compute_ancestors(self) -> dict[str, frozenset[str]]:
        order = self._topological_order()
        anc: dict[str, frozenset[str]] = {}
        for cid in order:
            s: set[str] = set()
            for p in self.nodes[cid].parents:
                if p == ROOT:
                    continue
                s.add(p)
                s |= anc[p]
            anc[cid] = frozenset(s)
        return anc

    def _topological_order(self) -> list[str]:
        indeg = {cid: 0 for cid in self.nodes}
        children: dict[str, list[str]] = {cid: [] for cid in self.nodes}
        for cid, node in self.nodes.items():
            for p in node.parents:
                if p != ROOT:
                    indeg[cid] += 1
                    children[p].append(cid)
        queue = sorted(cid for cid, d in indeg.items() if d == 0)
        order = []
        while queue:
            cid = queue.pop()
            order.append(cid)
            for ch in children[cid]:
                indeg[ch] -= 1
                if indeg[ch] == 0:
                    queue.append(ch)
        if len(order) != len(self.nodes):
            stuck = sorted(cid for cid, d in indeg.items() if d > 0)
            raise FormatError(f"cycle detected involving {stuck[:5]}")
        return order

    def _check(self, class_id: str):
        if class_id not in self.nodes:
            raise UnknownClassError(f"unknown class id {class_id!r}")

    def ancestors(self, class_id: str) -> frozenset[str]:
        """All strict ancestors of ``class_id``, the virtual root excluded."""
        self._check(class_id)
        return self._ancestors[class_id]

    def expand(self, labels) -> set[str]:
        """labels plus every ancestor of each label, root excluded."""
        out: set[str] = set()
        for c in labels:
            self._check(c)
            out.add(c)
            out |= self._ancestors[c]
        return out

    def specificity_relation(self, c1: str, c2: str) -> str:
        self._check(c1)
        self._check(c2)
        if c1 == c2:
            return EQUAL
        if c2 in self._ancestors[c1]:
            return FIRST_MORE_SPECIFIC
        if c1 in self._ancestors[c2]:
            return SECOND_MORE_SPECIFIC
        return UNRELATED

    def leaves(self) -> list[str]:
        internal = set()
        for node in self.nodes.values():
            internal |= node.parents
        return [c for c in self.class_ids if c not in internal]

    def to_tsv(self) -> str:
        lines = []
        for cid in self.class_ids:
            node = self.nodes[cid]
            parents = sorted(p for p in node.parents if p != ROOT)
            lines.append(f"{cid}\t{node.name}\t{'|'.join(parents)}")
        return "\n".join(lines) + "\n"


def parse_ontology_tsv(text: str) -> Ontology:
    """Parse ``id<TAB>name<TAB>parent1|parent2|...`` lines. An empty third
    field marks a top-level class, which gets the virtual root as parent."""
    nodes: dict[str, Node] = {}
    raw_parents: dict[str, tuple[int, list[str]]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise FormatError(f"expected 3 tab-separated fields, got {len(parts)}", lineno)
        cid, name, parent_field = parts
        if not cid:
            raise FormatError("empty class id", lineno)
        if cid == ROOT:
            raise FormatError(f"{ROOT!r} is reserved for the virtual root", lineno)
        if cid in nodes:
            raise FormatError(f"duplicate id {cid!r}", lineno)
        parents = [p for p in parent_field.split("|") if p] if parent_field else []
        nodes[cid] = Node(name=name, parents=frozenset())
        raw_parents[cid] = (lineno, parents)
    for cid, (lineno, parents) in raw_parents.items():
        for p in parents:
            if p == ROOT:
                raise FormatError(f"unknown parent {ROOT!r} (virtual root is not referencable)", lineno)
            if p not in nodes:
                raise FormatError(f"unknown parent {p!r}", lineno)
        nodes[cid] = Node(
            name=nodes[cid].name,
            parents=frozenset(parents) if parents else frozenset({ROOT}),
        )
    return Ontology(nodes)


_OBO_SYNONYM_RE = re.compile(r'^"(.*)"\s*')


def parse_obo_subset(text: str) -> Ontology:
    """Parse the OBO subset we care about: [Term] stanzas with id, name,
    is_a, synonym and is_obsolete. Everything else is ignored. Obsolete
    terms are dropped (counted on the returned ontology)."""
    stanzas: list[tuple[int, dict]] = []
    current: dict | None = None
    current_line = 0
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r").strip()
        if line == "[Term]":
            if current is not None:
                stanzas.append((current_line, current))
            current = {"synonyms": [], "is_a": []}
            current_line = lineno
            continue
        if line.startswith("[") and line.endswith("]"):
            # some other stanza type ([Typedef] etc.): close any open term
            if current is not None:
                stanzas.append((current_line, current))
            current = None
            continue
        if current is None or not line or line.startswith("!"):
            continue
        if ":" not in line:
            continue
        key, _, value = line.partition(":")
        key = key.strip()
        value = value.split("!")[0].strip() if key == "is_a" else value.strip()
        if key == "id":
            current["id"] = value
        elif key == "name":
            current["name"] = value
        elif key == "is_a":
            current["is_a"].append(value)
        elif key == "synonym":
            m = _OBO_SYNONYM_RE.match(value)
            if not m:
                raise FormatError(f"unparseable synonym line: {line!r}", lineno)
            current["synonyms"].append(m.group(1))
        elif key == "is_obsolete":
            current["obsolete"] = value.lower() == "true"
    if current is not None:
        stanzas.append((current_line, current))

    nodes: dict[str, Node] = {}
    kept: list[tuple[int, dict]] = []
    n_obsolete = 0
    for lineno, st in stanzas:
        if st.get("obsolete"):
            n_obsolete += 1
            continue
        if "id" not in st:
            raise FormatError("term stanza missing id", lineno)
        if "name" not in st:
            raise FormatError(f"term {st['id']!r} missing name", lineno)
        if st["id"] in nodes:
            raise FormatError(f"duplicate id {st['id']!r}", lineno)
        nodes[st["id"]] = Node(name=st["name"], parents=frozenset())
        kept.append((lineno, st))
    for lineno, st in kept:
        for p in st["is_a"]:
            if p not in nodes:
                raise FormatError(f"is_a references unknown id {p!r}", lineno)
        parents = frozenset(st["is_a"]) if st["is_a"] else frozenset({ROOT})
        nodes[st["id"]] = Node(name=st["name"], parents=parents, synonyms=tuple(st["synonyms"]))
    return Ontology(nodes, n_obsolete_dropped=n_obsolete)
