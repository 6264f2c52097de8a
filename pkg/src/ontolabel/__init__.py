"""Weakly supervised ontology annotation: lexicon-based distant
supervision plus two-view co-training, with hierarchy-aware label
resolution and ontology-based evaluation."""

__version__ = "0.1.0"
