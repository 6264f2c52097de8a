"""Hashed bag-of-ngrams text features for the auxiliary (text view)
classifier.

Unigrams and bigrams are hashed with FNV-1a (64 bit, fixed offset basis,
so the mapping is identical across runs and platforms) into 2**20 buckets
and the count vector is L2-normalized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lexicon import tokens_of

N_BUCKETS = 1 << 20

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = (1 << 64) - 1


def fnv1a_64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK
    return h


def tokenize(text: str) -> list[str]:
    """Same normalization as the lexicon; tokens are maximal alphanumeric
    runs."""
    return tokens_of(text)


@dataclass
class SparseVector:
    indices: np.ndarray  # int64, strictly increasing, in [0, N_BUCKETS)
    values: np.ndarray  # float64, positive

    @property
    def nnz(self):
        return len(self.indices)


def featurize(tokens: list[str]) -> SparseVector:
    """Hashed unigram+bigram counts, L2-normalized. Empty input gives the
    empty vector."""
    if not tokens:
        return SparseVector(np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))
    counts: dict[int, float] = {}
    for tok in tokens:
        idx = fnv1a_64(b"u:" + tok.encode("utf-8")) % N_BUCKETS
        counts[idx] = counts.get(idx, 0.0) + 1.0
    for a, b in zip(tokens, tokens[1:]):
        idx = fnv1a_64(b"b:" + a.encode("utf-8") + b" " + b.encode("utf-8")) % N_BUCKETS
        counts[idx] = counts.get(idx, 0.0) + 1.0
    indices = np.array(sorted(counts), dtype=np.int64)
    values = np.array([counts[i] for i in indices], dtype=np.float64)
    values /= np.linalg.norm(values)
    return SparseVector(indices, values)
