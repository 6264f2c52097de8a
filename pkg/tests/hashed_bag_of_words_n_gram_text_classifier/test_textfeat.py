"""Tokenization and hashed bag-of-ngrams featurization."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ontolabel.textfeat import N_BUCKETS, featurize, fnv1a_64, tokenize

tokens_strategy = st.lists(
    st.text(alphabet="abcdefghijklmnopqrstuvwxyz0123456789", min_size=1, max_size=8),
    min_size=1,
    max_size=30,
)


def test_fnv1a_64_known_vectors():
    # published FNV-1a 64-bit test vectors
    assert fnv1a_64(b"") == 0xCBF29CE484222325
    assert fnv1a_64(b"a") == 0xAF63DC4C8601EC8C
    assert fnv1a_64(b"foobar") == 0x85944171F73967E8


def test_tokenize_examples():
    assert tokenize("RNA-seq of liver.") == ["rna", "seq", "of", "liver"]
    assert tokenize("") == []
    assert tokenize("AML  AML") == ["aml", "aml"]
    assert tokenize("...!!!") == []


def test_featurize_empty():
    v = featurize([])
    assert v.nnz == 0


def test_featurize_single_token():
    v = featurize(["liver"])
    assert v.nnz == 1
    assert v.values[0] == 1.0
    assert 0 <= v.indices[0] < N_BUCKETS


def test_featurize_two_tokens_three_ngrams():
    v = featurize(["a", "b"])
    assert v.nnz == 3  # two unigrams + one bigram
    assert np.allclose(v.values, 1.0 / math.sqrt(3.0))


def test_repeated_token_counts_accumulate():
    v1 = featurize(["aml"])
    v2 = featurize(["aml", "aml"])
    # "aml aml" has buckets for the unigram (count 2) and the bigram (count 1)
    assert v2.nnz == 2
    uni = fnv1a_64(b"u:aml") % N_BUCKETS
    i = int(np.searchsorted(v2.indices, uni))
    assert v2.indices[i] == uni
    assert np.isclose(v2.values[i], 2.0 / math.sqrt(5.0))
    assert v1.indices[0] == uni


@settings(max_examples=60, deadline=None)
@given(tokens_strategy)
def test_featurize_unit_norm_and_sorted_indices(tokens):
    v = featurize(tokens)
    assert np.isclose(np.linalg.norm(v.values), 1.0, atol=1e-9)
    assert np.all(np.diff(v.indices) > 0)
    assert np.all(v.values > 0)
    assert v.indices.dtype == np.int64


@settings(max_examples=40, deadline=None)
@given(tokens_strategy)
def test_featurize_deterministic(tokens):
    a, b = featurize(tokens), featurize(list(tokens))
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.values, b.values)


@settings(max_examples=40, deadline=None)
@given(tokens_strategy, st.randoms(use_true_random=False))
def test_permutation_preserves_unigram_mass(tokens, rnd):
    def unigram_counts(toks):
        counts = {}
        for t in toks:
            idx = fnv1a_64(b"u:" + t.encode()) % N_BUCKETS
            counts[idx] = counts.get(idx, 0) + 1
        return counts

    shuffled = list(tokens)
    rnd.shuffle(shuffled)
    assert unigram_counts(tokens) == unigram_counts(shuffled)
