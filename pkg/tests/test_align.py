import random

import pytest
from hypothesis import given, settings, strategies as st

from werboot.align import AlignmentCounts, align, corpus_wer, edit_distance, tokenize
from werboot.errors import ZeroReferenceLength

from oracles import full_matrix_distance, recursive_distance

tokens = st.lists(st.sampled_from("abc"), max_size=8)


def test_tokenize():
    assert tokenize("a b  c") == ["a", "b", "c"]
    assert tokenize("") == []
    assert tokenize("A b", case_fold=True) == ["a", "b"]
    assert tokenize("A b") == ["A", "b"]
    assert tokenize(" \tx\ny ") == ["x", "y"]


def test_identity_and_all_deletion():
    assert align(list("abc"), list("abc")) == AlignmentCounts(0, 0, 0, 3)
    assert align(list("abc"), []) == AlignmentCounts(0, 0, 3, 3)
    assert align([], list("ab")) == AlignmentCounts(0, 2, 0, 0)


def test_category_counts_on_small_cases():
    assert align(list("abc"), list("axc")) == AlignmentCounts(1, 0, 0, 3)
    assert align(list("abc"), list("ab")) == AlignmentCounts(0, 0, 1, 3)
    assert align(list("ab"), list("abxy")) == AlignmentCounts(0, 2, 0, 2)
    # equal cost either way; substitutions are preferred
    assert align(list("ab"), list("ba")) == AlignmentCounts(2, 0, 0, 2)


def test_corpus_wer():
    assert corpus_wer([AlignmentCounts(reference_length=10), AlignmentCounts(reference_length=5)]) == 0.0
    assert corpus_wer([AlignmentCounts(1, 0, 0, 10), AlignmentCounts(0, 1, 0, 10)]) == pytest.approx(0.10)
    with pytest.raises(ZeroReferenceLength):
        corpus_wer([AlignmentCounts(0, 2, 0, 0)])
    with pytest.raises(ZeroReferenceLength):
        corpus_wer([])


def test_random_pairs_match_recursive_oracle():
    r = random.Random(5)
    for _ in range(500):
        a = [r.choice("abc") for _ in range(r.randint(0, 8))]
        b = [r.choice("abc") for _ in range(r.randint(0, 8))]
        assert align(a, b).errors == recursive_distance(a, b)


@given(tokens)
def test_self_alignment_has_no_errors(x):
    assert align(x, x).errors == 0


@given(tokens, tokens)
def test_swap_exchanges_insertions_and_deletions(x, y):
    fwd, back = align(x, y), align(y, x)
    assert fwd.substitutions == back.substitutions
    assert fwd.insertions == back.deletions
    assert fwd.deletions == back.insertions
    assert fwd.errors == back.errors


@given(tokens, tokens, tokens)
def test_triangle_inequality(x, y, z):
    assert align(x, z).errors <= align(x, y).errors + align(y, z).errors


@given(tokens, tokens)
@settings(max_examples=300)
def test_counts_are_consistent(x, y):
    c = align(x, y)
    assert c.errors == edit_distance(x, y) == full_matrix_distance(x, y)
    assert c.insertions - c.deletions == len(y) - len(x)
    assert c.substitutions + c.deletions <= len(x)
    assert abs(len(x) - len(y)) <= c.errors <= max(len(x), len(y))
    assert c.reference_length == len(x)


def test_long_sequences():
    r = random.Random(1)
    ref = [r.choice("abcdefgh") for _ in range(400)]
    hyp = list(ref)
    for pos in sorted(r.sample(range(400), 20), reverse=True):
        hyp[pos] = "z"
    assert align(ref, hyp) == AlignmentCounts(20, 0, 0, 400)
    assert edit_distance(ref, hyp[:-5]) == full_matrix_distance(ref, hyp[:-5])
