import pytest
from hypothesis import given, strategies as st

from paratower.words import (
    DEFAULT_MAX_RADIUS,
    RadiusTooLarge,
    ball,
    ball_size,
    common_prefix_len,
    enumerate_words,
    inverse,
    is_reduced,
    legal_next_letters,
    multiply,
    reduce_word,
    words_of_length,
)

letters = st.sampled_from("aAbB")
letter_seqs = st.lists(letters, max_size=20)
reduced_words = letter_seqs.map(reduce_word)


@given(letter_seqs)
def test_reduce_is_reduced_and_idempotent(seq):
    w = reduce_word(seq)
    assert is_reduced(w)
    assert reduce_word(w) == w


def test_reduce_rejects_bad_letters():
    with pytest.raises(ValueError):
        reduce_word("ax")


@given(reduced_words, reduced_words)
def test_multiply_matches_concatenate_reduce(u, v):
    assert multiply(u, v) == reduce_word(u + v)


@given(reduced_words, reduced_words, reduced_words)
def test_multiply_associative(u, v, w):
    assert multiply(multiply(u, v), w) == multiply(u, multiply(v, w))


@given(reduced_words)
def test_inverse_cancels(u):
    assert multiply(u, inverse(u)) == ""
    assert multiply(inverse(u), u) == ""
    assert inverse(inverse(u)) == u


@given(reduced_words)
def test_identity_is_neutral(u):
    assert multiply("", u) == u
    assert multiply(u, "") == u


@given(reduced_words)
def test_legal_next_letters_extend_reduced(w):
    nxt = legal_next_letters(w)
    assert len(nxt) == (4 if not w else 3)
    for x in nxt:
        assert is_reduced(w + x)


def test_words_of_length_counts():
    assert words_of_length(0) == [""]
    assert len(words_of_length(1)) == 4
    assert len(words_of_length(2)) == 12
    assert len(words_of_length(5)) == 4 * 3**4


def test_ball_sizes_and_order():
    for r in range(6):
        b = ball(r)
        assert len(b) == ball_size(r)
        ws = list(b)
        assert len(set(ws)) == len(ws)
        # layers of equal length, in canonical enumeration order
        lens = [len(w) for w in ws]
        assert lens == sorted(lens)
        for n in range(r + 1):
            assert [w for w in ws if len(w) == n] == words_of_length(n)


def test_ball_membership():
    b = ball(3)
    assert "" in b
    assert "abA" in b
    assert "abab" not in b


def test_ball_radius_cap():
    with pytest.raises(RadiusTooLarge):
        ball(DEFAULT_MAX_RADIUS + 1)
    with pytest.raises(ValueError):
        ball(-1)


def test_enumerate_words_prefix_of_ball():
    lazy = []
    gen = enumerate_words()
    while len(lazy) < ball_size(4):
        lazy.append(next(gen))
    assert lazy == list(ball(4))


@given(reduced_words, reduced_words)
def test_common_prefix_len(u, v):
    k = common_prefix_len(u, v)
    assert u[:k] == v[:k]
    if k < min(len(u), len(v)):
        assert u[k] != v[k]
