"""Property tests for the symbolic subset algebra.

Ground truth is pointwise membership on a word ball: every symbolic
operation must agree with the corresponding boolean operation on
indicator functions, and every normal form must agree with the
expression that produced it.
"""

from hypothesis import given, settings, strategies as st

import paratower.subsets as ss
from paratower.subsets import NormalForm
from paratower.words import ball, inverse, multiply, reduce_word

CHECK_BALL = list(ball(6))

letters = st.sampled_from("aAbB")
reduced_words = st.lists(letters, max_size=6).map(reduce_word)
short_words = st.lists(letters, max_size=4).map(reduce_word)


def atom():
    return st.one_of(
        reduced_words.map(ss.cone),
        st.lists(reduced_words, max_size=3).map(ss.finite),
    )


subsets = st.recursive(
    atom(),
    lambda children: st.one_of(
        st.tuples(children, children).map(lambda p: p[0] | p[1]),
        st.tuples(children, children).map(lambda p: p[0] & p[1]),
        children.map(lambda s: ~s),
        st.tuples(short_words, children).map(lambda p: ss.translate(p[0], p[1])),
    ),
    max_leaves=5,
)


def same_membership(s, t, words=CHECK_BALL):
    return all(s.contains(w) == t.contains(w) for w in words)


@given(subsets)
@settings(max_examples=60, deadline=None)
def test_normal_form_preserves_membership(s):
    nf = s.normal_form()
    for w in CHECK_BALL:
        assert nf.contains(w) == s.contains(w)


@given(subsets)
@settings(max_examples=60, deadline=None)
def test_normal_form_antichain_invariants(s):
    nf = s.normal_form()
    cones = sorted(nf.cones)
    for c1, c2 in zip(cones, cones[1:]):
        assert not c2.startswith(c1)
    for w in nf.words:
        assert not any(w.startswith(c) for c in nf.cones)


@given(subsets, subsets)
@settings(max_examples=40, deadline=None)
def test_boolean_algebra_pointwise(s, t):
    u = s | t
    i = s & t
    c = ~s
    for w in CHECK_BALL:
        assert u.contains(w) == (s.contains(w) or t.contains(w))
        assert i.contains(w) == (s.contains(w) and t.contains(w))
        assert c.contains(w) == (not s.contains(w))


@given(subsets)
@settings(max_examples=40, deadline=None)
def test_double_complement(s):
    assert ss.sets_equal(~~s, s)


@given(subsets, subsets)
@settings(max_examples=40, deadline=None)
def test_de_morgan(s, t):
    assert ss.sets_equal(~(s | t), ~s & ~t)
    assert ss.sets_equal(~(s & t), ~s | ~t)


@given(short_words, subsets)
@settings(max_examples=40, deadline=None)
def test_translate_membership(g, s):
    moved = ss.translate(g, s)
    for w in CHECK_BALL[: len(ball(4))]:
        assert moved.contains(multiply(g, w)) == s.contains(w)


@given(short_words, short_words, subsets)
@settings(max_examples=30, deadline=None)
def test_translate_composes(g, h, s):
    lhs = ss.translate(g, ss.translate(h, s))
    rhs = ss.translate(multiply(g, h), s)
    assert ss.sets_equal(lhs, rhs)


@given(reduced_words)
@settings(max_examples=100, deadline=None)
def test_shifted_cone_complement_is_a_cone(h):
    # h^{-1}·W(h) misses exactly the cone at the inverse of h's last letter
    if not h:
        return
    moved = ss.translate(inverse(h), ss.cone(h))
    rest = ~moved
    expected = ss.cone(inverse(h[-1]))
    assert ss.sets_equal(rest, expected)
    assert ss.is_all(moved | expected)
    assert ss.are_disjoint(moved, expected)


def test_full_and_empty():
    assert ss.is_all(ss.full_group())
    assert ss.is_empty(ss.empty_set())
    assert ss.sets_equal(~ss.full_group(), ss.empty_set())
    assert ss.is_all(ss.cone(""))


def test_cone_rejects_unreduced_base():
    import pytest

    with pytest.raises(ValueError):
        ss.cone("aA")
    with pytest.raises(ValueError):
        ss.finite(["bB"])


def test_merge_completes_families():
    # a word plus cones at all its children collapses to the cone at the word
    nf = NormalForm(words=["ab"], cones=["aba", "abb", "abB"])
    assert nf.cones == frozenset(["ab"])
    assert not nf.words


@given(subsets)
@settings(max_examples=40, deadline=None)
def test_json_round_trip(s):
    back = ss.subset_from_json(s.to_json())
    assert ss.sets_equal(s, back)


def test_orbit_preimage_membership():
    from paratower.boundary import AperiodicPoint, ClopenSet

    z = AperiodicPoint()
    # z starts with "ab", so [ab] contains z and a·[ab] tests translation
    pre = ss.OrbitPreimage(z, ClopenSet.cylinder("ab"))
    assert pre.contains("")
    assert pre.contains("a") == ClopenSet.cylinder("ab").contains_point_prefix(
        multiply("a", z.prefix(4))[:2]
    )
    import pytest

    with pytest.raises(ss.NotNormalizable):
        pre.normal_form()
