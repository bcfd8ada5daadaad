"""
Tests for the alternating word language and its multichain bijection
"""
import pytest

from core.algebra.language import (
    AlternatingLetter,
    count_l,
    is_l_word,
    l_word_census,
    l_word_to_multichain,
    l_words,
    multichain_of_word,
    parse_alternating,
    product_rhs_coefficient,
    refined_multichain_census,
    render_alternating,
    shuffle_word_of,
    step_key,
    verify_l_bijection,
)
from core.errors import InvalidWordError
from core.shuffles.words import parse_word


def _ms(text):
    counts = {}
    for c in parse_alternating(text):
        counts[c] = counts.get(c, 0) + 1
    return counts


@pytest.fixture
def long_word():
    """A nine letter word with two a3 and two b3; a3 b5 keeps it out of the language."""
    return parse_alternating("a2 b3 b3 a1 a3 b5 b1 b2 a3")


def test_letter_parsing():
    """Tokens are a or b followed by a positive index."""
    assert AlternatingLetter.parse("b12") == AlternatingLetter("b", 12)
    assert render_alternating(parse_alternating("a1 b2")) == "a1 b2"
    for bad in ("c1", "a", "a0", "bx"):
        with pytest.raises(InvalidWordError):
            AlternatingLetter.parse(bad)


def test_membership():
    """a_k b_l is forbidden exactly when k <= l."""
    assert is_l_word(parse_alternating("b1 a1"))
    assert is_l_word(parse_alternating("a2 b1"))
    assert not is_l_word(parse_alternating("a1 b1"))
    assert not is_l_word(parse_alternating("b2 a1 b3"))
    assert is_l_word(())


def test_words_of_multiset():
    """With a1 a1 b1 b2 every b must come first."""
    words = l_words(_ms("a1 a1 b1 b2"))
    assert [render_alternating(w) for w in words] == ["b1 b2 a1 a1", "b2 b1 a1 a1"]
    assert count_l(_ms("a1 b1")) == 1
    assert count_l(_ms("a2 b1")) == 2


@pytest.mark.parametrize("text", ["a1 b1", "a1 b2", "a2 b1", "a1 a1 b1 b2", "a1 a2 b1 b2"])
def test_coefficients_count_words(text):
    """Series coefficients count the language words of each multiset."""
    assert product_rhs_coefficient(_ms(text)) == count_l(_ms(text))


def test_coefficient_example():
    """a1^2 b1 b2 has coefficient 2."""
    assert product_rhs_coefficient(_ms("a1 a1 b1 b2")) == 2
    assert product_rhs_coefficient({}) == 1


def test_shuffle_word_of(long_word):
    """a's and b's are renumbered left to right."""
    assert shuffle_word_of(parse_alternating("b1 a2 a1")) == parse_word("x1 a1 a2")
    assert shuffle_word_of(long_word) == parse_word("a1 x1 x2 a2 a3 x3 x4 x5 a4")


def test_multichain_of_long_word(long_word):
    """Each step deletes the a_r positions and inserts the b_r positions."""
    chain = multichain_of_word(long_word)
    assert len(chain) == 6
    assert chain[0] == parse_word("a1 a2 a3 a4")
    assert chain[1] == parse_word("a1 a3 x4 a4")
    assert chain[2] == parse_word("a3 x4 x5 a4")
    assert chain[3] == parse_word("x1 x2 x4 x5")
    assert chain[4] == chain[3]
    assert chain[5] == parse_word("x1 x2 x3 x4 x5")
    assert step_key(chain) == ((1, 1), (1, 1), (2, 2), (0, 0), (0, 1))


def test_multichain_rejects(long_word):
    """Words outside the language and indices beyond k are refused."""
    with pytest.raises(ValueError):
        l_word_to_multichain(long_word)
    with pytest.raises(ValueError):
        multichain_of_word(parse_alternating("b3 a1"), k=2)
    chain = l_word_to_multichain(parse_alternating("b2 a1"), k=3)
    assert chain == (parse_word("a1"), parse_word(""), parse_word("x1"), parse_word("x1"))


@pytest.mark.parametrize("m,n,k", [(1, 1, 1), (1, 1, 2), (2, 1, 2), (1, 2, 3), (2, 2, 2)])
def test_bijection(m, n, k):
    """Language words map one-to-one onto k-step multichains."""
    report = verify_l_bijection(m, n, k)
    assert report.ok, report.to_dict()


def test_bijection_counts():
    """W_{1,1} has 5 two-step multichains and 1 one-step multichain."""
    assert verify_l_bijection(1, 1, 2).multichains == 5
    assert verify_l_bijection(1, 1, 1).words == 1


@pytest.mark.parametrize("m,n,k", [(1, 1, 2), (2, 1, 2), (1, 2, 2)])
def test_refined_census(m, n, k):
    """Per step key, words and multichains agree."""
    assert l_word_census(m, n, k) == refined_multichain_census(m, n, k)
