"""
Tests for shuffle words and the poset W_{M,N}
"""
import pytest

from core.errors import InvalidWordError, OrderViolationError
from core.schemas import ShuffleContext
from core.shuffles.words import (
    Letter,
    ShuffleWord,
    bottom,
    chain_count_formula,
    element_count_formula,
    interval_decomposition,
    is_below,
    is_valid_shuffle,
    lower,
    lower_covers,
    mobius_formula,
    parse_word,
    rank,
    shuffle_poset,
    top,
    upper,
    upper_covers,
)


@pytest.fixture
def ctx21():
    """Context of W_{2,1}."""
    return ShuffleContext(lower_size=2, upper_size=1)


@pytest.fixture
def ctx11():
    """Context of W_{1,1}."""
    return ShuffleContext(lower_size=1, upper_size=1)


def test_letter_parse_and_order():
    """Letters parse from tokens and order a's before x's."""
    assert Letter.parse("a3") == lower(3)
    assert Letter.parse("x12") == upper(12)
    assert sorted([upper(1), lower(2), lower(1)]) == [lower(1), lower(2), upper(1)]
    with pytest.raises(InvalidWordError):
        Letter.parse("b1")
    with pytest.raises(InvalidWordError):
        lower(0)


def test_word_rendering():
    """Words render as space separated tokens."""
    w = parse_word("x2 a1 a3 x3")
    assert str(w) == "x2 a1 a3 x3"
    assert w.tokens() == ["x2", "a1", "a3", "x3"]
    assert w.lower_letters() == (lower(1), lower(3))
    assert parse_word("") == ShuffleWord()


def test_validity_examples():
    """Shuffle property: each alphabet increasing, indices within the context."""
    ctx = ShuffleContext(lower_size=4, upper_size=3)
    assert is_valid_shuffle(parse_word("x2 a1 a3 x3").letters, ctx)
    assert not is_valid_shuffle(parse_word("a1 x2 a2 a3 x1").letters, ctx)
    assert is_valid_shuffle((), ctx)
    assert not is_valid_shuffle(parse_word("a5").letters, ctx)
    assert not is_valid_shuffle(parse_word("a1 a1").letters, ctx)


def test_rank(ctx21):
    """Rank counts deleted a's plus inserted x's."""
    assert rank(bottom(ctx21), ctx21) == 0
    assert rank(top(ctx21), ctx21) == 3
    assert rank(parse_word("a1 x1"), ctx21) == 2
    with pytest.raises(InvalidWordError):
        rank(parse_word("a2 a1"), ctx21)


def test_upper_covers_of_bottom(ctx21):
    """a1 a2 is covered by two deletions and three insertions."""
    covers = upper_covers(parse_word("a1 a2"), ctx21)
    expected = {parse_word(t) for t in ["a2", "a1", "x1 a1 a2", "a1 x1 a2", "a1 a2 x1"]}
    assert covers == expected
    assert upper_covers(top(ctx21), ctx21) == frozenset()


def test_covers_are_dual(ctx21):
    """v covers u exactly when u is a lower cover of v."""
    P = shuffle_poset(ctx21)
    for u in P.elements:
        for v in upper_covers(u, ctx21):
            assert u in lower_covers(v, ctx21)


def test_upper_covers_of_empty_word(ctx11):
    """The empty word of W_{1,1} is covered only by x1."""
    assert upper_covers(ShuffleWord(), ctx11) == {parse_word("x1")}


def test_interval_decomposition_example():
    """Factors of a large interval along its common letters."""
    ctx = ShuffleContext(lower_size=10, upper_size=15)
    u = parse_word("a2 x3 a4 a5 a10 x6 x8")
    v = parse_word("x1 x2 x3 x5 a10 x6 x8 x10 x11")
    factors = interval_decomposition(u, v, ctx)
    assert len(factors) == 5
    assert factors.canonical == ((0, 2), (1, 2), (2, 1))


def test_interval_decomposition_small(ctx11):
    """Zero factors are kept in `factors` and dropped in `canonical`."""
    factors = interval_decomposition(parse_word("a1"), parse_word("x1 a1"), ctx11)
    assert factors.counts() == {(0, 1): 1, (0, 0): 1}
    assert factors.canonical == ((0, 1),)

    same = interval_decomposition(parse_word("x1 a1"), parse_word("x1 a1"), ctx11)
    assert same.canonical == ()
    assert len(same) == 3


def test_interval_decomposition_rejects_incomparable(ctx11):
    """x1 a1 and a1 x1 are incomparable."""
    with pytest.raises(OrderViolationError):
        interval_decomposition(parse_word("x1 a1"), parse_word("a1 x1"), ctx11)


def test_is_below_agrees_with_reachability(ctx21):
    """The common subword test matches the transitive closure of covers."""
    P = shuffle_poset(ctx21)
    for i, u in enumerate(P.elements):
        for j, v in enumerate(P.elements):
            assert is_below(u, v) == bool(P.reachability[i, j])


def test_rank_matches_poset_layers(ctx21):
    """The rank function equals the BFS depth from the bottom."""
    P = shuffle_poset(ctx21)
    for i, w in enumerate(P.elements):
        assert rank(w, ctx21) == P.rank[i]


@pytest.mark.parametrize("M,N", [(0, 3), (1, 1), (2, 1), (2, 2), (3, 1)])
def test_closed_forms(M, N):
    """Element count, chain count and Möbius value against enumeration."""
    P = shuffle_poset(ShuffleContext(lower_size=M, upper_size=N))
    assert len(P) == element_count_formula(M, N)
    assert P.chain_count() == chain_count_formula(M, N)
    assert P.mobius(P.bottom, P.top) == mobius_formula(M, N)


def test_closed_form_values():
    """W_{2,1} has 12 elements, 12 maximal chains and μ = -3."""
    assert element_count_formula(2, 1) == 12
    assert chain_count_formula(2, 1) == 12
    assert mobius_formula(2, 1) == -3
    assert element_count_formula(1, 1) == 5


def test_interval_sizes_multiply(ctx21):
    """|[u, v]| is the product of the sizes of its factors."""
    P = shuffle_poset(ctx21)
    for i, u in enumerate(P.elements):
        for j in P.interval(i, P.top):
            v = P.elements[j]
            expected = 1
            for (a, b), k in interval_decomposition(u, v, ctx21).counts().items():
                expected *= element_count_formula(a, b) ** k
            assert len(P.interval(i, j)) == expected
