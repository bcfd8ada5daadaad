"""
Tests for the chain labeling of W_{M,N}
"""
from collections import Counter
from math import comb, factorial

import pytest

from core.errors import DecodeError
from core.poset import product_of_chains
from core.schemas import ShuffleContext
from core.shuffles.labeling import (
    CoordinateLabeling,
    CoverType,
    LabelingKind,
    ShuffleLabeling,
    decode_label,
    decreasing_chain_count,
    label_words,
    verify_r,
    verify_r_star,
    verify_s,
)
from core.shuffles.words import lower, parse_word, shuffle_poset, upper


def _poset(M, N):
    return shuffle_poset(ShuffleContext(lower_size=M, upper_size=N))


def _words(*texts):
    return tuple(parse_word(t) for t in texts)


@pytest.fixture
def w11():
    """W_{1,1} with its labeling."""
    P = _poset(1, 1)
    return P, ShuffleLabeling(P)


@pytest.fixture
def w21():
    """W_{2,1} with its labeling."""
    P = _poset(2, 1)
    return P, ShuffleLabeling(P)


def test_label_rules_on_w11():
    """(xa) covers carry the preceding x; plain deletions carry the deleted a."""
    ctx = ShuffleContext(lower_size=1, upper_size=1)
    via_x1a1 = label_words(_words("a1", "x1 a1", "x1"), ctx)
    assert via_x1a1.labels == (upper(1), upper(1))
    assert via_x1a1.cover_types == (CoverType.X, CoverType.XA)

    via_a1x1 = label_words(_words("a1", "a1 x1", "x1"), ctx)
    assert via_a1x1.labels == (upper(1), lower(1))
    assert via_a1x1.cover_types == (CoverType.X, CoverType.A)


def test_label_of_long_chain():
    """A chain of W_{2,3} and its label sequence."""
    ctx = ShuffleContext(lower_size=2, upper_size=3)
    chain = _words("a1 a2", "a1", "a1 x3", "a1 x1 x3", "x1 x3", "x1 x2 x3")
    labels = label_words(chain, ctx)
    assert str(labels) == "a2 x3 x1 a1 x2"
    assert decode_label(labels.labels, ctx) == chain


def test_decode_with_doubled_letter():
    """x1 x1 a2 inserts x1 in front of a1, then deletes a1, then a2."""
    ctx = ShuffleContext(lower_size=2, upper_size=1)
    sigma = (upper(1), upper(1), lower(2))
    assert decode_label(sigma, ctx) == _words("a1 a2", "x1 a1 a2", "x1 a2", "x1")


def test_decode_long_example():
    """A nine step label sequence of W_{4,5} decodes to a chain ending at the top."""
    ctx = ShuffleContext(lower_size=4, upper_size=5)
    sigma = tuple(
        upper(int(t[1:])) if t[0] == "x" else lower(int(t[1:]))
        for t in "x3 x5 a2 x4 x2 x1 x2 x4 a4".split()
    )
    words = decode_label(sigma, ctx)
    assert len(words) == 10
    assert words[-1] == parse_word("x1 x2 x3 x4 x5")
    assert label_words(words, ctx).labels == sigma
    assert label_words(words, ctx).cover_types.count(CoverType.XA) == 2


def test_decode_rejects_bad_multisets():
    """Repeated lower letters or missing upper letters are rejected."""
    ctx = ShuffleContext(lower_size=2, upper_size=1)
    with pytest.raises(DecodeError):
        decode_label((lower(1), lower(1), upper(1)), ctx)
    with pytest.raises(DecodeError):
        decode_label((lower(1), lower(2), lower(2)), ctx)
    with pytest.raises(DecodeError):
        decode_label((upper(1), lower(1)), ctx)


@pytest.mark.parametrize("M,N", [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)])
def test_round_trip(M, N):
    """Every chain decodes back from its labels."""
    P = _poset(M, N)
    labeling = ShuffleLabeling(P)
    for chain, labels in labeling.enumerate_labeled_chains():
        assert labeling.decode(labels) == chain


@pytest.mark.parametrize("M,N", [(2, 1), (2, 2), (3, 2)])
def test_label_multiset_census(M, N):
    """(M+N)!/2^k chains carry each multiset with k doubled letters."""
    labeling = ShuffleLabeling(_poset(M, N))
    census = labeling.label_multiset_census()
    by_k = Counter()
    for multiset, count in census.items():
        k = sum(1 for c in set(multiset) if multiset.count(c) == 2)
        assert count == factorial(M + N) // 2 ** k
        by_k[k] += 1
    for k in range(min(M, N) + 1):
        assert by_k[k] == comb(M, k) * comb(N, k)


def test_labels_injective(w21):
    """The twelve chains of W_{2,1} carry distinct label sequences."""
    P, labeling = w21
    sequences = [labels for _, labels in labeling.enumerate_labeled_chains()]
    assert len(sequences) == 12
    assert len(set(sequences)) == 12


def test_gamma(w21, w11):
    """The increasing chain from bottom to top deletes then inserts."""
    P, labeling = w21
    chain = labeling.gamma(P.bottom, P.top)
    assert labeling.words(chain) == _words("a1 a2", "a2", "", "x1")
    assert labeling.labels(chain) == (lower(1), lower(2), upper(1))
    assert labeling.gamma(P.top, P.top) == (P.top,)

    Q, lab11 = w11
    u = Q.index[parse_word("x1 a1")]
    assert lab11.gamma(u, Q.top) == (u, Q.top)


def test_swap_adjacent(w21):
    """Swaps change exactly one element and are involutions."""
    P, labeling = w21
    chain = labeling.decode((upper(1), upper(1), lower(2)))
    assert labeling.swap_adjacent(chain, 1) == chain

    swapped = labeling.swap_adjacent(chain, 2)
    assert labeling.words(swapped) == _words("a1 a2", "x1 a1 a2", "x1 a1", "x1")
    assert labeling.labels(swapped) == (upper(1), lower(2), upper(1))
    assert labeling.swap_adjacent(swapped, 2) == chain

    with pytest.raises(ValueError):
        labeling.swap_adjacent(chain, 3)


def test_cl_augmented_label(w11, w21):
    """Second components count down from the rank."""
    P, labeling = w11
    chain = labeling.decode((upper(1), upper(1)))
    assert labeling.cl_augmented_label(chain) == ((upper(1), 2), (upper(1), 1))

    Q, lab21 = w21
    gamma = lab21.gamma(Q.bottom, Q.top)
    assert lab21.cl_augmented_label(gamma) == ((lower(1), 3), (lower(2), 2), (upper(1), 1))


def test_labeling_properties(w21, w11):
    """The labeling is an R*- and S-labeling, but repeated labels rule out R."""
    for P, labeling in (w21, w11):
        assert verify_r_star(P, labeling)
        assert verify_s(P, labeling)


def test_product_of_chains_is_r_not_r_star():
    """Repeated coordinate labels force weakly increasing chains."""
    P = product_of_chains((2, 1))
    labeling = CoordinateLabeling(P)
    assert verify_r(P, labeling)
    check = verify_r_star(P, labeling)
    assert not check
    assert check.witness


def test_decreasing_chains(w21, w11):
    """Weakly decreasing chains count |μ(0̂, 1̂)|."""
    for P, labeling in (w21, w11):
        assert decreasing_chain_count(P, labeling) == abs(P.mobius(P.bottom, P.top))
    assert decreasing_chain_count(*w21) == 3
    assert decreasing_chain_count(*w11) == 2
    P = _poset(3, 0)
    assert decreasing_chain_count(P, ShuffleLabeling(P)) == 1


def test_rank_symmetry_bijection(w21, w11):
    """Atoms map bijectively onto coatoms."""
    P, labeling = w21
    mapping = labeling.rank_symmetry_bijection(P.bottom, P.top, 1)
    assert sorted(mapping) == list(P.layers[1])
    assert sorted(mapping.values()) == list(P.layers[2])
    assert labeling.rank_symmetry_bijection(P.bottom, P.top, 0) == {P.bottom: P.top}

    Q, lab11 = w11
    middle = lab11.rank_symmetry_bijection(Q.bottom, Q.top, 1)
    assert sorted(middle.values()) == list(Q.layers[1])


def test_labeling_needs_shuffle_poset():
    """Only posets built by shuffle_poset carry the context."""
    with pytest.raises(ValueError):
        ShuffleLabeling(product_of_chains((1, 1)))


def test_label_chain(w21):
    """Labels of a maximal chain with their cover types."""
    P, labeling = w21
    chain = labeling.decode((upper(1), upper(1), lower(2)))
    sequence = labeling.label_chain(chain)
    assert sequence.labels == (upper(1), upper(1), lower(2))
    assert sequence.cover_types == (CoverType.X, CoverType.XA, CoverType.A)
    with pytest.raises(ValueError):
        labeling.label_chain((P.bottom,))


def test_labeling_kind(w21):
    """The established kinds of the shuffle labeling."""
    P, labeling = w21
    kind = LabelingKind.establish(P, labeling)
    assert kind.c
    assert kind.r_star
    assert kind.s
