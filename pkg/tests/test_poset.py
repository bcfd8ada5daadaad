"""
Tests for the ranked poset container
"""
import numpy as np
import pytest

from core.errors import GradingError, OrderViolationError, SizeLimitExceeded
from core.poset import (
    IncidenceFunction,
    build,
    convolve,
    is_isomorphic,
    poset_from_covers,
    product_of_chains,
)
from core.schemas import ShuffleContext
from core.shuffles.words import shuffle_poset


@pytest.fixture
def w21():
    """W_{2,1}: 12 elements, rank 3."""
    return shuffle_poset(ShuffleContext(lower_size=2, upper_size=1))


@pytest.fixture
def w11():
    """W_{1,1}: the rank 2 lattice with three atoms."""
    return shuffle_poset(ShuffleContext(lower_size=1, upper_size=1))


@pytest.fixture
def pi3():
    """Rank 2 lattice with three atoms, built from explicit covers."""
    covers = [("0", "a"), ("0", "b"), ("0", "c"), ("a", "1"), ("b", "1"), ("c", "1")]
    return poset_from_covers(covers, key=str, name="Pi3")


def test_sizes(w21, w11):
    """Element counts and ranks."""
    assert len(w21) == 12
    assert w21.n == 3
    assert len(w11) == 5


def test_rank_generating_function(w21, w11):
    """Rank sizes are palindromic."""
    assert w21.rank_generating_function() == (1, 5, 5, 1)
    assert w11.rank_generating_function() == (1, 3, 1)
    assert product_of_chains((1, 1)).rank_generating_function() == (1, 2, 1)


def test_flag_vectors(w21):
    """α and β values of W_{2,1}."""
    assert w21.alpha([]) == 1
    assert w21.alpha([1]) == 5
    assert w21.alpha([2]) == 5
    assert w21.alpha([1, 2]) == 12
    assert w21.beta([]) == 1
    assert w21.beta([1]) == 4
    assert w21.beta([2]) == 4
    assert w21.beta([1, 2]) == 3


def test_flag_vectors_reject_bad_rank(w21):
    """Ranks outside 1..n-1 are rejected."""
    with pytest.raises(ValueError):
        w21.alpha([3])
    with pytest.raises(ValueError):
        w21.beta([0])


def test_flag_table(w21):
    """Flag table has one row per rank set."""
    table = w21.flag_table()
    assert list(table.columns) == ["S", "size", "alpha", "beta"]
    assert len(table) == 4
    row = table[table["S"] == "{1,2}"].iloc[0]
    assert row["alpha"] == 12
    assert row["beta"] == 3


def test_flag_table_rank_zero():
    """W_{0,0} has one row, the empty rank set, with α = β = 1."""
    P = shuffle_poset(ShuffleContext(lower_size=0, upper_size=0))
    table = P.flag_table()
    assert len(table) == 1
    row = table.iloc[0]
    assert (row["S"], row["size"], row["alpha"], row["beta"]) == ("{}", 0, 1, 1)
    assert P.flag_vectors().alpha == {frozenset(): 1}


def test_alpha_beta_inversion(w21):
    """α(S) is the sum of β(T) over T ⊆ S."""
    fv = w21.flag_vectors()
    for S, a in fv.alpha.items():
        assert a == sum(b for T, b in fv.beta.items() if T <= S)


def test_mobius(w21, w11):
    """Möbius values from the recursion."""
    assert w21.mobius(w21.bottom, w21.top) == -3
    assert w11.mobius(w11.bottom, w11.top) == 2
    for u in range(len(w21)):
        assert w21.mobius(u, u) == 1


def test_mobius_rejects_incomparable(w11):
    """Two distinct atoms are incomparable."""
    a, b = w11.layers[1][:2]
    with pytest.raises(OrderViolationError):
        w11.mobius(a, b)


def test_incidence_convolution(w21, w11):
    """ζ∗ζ counts interval elements and μ∗ζ = δ."""
    zeta = IncidenceFunction.zeta(w11)
    assert convolve(w11, zeta, zeta)(w11.bottom, w11.top) == 5
    assert convolve(w11, convolve(w11, zeta, zeta), zeta)(w11.bottom, w11.top) == 12

    mu, z = IncidenceFunction.mobius(w21), IncidenceFunction.zeta(w21)
    assert convolve(w21, mu, z) == IncidenceFunction.delta(w21)
    assert convolve(w21, z, mu) == IncidenceFunction.delta(w21)


def test_convolution_rejects_foreign_function(w21, w11):
    """Functions must live on the poset being convolved over."""
    with pytest.raises(ValueError):
        convolve(w21, IncidenceFunction.zeta(w11), IncidenceFunction.zeta(w21))


def test_zeta_power(w11):
    """Multichain counts and the Möbius value as ζ^(-1)."""
    assert w11.zeta_power(0) == 0
    assert w11.zeta_power(1) == 1
    assert w11.zeta_power(2) == 5
    assert w11.zeta_power(3) == 12
    assert w11.zeta_power(-1) == 2


def test_product_of_chains():
    """Products of chains have the expected sizes and chain counts."""
    P = product_of_chains((2, 1))
    assert len(P) == 6
    assert P.chain_count() == 3
    assert product_of_chains((1, 1)).chain_count() == 2
    assert product_of_chains((3,)).chain_count() == 1
    with pytest.raises(ValueError):
        product_of_chains(())


def test_isomorphism(w11, pi3):
    """W_{1,1} is Π_3 and W_{0,N} is boolean."""
    assert is_isomorphic(w11, pi3)
    assert not is_isomorphic(w11, product_of_chains((2,)))
    assert is_isomorphic(w11, w11)
    for N in (1, 2, 3):
        boolean = product_of_chains((1,) * N)
        assert is_isomorphic(shuffle_poset(ShuffleContext(lower_size=0, upper_size=N)), boolean)


def test_isomorphism_size_cap(w21):
    """Oversized inputs are refused."""
    with pytest.raises(SizeLimitExceeded):
        is_isomorphic(w21, w21, max_size=5)


def test_local_rank_symmetry(w21):
    """W_{M,N} and products of chains are locally rank symmetric; a lopsided poset is not."""
    assert w21.is_locally_rank_symmetric()
    assert product_of_chains((2, 1)).is_locally_rank_symmetric()
    lopsided = poset_from_covers([("0", "a"), ("0", "b"), ("a", "c"), ("b", "c"), ("c", "1")], key=str)
    assert not lopsided.is_locally_rank_symmetric()
    assert lopsided.rank_symmetry_witness() is not None


def test_build_rejects_ungraded():
    """A cover that skips a rank is rejected."""
    covers = {"0": ["a", "1"], "a": ["1"], "1": []}
    with pytest.raises(GradingError):
        build(lambda p: covers[p], "0", key=str)


def test_build_rejects_two_maxima():
    """Two maximal elements are rejected."""
    covers = {"0": ["a", "b"], "a": [], "b": []}
    with pytest.raises(GradingError):
        build(lambda p: covers[p], "0", key=str)


def test_reachability_is_order(w21):
    """Reachability is reflexive and antisymmetric."""
    R = w21.reachability
    assert np.all(np.diag(R))
    assert not np.any(R & R.T & ~np.eye(len(w21), dtype=bool))


def test_to_dot(w11):
    """DOT output lists every node and cover."""
    dot = w11.to_dot()
    assert dot.startswith('digraph "W_1,1"')
    assert dot.count("->") == sum(len(c) for c in w11.covers_up)


def test_maximal_chains(w21):
    """Depth-first enumeration yields every maximal chain once."""
    chains = list(w21.maximal_chains())
    assert len(chains) == 12
    assert len(set(chains)) == 12
    assert all(w21.is_maximal_chain(c) for c in chains)
    assert not w21.is_maximal_chain((w21.bottom, w21.top))


def test_id_of(w21):
    """Payloads map back to element ids."""
    assert w21.id_of(w21.elements[w21.bottom]) == w21.bottom
    with pytest.raises(ValueError):
        w21.id_of("not an element")


def test_incidence_from_callable(w11):
    """A constant callable tabulates ζ."""
    assert IncidenceFunction.from_callable(w11, lambda u, v: 1) == IncidenceFunction.zeta(w11)
