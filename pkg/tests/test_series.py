"""
Tests for types of shuffle words and the convolution of multiplicative functions
"""
import random
from fractions import Fraction

import pytest

from core.algebra.series import (
    BivariateSeries,
    MultiplicativeFunction,
    ShuffleType,
    classify_elements,
    convolve_closed_form,
    convolve_direct,
    convolve_direct_series,
    count_by_type,
    delta_table,
    epsilon_split,
    iterated_product,
    mobius_function_table,
    product_identity,
    type_census,
    type_of,
    zeta_function_table,
    zeta_polynomial_gf,
)
from core.errors import InconsistentTypeError, NonUnitSeriesError
from core.schemas import ShuffleContext
from core.shuffles.words import element_count_formula, parse_word
from core.verify import random_table

TRUNC = (4, 4)


@pytest.fixture
def zeta():
    """ζ truncated at (4, 4)."""
    return MultiplicativeFunction.zeta(TRUNC)


@pytest.fixture
def mobius():
    """μ truncated at (4, 4)."""
    return MultiplicativeFunction.mobius(TRUNC)


def test_series_arithmetic():
    """Products and reciprocals of truncated series."""
    x, y = BivariateSeries.x(TRUNC), BivariateSeries.y(TRUNC)
    assert (x * y)[1, 1] == 1
    geometric = (1 - x).reciprocal()
    assert all(geometric[i, 0] == 1 for i in range(5))
    assert geometric[1, 1] == 0
    assert (geometric * (1 - x)) == BivariateSeries.one(TRUNC)


def test_reciprocal_needs_unit():
    """A zero constant term has no inverse."""
    with pytest.raises(NonUnitSeriesError):
        BivariateSeries.x(TRUNC).reciprocal()


def test_multiplicative_function_tables(mobius):
    """μ_ij = (-1)^(i+j) C(i+j, i); f(0,0) must be 1."""
    assert mobius(1, 1) == 2
    assert mobius(2, 1) == -3
    assert mobius(0, 3) == -1
    with pytest.raises(IndexError):
        mobius(5, 0)
    with pytest.raises(ValueError):
        MultiplicativeFunction({(0, 0): 2}, TRUNC)
    schema = MultiplicativeFunction.mobius((1, 1)).to_schema()
    assert schema.values == {"0,0": "1", "0,1": "-1", "1,0": "-1", "1,1": "2"}


def test_type_of_word():
    """x1 a1 and a1 x1 share a type realised by two words."""
    ctx = ShuffleContext(lower_size=1, upper_size=1)
    t = type_of(parse_word("x1 a1"), ctx)
    assert t == type_of(parse_word("a1 x1"), ctx)
    assert count_by_type(t) == 2
    assert (t.M, t.N) == (1, 1)


def test_classify_w11():
    """Four types cover the five words of W_{1,1}."""
    census = classify_elements(1, 1)
    assert len(census) == 4
    assert sum(census.values()) == 5
    assert sum(count_by_type(t) for t in census) == 5


@pytest.mark.parametrize("M,N", [(2, 0), (2, 1), (2, 2), (3, 1)])
def test_count_by_type_matches_census(M, N):
    """The closed-form count of every type equals the exhaustive count."""
    census = classify_elements(M, N)
    for t, observed in census.items():
        assert count_by_type(t) == observed
    assert sum(census.values()) == element_count_formula(M, N)


def test_type_census_table():
    """One row per type with observed and closed-form counts."""
    table = type_census(2, 1)
    assert list(table.columns) == ["type", "epsilon", "observed", "formula"]
    assert (table["observed"] == table["formula"]).all()
    assert table["observed"].sum() == 12
    assert set(table["epsilon"]) <= {-1, 0, 1}


def test_inconsistent_type():
    """Factor counts that no word can produce are rejected."""
    bad = ShuffleType.from_counts({(0, 0): 1}, {(0, 0): 2})
    with pytest.raises(InconsistentTypeError):
        count_by_type(bad)


def test_direct_convolution(zeta, mobius):
    """ζ∗ζ counts elements; μ∗ζ vanishes off the empty interval."""
    assert convolve_direct(zeta, zeta, 1, 1) == 5
    assert convolve_direct(zeta, zeta, 2, 1) == 12
    assert convolve_direct(mobius, zeta, 0, 0) == 1
    for M, N in [(1, 0), (1, 1), (2, 1), (1, 2)]:
        assert convolve_direct(mobius, zeta, M, N) == 0


def test_epsilon_parts_of_w11(zeta):
    """Words of W_{1,1} split 1 / 3 / 1 by r - s."""
    assert convolve_direct(zeta, zeta, 1, 1, epsilon=1) == 1
    assert convolve_direct(zeta, zeta, 1, 1, epsilon=0) == 3
    assert convolve_direct(zeta, zeta, 1, 1, epsilon=-1) == 1
    d_plus, d_zero, d_minus = epsilon_split(zeta.to_series(), zeta.to_series())
    assert (d_plus[1, 1], d_zero[1, 1], d_minus[1, 1]) == (1, 3, 1)


def test_closed_form_matches_direct(zeta, mobius):
    """The closed form agrees with the direct sums inside the truncation."""
    for f, g in [(zeta, zeta), (mobius, zeta), (zeta, mobius)]:
        direct = convolve_direct_series(f, g, (3, 3), max_total=3)
        closed = convolve_closed_form(f.to_series(), g.to_series())
        for M in range(4):
            for N in range(4 - M):
                assert closed[M, N] == direct[M, N]


def test_zeta_squared_is_zeta_polynomial(zeta):
    """ζ∗ζ = 1/(1 - 2x - 2y + 3xy)."""
    squared = convolve_closed_form(zeta.to_series(), zeta.to_series())
    assert squared == zeta_polynomial_gf(2, TRUNC)
    assert squared[1, 1] == 5


def test_delta_is_identity(zeta):
    """F∗δ = F."""
    F = zeta.to_series()
    assert convolve_closed_form(F, MultiplicativeFunction.delta(TRUNC).to_series()) == F


def test_closed_form_needs_unit_series():
    """Constant terms other than 1 are rejected."""
    with pytest.raises(NonUnitSeriesError):
        convolve_closed_form(BivariateSeries.constant(2, (2, 2)), BivariateSeries.one((2, 2)))


def test_product_identity():
    """Three unit chain factors give the zeta polynomial at k = 3."""
    a = b = [1, 1, 1]
    series = product_identity(a, b, TRUNC)
    assert series[1, 1] == 12
    assert series == zeta_polynomial_gf(3, TRUNC)
    assert series == iterated_product(a, b, TRUNC)
    mixed = [Fraction(1, 2), Fraction(-1), Fraction(2, 3)]
    assert product_identity(mixed, mixed[::-1], (3, 3)) == iterated_product(mixed, mixed[::-1], (3, 3))
    with pytest.raises(ValueError):
        product_identity([1], [1, 1])


@pytest.mark.parametrize("k", [-1, 0, 1, 2, 3])
def test_zeta_polynomial_on_w11(k):
    """Z_11(k) = (3k^2 - k)/2."""
    assert zeta_polynomial_gf(k, (2, 2))[1, 1] == Fraction(3 * k * k - k, 2)


def test_standard_tables():
    """ζ, μ and δ as tables."""
    assert zeta_function_table((2, 2))(2, 2) == 1
    assert mobius_function_table((1, 1))(1, 1) == 2
    assert delta_table((1, 1))(1, 0) == 0
    F = mobius_function_table((2, 2)).to_series()
    assert MultiplicativeFunction.from_series(F).to_series() == F


def test_closed_form_with_mixed_truncations():
    """Series truncated differently convolve at the smaller truncation."""
    F = MultiplicativeFunction.zeta((3, 3)).to_series()
    G = MultiplicativeFunction.zeta((2, 2)).to_series()
    product = convolve_closed_form(F, G)
    assert product.trunc == (2, 2)
    assert product == zeta_polynomial_gf(2, (2, 2))
    assert convolve_closed_form(G, F) == product
    d_plus, d_zero, d_minus = epsilon_split(F, G)
    assert d_plus.trunc == d_zero.trunc == d_minus.trunc == (2, 2)
    assert (d_plus[1, 1], d_zero[1, 1], d_minus[1, 1]) == (1, 3, 1)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_convolution_is_associative(seed):
    """(f∗g)∗h = f∗(g∗h) on random tables truncated at (5, 5)."""
    rng = random.Random(seed)
    F, G, H = (random_table(rng, (5, 5)).to_series() for _ in range(3))
    left = convolve_closed_form(convolve_closed_form(F, G), H)
    right = convolve_closed_form(F, convolve_closed_form(G, H))
    assert left == right
    assert left.trunc == (5, 5)
