"""
Multiplicative Series Engine for SHUFFLE_POSETS
Types of shuffle words, multiplicative functions on the infinite poset of
shuffles and their convolution through truncated bivariate power series.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from fractions import Fraction
from math import comb, factorial, prod
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from core.errors import InconsistentTypeError, NonUnitSeriesError
from core.schemas import MultiplicativeTableSchema, ShuffleContext
from core.shuffles.words import ShuffleWord, bottom, interval_decomposition, shuffle_poset, top

logger = logging.getLogger(__name__)

Trunc = tuple[int, int]
Scalar = Union[int, Fraction]
DEFAULT_TRUNC: Trunc = (8, 8)


def _zeros(trunc: Trunc) -> np.ndarray:
    return np.full((trunc[0] + 1, trunc[1] + 1), Fraction(0), dtype=object)


class BivariateSeries:
    """
    Power series Σ c_ij x^i y^j with exact rational coefficients, truncated
    to i <= Tx and j <= Ty.
    """

    def __init__(self, coeffs: np.ndarray):
        self.coeffs = np.asarray(coeffs, dtype=object)
        if self.coeffs.ndim != 2:
            raise ValueError("Series coefficients must form a 2-d grid")

    @property
    def trunc(self) -> Trunc:
        return self.coeffs.shape[0] - 1, self.coeffs.shape[1] - 1

    @classmethod
    def from_dict(cls, values: Mapping[tuple[int, int], Scalar], trunc: Trunc = DEFAULT_TRUNC) -> "BivariateSeries":
        grid = _zeros(trunc)
        for (i, j), v in values.items():
            if i <= trunc[0] and j <= trunc[1]:
                grid[i, j] = Fraction(v)
        return cls(grid)

    @classmethod
    def constant(cls, c: Scalar, trunc: Trunc = DEFAULT_TRUNC) -> "BivariateSeries":
        return cls.from_dict({(0, 0): c}, trunc)

    @classmethod
    def one(cls, trunc: Trunc = DEFAULT_TRUNC) -> "BivariateSeries":
        return cls.constant(1, trunc)

    @classmethod
    def x(cls, trunc: Trunc = DEFAULT_TRUNC) -> "BivariateSeries":
        return cls.from_dict({(1, 0): 1}, trunc)

    @classmethod
    def y(cls, trunc: Trunc = DEFAULT_TRUNC) -> "BivariateSeries":
        return cls.from_dict({(0, 1): 1}, trunc)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        i, j = key
        if i > self.trunc[0] or j > self.trunc[1] or i < 0 or j < 0:
            raise IndexError(f"Coefficient ({i},{j}) is outside the truncation {self.trunc}")
        return self.coeffs[i, j]

    def _aligned(self, other: "BivariateSeries") -> tuple[np.ndarray, np.ndarray]:
        tx = min(self.trunc[0], other.trunc[0])
        ty = min(self.trunc[1], other.trunc[1])
        return self.coeffs[: tx + 1, : ty + 1], other.coeffs[: tx + 1, : ty + 1]

    def _coerce(self, other) -> Optional["BivariateSeries"]:
        if isinstance(other, BivariateSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return BivariateSeries.constant(other, self.trunc)
        return None

    def __add__(self, other) -> "BivariateSeries":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        a, b = self._aligned(other)
        return BivariateSeries(a + b)

    __radd__ = __add__

    def __neg__(self) -> "BivariateSeries":
        return BivariateSeries(-self.coeffs)

    def __sub__(self, other) -> "BivariateSeries":
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "BivariateSeries":
        return (-self) + other

    def __mul__(self, other) -> "BivariateSeries":
        if isinstance(other, (int, Fraction)):
            return BivariateSeries(self.coeffs * Fraction(other))
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        a, b = self._aligned(other)
        tx, ty = a.shape[0] - 1, a.shape[1] - 1
        out = _zeros((tx, ty))
        for i, j in zip(*np.nonzero(a != 0)):
            out[i:, j:] += a[i, j] * b[: tx + 1 - i, : ty + 1 - j]
        return BivariateSeries(out)

    __rmul__ = __mul__

    def reciprocal(self) -> "BivariateSeries":
        """
        1/F up to the truncation.

        Raises:
            NonUnitSeriesError: if the constant term is zero
        """
        a = self.coeffs
        a00 = a[0, 0]
        if a00 == 0:
            raise NonUnitSeriesError("Cannot invert a series with zero constant term")
        tx, ty = self.trunc
        b = _zeros((tx, ty))
        for i in range(tx + 1):
            for j in range(ty + 1):
                s = (a[: i + 1, : j + 1] * b[i::-1, j::-1]).sum()
                b[i, j] = ((1 if i == j == 0 else 0) - s) / a00
        return BivariateSeries(b)

    def __truediv__(self, other) -> "BivariateSeries":
        if isinstance(other, (int, Fraction)):
            return BivariateSeries(self.coeffs / Fraction(other))
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "BivariateSeries":
        return self.reciprocal() * other

    def __eq__(self, other) -> bool:
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        a, b = self._aligned(other)
        return bool(np.all(a == b))

    __hash__ = None

    def x_part(self) -> "BivariateSeries":
        """F(x, 0)."""
        out = _zeros(self.trunc)
        out[:, 0] = self.coeffs[:, 0]
        return BivariateSeries(out)

    def y_part(self) -> "BivariateSeries":
        """F(0, y)."""
        out = _zeros(self.trunc)
        out[0, :] = self.coeffs[0, :]
        return BivariateSeries(out)

    def substitute_y(self, u: "BivariateSeries") -> "BivariateSeries":
        """F(x, y·u(y)), using only the y-part of u."""
        trunc = (min(self.trunc[0], u.trunc[0]), min(self.trunc[1], u.trunc[1]))
        coeffs = self.coeffs[: trunc[0] + 1, : trunc[1] + 1]
        step = BivariateSeries.y(trunc) * u.truncate(trunc).y_part()
        power = BivariateSeries.one(trunc)
        out = _zeros(trunc)
        for j in range(trunc[1] + 1):
            out += np.multiply.outer(coeffs[:, j], power.coeffs[0, :])
            power = power * step
        return BivariateSeries(out)

    def substitute_x(self, u: "BivariateSeries") -> "BivariateSeries":
        """F(x·u(x), y), using only the x-part of u."""
        trunc = (min(self.trunc[0], u.trunc[0]), min(self.trunc[1], u.trunc[1]))
        coeffs = self.coeffs[: trunc[0] + 1, : trunc[1] + 1]
        step = BivariateSeries.x(trunc) * u.truncate(trunc).x_part()
        power = BivariateSeries.one(trunc)
        out = _zeros(trunc)
        for i in range(trunc[0] + 1):
            out += np.multiply.outer(power.coeffs[:, 0], coeffs[i, :])
            power = power * step
        return BivariateSeries(out)

    def truncate(self, trunc: Trunc) -> "BivariateSeries":
        return BivariateSeries(self.coeffs[: trunc[0] + 1, : trunc[1] + 1].copy())

    def to_grid(self) -> list[list[Fraction]]:
        return [list(row) for row in self.coeffs]

    def __repr__(self) -> str:
        terms = [f"{c}*x^{i}*y^{j}" for (i, j), c in np.ndenumerate(self.coeffs) if c != 0]
        return f"BivariateSeries({' + '.join(terms) or '0'}; trunc={self.trunc})"


class MultiplicativeFunction:
    """
    Function on intervals of the infinite poset of shuffles whose value on
    [u, v] ≅ ∏ W_{i,j} is ∏ f_ij. Requires f_00 = 1.
    """

    def __init__(self, values: Mapping[tuple[int, int], Scalar], trunc: Trunc = DEFAULT_TRUNC):
        self.trunc = trunc
        self.values = {
            (i, j): Fraction(v) for (i, j), v in values.items() if i <= trunc[0] and j <= trunc[1]
        }
        if self.values.get((0, 0)) != 1:
            raise ValueError("Multiplicative function must satisfy f(0,0) = 1")

    def __call__(self, i: int, j: int) -> Fraction:
        if i > self.trunc[0] or j > self.trunc[1]:
            raise IndexError(f"f({i},{j}) is outside the truncation {self.trunc}")
        return self.values.get((i, j), Fraction(0))

    def of_factors(self, counts: Mapping[tuple[int, int], int]) -> Fraction:
        """∏ f(i,j)^k over a factor multiset."""
        return prod((self(i, j) ** k for (i, j), k in counts.items()), start=Fraction(1))

    def to_series(self) -> BivariateSeries:
        return BivariateSeries.from_dict(self.values, self.trunc)

    @classmethod
    def from_series(cls, F: BivariateSeries) -> "MultiplicativeFunction":
        return cls({(int(i), int(j)): c for (i, j), c in np.ndenumerate(F.coeffs) if c != 0}, F.trunc)

    @classmethod
    def from_schema(cls, schema: MultiplicativeTableSchema) -> "MultiplicativeFunction":
        return cls(schema.entries(), tuple(schema.trunc))

    def to_schema(self) -> MultiplicativeTableSchema:
        return MultiplicativeTableSchema(
            trunc=self.trunc,
            values={f"{i},{j}": str(v) for (i, j), v in sorted(self.values.items()) if v != 0},
        )

    @classmethod
    def zeta(cls, trunc: Trunc = DEFAULT_TRUNC) -> "MultiplicativeFunction":
        return cls({(i, j): 1 for i in range(trunc[0] + 1) for j in range(trunc[1] + 1)}, trunc)

    @classmethod
    def mobius(cls, trunc: Trunc = DEFAULT_TRUNC) -> "MultiplicativeFunction":
        """μ_ij = (-1)^(i+j) C(i+j, i)."""
        return cls(
            {(i, j): (-1) ** (i + j) * comb(i + j, i) for i in range(trunc[0] + 1) for j in range(trunc[1] + 1)},
            trunc,
        )

    @classmethod
    def delta(cls, trunc: Trunc = DEFAULT_TRUNC) -> "MultiplicativeFunction":
        return cls({(0, 0): 1}, trunc)


# ---- types of shuffle words -------------------------------------------------------


@dataclass(frozen=True)
class ShuffleType:
    """
    Factor multiplicities a_ij of [0̂, w] and b_ij of [w, 1̂], (0,0) included.
    """

    lower: tuple[tuple[tuple[int, int], int], ...]
    upper: tuple[tuple[tuple[int, int], int], ...]

    @classmethod
    def from_counts(cls, a: Mapping[tuple[int, int], int], b: Mapping[tuple[int, int], int]) -> "ShuffleType":
        return cls(
            tuple(sorted((k, v) for k, v in a.items() if v)),
            tuple(sorted((k, v) for k, v in b.items() if v)),
        )

    @property
    def a(self) -> dict[tuple[int, int], int]:
        return dict(self.lower)

    @property
    def b(self) -> dict[tuple[int, int], int]:
        return dict(self.upper)

    @property
    def m(self) -> int:
        """Number of lower letters of w."""
        return sum(i * k for (i, _), k in self.upper)

    @property
    def n(self) -> int:
        """Number of upper letters of w."""
        return sum(j * k for (_, j), k in self.lower)

    @property
    def M(self) -> int:
        return sum(i * k for (i, _), k in self.lower + self.upper)

    @property
    def N(self) -> int:
        return sum(j * k for (_, j), k in self.lower + self.upper)

    @property
    def r(self) -> int:
        return sum(k for (_, j), k in self.lower if j != 0)

    @property
    def s(self) -> int:
        return sum(k for (i, _), k in self.upper if i != 0)

    @property
    def epsilon(self) -> int:
        return self.r - self.s

    def validate(self) -> "ShuffleType":
        """
        Raises:
            InconsistentTypeError: if the factor counts cannot come from a shuffle word
        """
        total_a = sum(k for _, k in self.lower)
        total_b = sum(k for _, k in self.upper)
        if any(k < 0 or i < 0 or j < 0 for (i, j), k in self.lower + self.upper):
            raise InconsistentTypeError("Negative factor data")
        if 1 + self.m != total_a or 1 + self.n != total_b:
            raise InconsistentTypeError(
                f"Factor counts {total_a}, {total_b} do not match {self.m}+1 lower and {self.n}+1 upper letters"
            )
        if self.epsilon not in (-1, 0, 1):
            raise InconsistentTypeError(f"r - s = {self.epsilon} is outside {{-1, 0, 1}}")
        return self

    def __str__(self) -> str:
        def fmt(part):
            return " ".join(f"W{i}{j}^{k}" if k > 1 else f"W{i}{j}" for (i, j), k in part) or "1"
        return f"[{fmt(self.lower)} | {fmt(self.upper)}]"

    def to_dict(self) -> dict:
        return {
            "lower": {f"{i},{j}": k for (i, j), k in self.lower},
            "upper": {f"{i},{j}": k for (i, j), k in self.upper},
            "M": self.M, "N": self.N, "m": self.m, "n": self.n,
            "r": self.r, "s": self.s, "epsilon": self.epsilon,
        }


def type_of(w: ShuffleWord, ctx: ShuffleContext) -> ShuffleType:
    """Type of w from the factorizations of [0̂, w] and [w, 1̂]."""
    a = interval_decomposition(bottom(ctx), w, ctx).counts()
    b = interval_decomposition(w, top(ctx), ctx).counts()
    return ShuffleType.from_counts(a, b).validate()


def _multinomial(total: int, parts: Iterable[int]) -> int:
    return factorial(total) // prod(factorial(k) for k in parts)


def count_by_type(t: ShuffleType) -> int:
    """
    Number of words of W_{M,N} with type t:
    (2 - ε²) · (m+1)!/∏a_ij! · (n+1)!/∏b_ij! / (C(m+1, r) C(n+1, s)), or 1 when r = s = 0.

    Raises:
        InconsistentTypeError: if t violates the factor-count relations
    """
    t.validate()
    if t.r == 0 and t.s == 0:
        return 1
    numerator = (2 - t.epsilon ** 2) * _multinomial(t.m + 1, t.a.values()) * _multinomial(t.n + 1, t.b.values())
    value = Fraction(numerator, comb(t.m + 1, t.r) * comb(t.n + 1, t.s))
    if value.denominator != 1:
        raise InconsistentTypeError(f"Type {t} gives a non-integral count {value}")
    return int(value)


@lru_cache(maxsize=32)
def _classified(M: int, N: int) -> tuple[tuple[ShuffleType, int], ...]:
    ctx = ShuffleContext(lower_size=M, upper_size=N)
    census = Counter(type_of(w, ctx) for w in shuffle_poset(ctx).elements)
    logger.debug(f"W_{M},{N}: {len(census)} types")
    return tuple(census.items())


def classify_elements(M: int, N: int) -> Counter:
    """Exhaustive census type -> number of words of W_{M,N}."""
    return Counter(dict(_classified(M, N)))


def type_census(M: int, N: int) -> pd.DataFrame:
    """Census of W_{M,N} by type, with the closed-form count next to the observed one."""
    rows = [
        {"type": str(t), "epsilon": t.epsilon, "observed": k, "formula": count_by_type(t)}
        for t, k in sorted(classify_elements(M, N).items(), key=lambda item: (item[0].epsilon, str(item[0])))
    ]
    return pd.DataFrame(rows, columns=["type", "epsilon", "observed", "formula"])


# ---- convolution ----------------------------------------------------------------------


def convolve_direct(
    f: MultiplicativeFunction, g: MultiplicativeFunction, M: int, N: int, epsilon: Optional[int] = None
) -> Fraction:
    """
    (f∗g)_{M,N} = Σ_w f([0̂, w]) g([w, 1̂]) over W_{M,N}, optionally only over
    words with r - s = epsilon.
    """
    total = Fraction(0)
    for t, count in _classified(M, N):
        if epsilon is None or t.epsilon == epsilon:
            total += count * f.of_factors(t.a) * g.of_factors(t.b)
    return total


def convolve_direct_series(
    f: MultiplicativeFunction, g: MultiplicativeFunction, trunc: Trunc, max_total: Optional[int] = None,
    epsilon: Optional[int] = None,
) -> BivariateSeries:
    """convolve_direct on every (M, N) inside trunc with M + N <= max_total; other entries stay zero."""
    values = {}
    for M in range(trunc[0] + 1):
        for N in range(trunc[1] + 1):
            if max_total is None or M + N <= max_total:
                values[(M, N)] = convolve_direct(f, g, M, N, epsilon)
    return BivariateSeries.from_dict(values, trunc)


def _check_unit(F: BivariateSeries, name: str) -> None:
    if F[0, 0] != 1:
        raise NonUnitSeriesError(f"{name} must have constant term 1, got {F[0, 0]}")


def _substituted(F: BivariateSeries, G: BivariateSeries):
    _check_unit(F, "F")
    _check_unit(G, "G")
    trunc = (min(F.trunc[0], G.trunc[0]), min(F.trunc[1], G.trunc[1]))
    F, G = F.truncate(trunc), G.truncate(trunc)
    F0, G0 = F.x_part(), G.y_part()
    return F0, G0, F.substitute_y(G0), G.substitute_x(F0)


def convolve_closed_form(F: BivariateSeries, G: BivariateSeries) -> BivariateSeries:
    """
    Series of f∗g from the series of f and g:
    1/(F∗G) = 1/(F̃ G_0) + 1/(F_0 G̃) - 1/(F_0 G_0), F̃ = F(x, G_0 y), G̃ = G(F_0 x, y).

    Raises:
        NonUnitSeriesError: if F or G does not have constant term 1
    """
    F0, G0, Ft, Gt = _substituted(F, G)
    inverse = (Ft * G0).reciprocal() + (F0 * Gt).reciprocal() - (F0 * G0).reciprocal()
    return inverse.reciprocal()


def epsilon_split(F: BivariateSeries, G: BivariateSeries) -> tuple[BivariateSeries, BivariateSeries, BivariateSeries]:
    """
    Parts of F∗G coming from words with r = s + 1, r = s and s = r + 1:
    D+ = (F̃ - F_0) G_0 / (1 - K), D- = F_0 (G̃ - G_0) / (1 - K),
    K = (F̃ - F_0)(G̃ - G_0) / (F_0 G_0), D0 = F∗G - D+ - D-.
    """
    F0, G0, Ft, Gt = _substituted(F, G)
    K = (Ft - F0) * (Gt - G0) * (F0 * G0).reciprocal()
    damping = (1 - K).reciprocal()
    d_plus = (Ft - F0) * G0 * damping
    d_minus = F0 * (Gt - G0) * damping
    d_zero = convolve_closed_form(F, G) - d_plus - d_minus
    return d_plus, d_zero, d_minus


def chain_factor(a: Scalar, b: Scalar, trunc: Trunc = DEFAULT_TRUNC) -> BivariateSeries:
    """1/((1 - a x)(1 - b y))."""
    one = BivariateSeries.one(trunc)
    return ((one - BivariateSeries.x(trunc) * Fraction(a)) * (one - BivariateSeries.y(trunc) * Fraction(b))).reciprocal()


def product_identity(a: Sequence[Scalar], b: Sequence[Scalar], trunc: Trunc = DEFAULT_TRUNC) -> BivariateSeries:
    """1/(1 - (Σa_i)x - (Σb_i)y + (Σ_i (a_1+...+a_i) b_i) xy)."""
    if len(a) != len(b):
        raise ValueError(f"Sequences of different lengths {len(a)} and {len(b)}")
    partial, cross = Fraction(0), Fraction(0)
    for ai, bi in zip(a, b):
        partial += Fraction(ai)
        cross += partial * Fraction(bi)
    denominator = BivariateSeries.from_dict(
        {(0, 0): 1, (1, 0): -sum(map(Fraction, a)), (0, 1): -sum(map(Fraction, b)), (1, 1): cross}, trunc
    )
    return denominator.reciprocal()


def iterated_product(a: Sequence[Scalar], b: Sequence[Scalar], trunc: Trunc = DEFAULT_TRUNC) -> BivariateSeries:
    """Left-to-right ∗-product of the factors 1/((1 - a_i x)(1 - b_i y))."""
    if len(a) != len(b):
        raise ValueError(f"Sequences of different lengths {len(a)} and {len(b)}")
    out = BivariateSeries.one(trunc)
    for ai, bi in zip(a, b):
        out = convolve_closed_form(out, chain_factor(ai, bi, trunc))
    return out


def zeta_polynomial_gf(k: int, trunc: Trunc = DEFAULT_TRUNC) -> BivariateSeries:
    """Σ Z_{ij}(k) x^i y^j = 1/(1 - kx - ky + C(k+1, 2) xy)."""
    binom = Fraction(k * (k + 1), 2)
    return BivariateSeries.from_dict({(0, 0): 1, (1, 0): -k, (0, 1): -k, (1, 1): binom}, trunc).reciprocal()


def zeta_values(M: int, N: int, k: int) -> Fraction:
    """ζ^k(0̂, 1̂) on the explicit poset W_{M,N}."""
    return shuffle_poset(ShuffleContext(lower_size=M, upper_size=N)).zeta_power(k)


def zeta_function_table(trunc: Trunc = DEFAULT_TRUNC) -> MultiplicativeFunction:
    return MultiplicativeFunction.zeta(trunc)


def mobius_function_table(trunc: Trunc = DEFAULT_TRUNC) -> MultiplicativeFunction:
    return MultiplicativeFunction.mobius(trunc)


def delta_table(trunc: Trunc = DEFAULT_TRUNC) -> MultiplicativeFunction:
    return MultiplicativeFunction.delta(trunc)
