"""
Symmetric Function Engine for SHUFFLE_POSETS
Quasisymmetric functions of fixed degree in the monomial basis M_α, with
L-basis conversion, the ω involution, flag functions of posets and
Frobenius characteristics.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb, factorial, prod
from typing import Iterable, Mapping, Optional, Union

from sympy.utilities.iterables import multiset_permutations, partitions as sympy_partitions

from core.errors import InvariantViolation
from core.poset import IncidenceFunction, RankedPoset, RankSet, all_rank_sets

logger = logging.getLogger(__name__)

Composition = tuple[int, ...]
Partition = tuple[int, ...]
Scalar = Union[int, Fraction]


@lru_cache(maxsize=None)
def stuffle(alpha: Composition, beta: Composition) -> tuple[tuple[Composition, int], ...]:
    """Quasi-shuffle product M_α M_β as (composition, coefficient) pairs."""
    if not alpha:
        return ((beta, 1),)
    if not beta:
        return ((alpha, 1),)
    a, rest_a = alpha[0], alpha[1:]
    b, rest_b = beta[0], beta[1:]
    res: Counter = Counter()
    for comp, coeff in stuffle(rest_a, beta):
        res[(a, *comp)] += coeff
    for comp, coeff in stuffle(alpha, rest_b):
        res[(b, *comp)] += coeff
    for comp, coeff in stuffle(rest_a, rest_b):
        res[(a + b, *comp)] += coeff
    return tuple(sorted(res.items()))


def composition_of(S: Iterable[int], n: int) -> Composition:
    """Gap composition (s_1, s_2 - s_1, ..., n - s_k) of a rank set."""
    points = [0, *sorted(S), n]
    if any(not 0 < s < n for s in points[1:-1]):
        raise ValueError(f"Rank set {sorted(S)} is not inside 1..{n - 1}")
    return tuple(b - a for a, b in zip(points, points[1:])) if n > 0 else ()


def rank_set_of(alpha: Composition) -> RankSet:
    """Partial sums of α, excluding the total."""
    sums, total = [], 0
    for part in alpha[:-1]:
        total += part
        sums.append(total)
    return frozenset(sums)


def compositions(n: int) -> list[Composition]:
    return [composition_of(S, n) for S in all_rank_sets(n)] if n > 0 else [()]


def partitions(n: int) -> list[Partition]:
    """Partitions of n in reverse lexicographic order, (n) first."""
    if n == 0:
        return [()]
    out = []
    for p in sympy_partitions(n):
        out.append(tuple(sorted((k for k, m in p.items() for _ in range(m)), reverse=True)))
    return sorted(out, reverse=True)


def z(lam: Partition) -> int:
    """z_λ = ∏ λ_i · ∏ m_i! (size of the centralizer of a permutation of type λ)."""
    mult = Counter(lam)
    return prod(lam) * prod(factorial(m) for m in mult.values())


class SymPoly:
    """
    Homogeneous quasisymmetric function of a fixed degree, stored as exact
    coefficients in the monomial quasisymmetric basis.
    """

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: Optional[Mapping[Composition, Scalar]] = None):
        self.degree = degree
        self.coeffs: dict[Composition, Fraction] = {}
        for alpha, c in (coeffs or {}).items():
            alpha = tuple(alpha)
            if sum(alpha) != degree or any(part < 1 for part in alpha):
                raise ValueError(f"Composition {alpha} does not have degree {degree}")
            if c != 0:
                self.coeffs[alpha] = Fraction(c)

    @classmethod
    def zero(cls, degree: int = 0) -> "SymPoly":
        return cls(degree)

    @classmethod
    def one(cls) -> "SymPoly":
        return cls(0, {(): 1})

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, alpha: Composition) -> Fraction:
        return self.coeffs.get(tuple(alpha), Fraction(0))

    def items(self) -> list[tuple[Composition, Fraction]]:
        """Terms ordered by rank set size, then composition."""
        return sorted(self.coeffs.items(), key=lambda t: (len(t[0]), t[0]))

    def _check_degree(self, other: "SymPoly") -> None:
        if self.degree != other.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"Degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "SymPoly") -> "SymPoly":
        if not isinstance(other, SymPoly):
            return NotImplemented
        self._check_degree(other)
        out = Counter(self.coeffs)
        out.update(other.coeffs)
        degree = self.degree if not self.is_zero() else other.degree
        return SymPoly(degree, out)

    def __neg__(self) -> "SymPoly":
        return SymPoly(self.degree, {a: -c for a, c in self.coeffs.items()})

    def __sub__(self, other: "SymPoly") -> "SymPoly":
        return self + (-other)

    def scale(self, c: Scalar) -> "SymPoly":
        return SymPoly(self.degree, {a: c * v for a, v in self.coeffs.items()})

    def __mul__(self, other) -> "SymPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, SymPoly):
            return NotImplemented
        out: Counter = Counter()
        for a, ca in self.coeffs.items():
            for b, cb in other.coeffs.items():
                for comp, k in stuffle(a, b):
                    out[comp] += ca * cb * k
        return SymPoly(self.degree + other.degree, out)

    def __rmul__(self, other) -> "SymPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int) -> "SymPoly":
        if k < 0:
            raise ValueError("Negative powers are not defined")
        out = SymPoly.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymPoly):
            return NotImplemented
        if self.is_zero() and other.is_zero():
            return True
        return self.degree == other.degree and self.coeffs == other.coeffs

    __hash__ = None

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        return " + ".join(f"{c}*M{alpha}" for alpha, c in self.items())


def monomial_qsym(alpha: Composition) -> SymPoly:
    alpha = tuple(alpha)
    return SymPoly(sum(alpha), {alpha: 1})


def fundamental(S: Iterable[int], n: int) -> SymPoly:
    """L_{S,n} = Σ_{T ⊇ S} M_{comp(T)}."""
    S = frozenset(S)
    composition_of(S, n)
    rest = [r for r in range(1, n) if r not in S]
    out = {}
    for k in range(len(rest) + 1):
        for extra in combinations(rest, k):
            out[composition_of(S | set(extra), n)] = 1
    return SymPoly(n, out)


L = fundamental


def to_L_basis(F: SymPoly) -> dict[RankSet, Fraction]:
    """Coefficients of F in the fundamental basis, keyed by rank set."""
    n = F.degree
    c = {rank_set_of(alpha): v for alpha, v in F.coeffs.items()}
    out = {}
    for T in all_rank_sets(n):
        total = Fraction(0)
        members = sorted(T)
        for k in range(len(members) + 1):
            for S in combinations(members, k):
                v = c.get(frozenset(S))
                if v:
                    total += (-1) ** (len(members) - k) * v
        if total:
            out[T] = total
    return out


def from_L_basis(coeffs: Mapping[RankSet, Scalar], n: int) -> SymPoly:
    out = SymPoly.zero(n)
    for S, v in coeffs.items():
        out = out + fundamental(S, n).scale(v)
    return out


def omega(F: SymPoly) -> SymPoly:
    """L_{S,n} -> L_{[n-1] - S, n}, extended linearly."""
    n = F.degree
    if n == 0:
        return F
    full = frozenset(range(1, n))
    return from_L_basis({full - S: v for S, v in to_L_basis(F).items()}, n)


def _generator_product(spec: Union[int, Iterable[int]], generator) -> SymPoly:
    parts = [spec] if isinstance(spec, int) else list(spec)
    out = SymPoly.one()
    for j in parts:
        if j < 0:
            raise ValueError(f"Negative part {j}")
        out = out * generator(j)
    return out


@lru_cache(maxsize=None)
def _e(j: int) -> SymPoly:
    return SymPoly.one() if j == 0 else monomial_qsym((1,) * j)


@lru_cache(maxsize=None)
def _h(j: int) -> SymPoly:
    return SymPoly(j, {alpha: 1 for alpha in compositions(j)})


@lru_cache(maxsize=None)
def _p(j: int) -> SymPoly:
    return SymPoly.one() if j == 0 else monomial_qsym((j,))


def e(lam: Union[int, Iterable[int]]) -> SymPoly:
    """Elementary symmetric function e_j or e_λ."""
    return _generator_product(lam, _e)


def h(lam: Union[int, Iterable[int]]) -> SymPoly:
    """Complete homogeneous symmetric function h_j or h_λ."""
    return _generator_product(lam, _h)


def p(lam: Union[int, Iterable[int]]) -> SymPoly:
    """Power sum p_j or p_λ."""
    return _generator_product(lam, _p)


def monomial_symmetric(lam: Partition) -> SymPoly:
    """m_λ as the sum of M_α over the distinct rearrangements α of λ."""
    lam = tuple(lam)
    return SymPoly(sum(lam), {tuple(alpha): 1 for alpha in multiset_permutations(list(lam))})


@dataclass
class SymmetryCheck:
    """Whether F is symmetric; m-coefficients if it is, otherwise two compositions with different coefficients."""

    symmetric: bool
    coefficients: Optional[dict[Partition, Fraction]] = None
    witness: Optional[tuple[Composition, Composition]] = None

    def __bool__(self) -> bool:
        return self.symmetric


def is_symmetric(F: SymPoly) -> SymmetryCheck:
    shapes = sorted({tuple(sorted(alpha, reverse=True)) for alpha in F.coeffs}, reverse=True)
    coefficients = {}
    for lam in shapes:
        reference = F.coefficient(lam)
        for alpha in multiset_permutations(list(lam)):
            alpha = tuple(alpha)
            if F.coefficient(alpha) != reference:
                return SymmetryCheck(False, witness=(lam, alpha))
        coefficients[lam] = reference
    return SymmetryCheck(True, coefficients=coefficients)


def symmetric_coefficients(F: SymPoly) -> dict[Partition, Fraction]:
    """
    m-basis coefficients of a symmetric F.

    Raises:
        ValueError: if F is not symmetric
    """
    check = is_symmetric(F)
    if not check:
        raise ValueError(f"Not symmetric: M{check.witness[0]} and M{check.witness[1]} differ")
    return check.coefficients


def flag_qsym(P: RankedPoset, phi: Optional[IncidenceFunction] = None) -> SymPoly:
    """
    Flag quasisymmetric function Σ_S α_P(φ, S) M_{comp(S)}; φ defaults to ζ,
    in which case the coefficients are the flag f-vector.
    """
    n = P.n
    if n == 0:
        value = 1 if phi is None else phi(P.bottom, P.top)
        return SymPoly(0, {(): value})
    out = {}
    for S in all_rank_sets(n):
        value = P.alpha(S) if phi is None else P.alpha_weighted(phi.values, S)
        out[composition_of(S, n)] = value
    return SymPoly(n, out)


def flag_from_label_multisets(multisets: Iterable[Iterable], strict: bool = True) -> SymPoly:
    """
    Σ e_ν (strict) or Σ h_ν over label multisets, ν the sorted multiplicities.
    """
    out: Optional[SymPoly] = None
    for ms in multisets:
        nu = tuple(sorted(Counter(ms).values(), reverse=True))
        term = e(nu) if strict else h(nu)
        out = term if out is None else out + term
    return out if out is not None else SymPoly.zero()


def frobenius_from_orbit_types(types: Iterable[Partition], degree: Optional[int] = None) -> SymPoly:
    """Σ h_ν over the orbit types of a permutation action."""
    out = SymPoly.zero(degree or 0)
    for nu in types:
        out = out + h(nu)
    return out


def frobenius_from_character(values: Mapping[Partition, int], n: int) -> SymPoly:
    """
    Σ_λ ψ(λ)/z_λ p_λ for a class function ψ of S_n.

    Raises:
        ValueError: if a conjugacy class value is missing
        InvariantViolation: if the result has non-integral coefficients
    """
    out = SymPoly.zero(n)
    for lam in partitions(n):
        if lam not in values:
            raise ValueError(f"Missing class value for {lam}")
        out = out + p(lam).scale(Fraction(values[lam], z(lam)))
    if any(c.denominator != 1 for c in out.coeffs.values()):
        raise InvariantViolation("Character does not come from a permutation action")
    return out


def shuffle_flag_closed_form(M: int, N: int) -> SymPoly:
    """Σ_k C(M,k) C(N,k) e_2^k e_1^(M+N-2k)."""
    out = SymPoly.zero(M + N)
    for k in range(min(M, N) + 1):
        out = out + (e(2) ** k * e(1) ** (M + N - 2 * k)).scale(comb(M, k) * comb(N, k))
    return out


def verify_recurrence(M: int, N: int, table: Optional[Mapping[tuple[int, int], SymPoly]] = None) -> bool:
    """
    Check F_ij = e_1 F_{i-1,j} + e_1 F_{i,j-1} - (e_2 + p_2) F_{i-1,j-1} and the
    truncated identity (Σ F_ij u^i v^j)((1 - u e_1)(1 - v e_1) - u v e_2) = 1
    for all i <= M, j <= N. A given table replaces the closed form; it is checked
    on its own keys, which must be closed under decreasing i or j.
    """
    if table is not None:
        F = dict(table)
    else:
        F = {(i, j): shuffle_flag_closed_form(i, j) for i in range(M + 1) for j in range(N + 1)}
    e1, e2, p2 = e(1), e(2), p(2)
    e1sq_minus_e2 = e1 * e1 - e2

    def get(i: int, j: int) -> SymPoly:
        return F[(i, j)] if i >= 0 and j >= 0 else SymPoly.zero()

    for (i, j), Fij in F.items():
        if i >= 1 and j >= 1:
            rhs = e1 * get(i - 1, j) + e1 * get(i, j - 1) - (e2 + p2) * get(i - 1, j - 1)
            if Fij != rhs:
                logger.warning(f"Recurrence fails at ({i},{j})")
                return False
        lhs = Fij - e1 * get(i - 1, j) - e1 * get(i, j - 1) + e1sq_minus_e2 * get(i - 1, j - 1)
        expected = SymPoly.one() if (i, j) == (0, 0) else SymPoly.zero(i + j)
        if lhs != expected:
            logger.warning(f"Generating identity fails at ({i},{j})")
            return False
    return True


def verify_mobius_flag_identity(P: RankedPoset) -> bool:
    """F_P(μ) = (-1)^n ω F_P(ζ)."""
    left = flag_qsym(P, IncidenceFunction.mobius(P))
    right = omega(flag_qsym(P)).scale((-1) ** P.n)
    return left == right
