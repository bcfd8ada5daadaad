"""
Shuffle Words Engine for SHUFFLE_POSETS
Letters, shuffle words, the cover relation of W_{M,N}, ranks and interval factorizations.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterable, Sequence

from core.errors import InvalidWordError, OrderViolationError
from core.poset import RankedPoset, build
from core.schemas import ShuffleContext

logger = logging.getLogger(__name__)


class Alphabet(IntEnum):
    """Lower letters a_i are deleted going up, upper letters x_j are inserted."""
    LOWER = 0
    UPPER = 1


_PREFIX = {Alphabet.LOWER: "a", Alphabet.UPPER: "x"}


@dataclass(frozen=True, order=True, slots=True)
class Letter:
    """
    A letter a_i or x_j.

    The natural ordering is alphabet-major, index-minor:
    a_1 < a_2 < ... < a_M < x_1 < ... < x_N.
    """

    alphabet: Alphabet
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise InvalidWordError(f"Letter index must be >= 1, got {self.index}")

    @property
    def is_lower(self) -> bool:
        return self.alphabet == Alphabet.LOWER

    @property
    def is_upper(self) -> bool:
        return self.alphabet == Alphabet.UPPER

    def __str__(self) -> str:
        return f"{_PREFIX[self.alphabet]}{self.index}"

    @classmethod
    def parse(cls, token: str) -> "Letter":
        """Parse a token such as 'a3' or 'x12'."""
        token = token.strip()
        if len(token) < 2 or token[0] not in "ax" or not token[1:].isdigit():
            raise InvalidWordError(f"Bad letter token: {token!r}")
        alphabet = Alphabet.LOWER if token[0] == "a" else Alphabet.UPPER
        return letter(alphabet, int(token[1:]))


@lru_cache(maxsize=None)
def letter(alphabet: Alphabet, index: int) -> Letter:
    """Interned letter constructor."""
    return Letter(alphabet, index)


def lower(i: int) -> Letter:
    return letter(Alphabet.LOWER, i)


def upper(j: int) -> Letter:
    return letter(Alphabet.UPPER, j)


@dataclass(frozen=True, slots=True)
class ShuffleWord:
    """Immutable sequence of distinct letters; rendered as 'x2 a1 a3 x3'."""

    letters: tuple[Letter, ...] = ()

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __contains__(self, item) -> bool:
        return item in self.letters

    def tokens(self) -> list[str]:
        return [str(c) for c in self.letters]

    def lower_letters(self) -> tuple[Letter, ...]:
        return tuple(c for c in self.letters if c.is_lower)

    def upper_letters(self) -> tuple[Letter, ...]:
        return tuple(c for c in self.letters if c.is_upper)

    @classmethod
    def parse(cls, text: str) -> "ShuffleWord":
        """Parse a space separated token list; the empty string is the empty word."""
        return cls(tuple(Letter.parse(t) for t in text.split()))

    @classmethod
    def of(cls, letters: Iterable[Letter]) -> "ShuffleWord":
        return cls(tuple(letters))


def parse_word(text: str) -> ShuffleWord:
    return ShuffleWord.parse(text)


def render(word: ShuffleWord) -> str:
    return str(word)


def is_valid_shuffle(seq: Sequence[Letter], ctx: ShuffleContext) -> bool:
    """True iff letters are distinct, each alphabet appears in increasing index order and indices fit ctx."""
    last = {Alphabet.LOWER: 0, Alphabet.UPPER: 0}
    bound = {Alphabet.LOWER: ctx.lower_size, Alphabet.UPPER: ctx.upper_size}
    for c in seq:
        if c.index <= last[c.alphabet] or c.index > bound[c.alphabet]:
            return False
        last[c.alphabet] = c.index
    return True


def validate_word(w: ShuffleWord, ctx: ShuffleContext) -> ShuffleWord:
    """Return w or raise InvalidWordError."""
    if not is_valid_shuffle(w.letters, ctx):
        raise InvalidWordError(f"'{w}' is not a shuffle word of W_{{{ctx.lower_size},{ctx.upper_size}}}")
    return w


def bottom(ctx: ShuffleContext) -> ShuffleWord:
    """0̂ = a_1 ... a_M."""
    return ShuffleWord(tuple(lower(i) for i in range(1, ctx.lower_size + 1)))


def top(ctx: ShuffleContext) -> ShuffleWord:
    """1̂ = x_1 ... x_N."""
    return ShuffleWord(tuple(upper(j) for j in range(1, ctx.upper_size + 1)))


def rank(w: ShuffleWord, ctx: ShuffleContext) -> int:
    """ρ(w) = (M - #lower letters) + #upper letters."""
    validate_word(w, ctx)
    n_lower = sum(1 for c in w.letters if c.is_lower)
    return (ctx.lower_size - n_lower) + (len(w.letters) - n_lower)


def insertion_positions(letters: Sequence[Letter], new: Letter) -> range:
    """
    Positions p at which `new` can be inserted into `letters` keeping
    the subsequence of new's alphabet increasing.
    """
    lo, hi = 0, len(letters)
    for p, c in enumerate(letters):
        if c.alphabet != new.alphabet:
            continue
        if c.index < new.index:
            lo = p + 1
        elif c.index > new.index:
            hi = p
            break
    return range(lo, hi + 1)


def upper_covers(w: ShuffleWord, ctx: ShuffleContext) -> frozenset[ShuffleWord]:
    """All w' covering w: delete one lower letter, or insert one unused upper letter."""
    letters = w.letters
    out = set()
    for p, c in enumerate(letters):
        if c.is_lower:
            out.add(ShuffleWord(letters[:p] + letters[p + 1:]))
    present = {c.index for c in letters if c.is_upper}
    for t in range(1, ctx.upper_size + 1):
        if t in present:
            continue
        x = upper(t)
        for p in insertion_positions(letters, x):
            out.add(ShuffleWord(letters[:p] + (x,) + letters[p:]))
    return frozenset(out)


def lower_covers(w: ShuffleWord, ctx: ShuffleContext) -> frozenset[ShuffleWord]:
    """All w' covered by w: delete one upper letter, or insert one missing lower letter."""
    letters = w.letters
    out = set()
    for p, c in enumerate(letters):
        if c.is_upper:
            out.add(ShuffleWord(letters[:p] + letters[p + 1:]))
    present = {c.index for c in letters if c.is_lower}
    for i in range(1, ctx.lower_size + 1):
        if i in present:
            continue
        a = lower(i)
        for p in insertion_positions(letters, a):
            out.add(ShuffleWord(letters[:p] + (a,) + letters[p:]))
    return frozenset(out)


def is_below(u: ShuffleWord, v: ShuffleWord) -> bool:
    """
    u <= v iff the common letters appear in the same relative order in both words,
    letters only in u are lower and letters only in v are upper.
    """
    in_u, in_v = set(u.letters), set(v.letters)
    if any(c.is_upper for c in in_u - in_v) or any(c.is_lower for c in in_v - in_u):
        return False
    common_u = [c for c in u.letters if c in in_v]
    common_v = [c for c in v.letters if c in in_u]
    return common_u == common_v


@dataclass(frozen=True)
class IntervalFactorization:
    """
    Factor dimensions (i, j) of [u, v] ≅ ∏ W_{i,j}, one per gap between common letters.

    `factors` keeps (0, 0) entries in word order; `canonical` drops them.
    """

    factors: tuple[tuple[int, int], ...]

    @property
    def canonical(self) -> tuple[tuple[int, int], ...]:
        return tuple(sorted(f for f in self.factors if f != (0, 0)))

    def counts(self) -> Counter:
        """Multiplicity of every factor, zeros included."""
        return Counter(self.factors)

    def __len__(self) -> int:
        return len(self.factors)


def interval_decomposition(u: ShuffleWord, v: ShuffleWord, ctx: ShuffleContext) -> IntervalFactorization:
    """
    Factor [u, v] along the letters common to u and v.

    Args:
        u: lower end
        v: upper end
        ctx: alphabet sizes

    Returns:
        IntervalFactorization with #common + 1 factors

    Raises:
        OrderViolationError: if u is not below v
    """
    validate_word(u, ctx)
    validate_word(v, ctx)
    if not is_below(u, v):
        raise OrderViolationError(f"'{u}' is not below '{v}'")

    pos_v = {c: q for q, c in enumerate(v.letters, start=1)}
    factors = []
    prev_i = prev_j = 0
    for p, c in enumerate(u.letters, start=1):
        q = pos_v.get(c)
        if q is None:
            continue
        factors.append((p - prev_i - 1, q - prev_j - 1))
        prev_i, prev_j = p, q
    factors.append((len(u.letters) + 1 - prev_i - 1, len(v.letters) + 1 - prev_j - 1))
    return IntervalFactorization(tuple(factors))


def shuffle_poset(ctx: ShuffleContext) -> RankedPoset:
    """Build W_{M,N} from 0̂ by closing the cover relation."""
    poset = build(
        lambda w: upper_covers(w, ctx),
        bottom(ctx),
        key=str,
        name=f"W_{ctx.lower_size},{ctx.upper_size}",
        metadata={"context": ctx},
    )
    logger.info(f"Built W_{ctx.lower_size},{ctx.upper_size}: {len(poset)} elements, rank {poset.n}")
    return poset


def element_count_formula(M: int, N: int) -> int:
    """|W_{M,N}| = Σ_k C(M,k) C(N,k) 2^(M+N-2k)."""
    return sum(comb(M, k) * comb(N, k) * 2 ** (M + N - 2 * k) for k in range(min(M, N) + 1))


def chain_count_formula(M: int, N: int) -> int:
    """Number of maximal chains, (M+N)! Σ_k C(M,k) C(N,k) / 2^k."""
    total = sum(Fraction(comb(M, k) * comb(N, k), 2 ** k) for k in range(min(M, N) + 1))
    return int(total * factorial(M + N))


def mobius_formula(M: int, N: int) -> int:
    """μ(0̂, 1̂) = (-1)^(M+N) C(M+N, M)."""
    return (-1) ** (M + N) * comb(M + N, M)
