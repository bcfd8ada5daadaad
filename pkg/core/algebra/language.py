"""
Alternating Word Engine for SHUFFLE_POSETS
The language of words over {a_1, a_2, ..., b_1, b_2, ...} with no a_k immediately
followed by b_l, l >= k, and its bijection onto refined multichains of W_{m,n}.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np
import sympy
from sympy.utilities.iterables import multiset_permutations

from core.errors import InvalidWordError
from core.poset import RankedPoset
from core.schemas import ShuffleContext
from core.shuffles.words import ShuffleWord, lower, shuffle_poset, upper

logger = logging.getLogger(__name__)

StepKey = tuple[tuple[int, int], ...]


@dataclass(frozen=True, order=True)
class AlternatingLetter:
    """a_k (kind 'a') marks a deletion at step k, b_k (kind 'b') an insertion."""

    kind: str
    index: int

    def __post_init__(self):
        if self.kind not in ("a", "b") or self.index < 1:
            raise InvalidWordError(f"Bad alternating letter {self.kind}{self.index}")

    def __str__(self) -> str:
        return f"{self.kind}{self.index}"

    @classmethod
    def parse(cls, token: str) -> "AlternatingLetter":
        token = token.strip()
        if len(token) < 2 or token[0] not in "ab" or not token[1:].isdigit():
            raise InvalidWordError(f"Bad alternating letter token: {token!r}")
        return cls(token[0], int(token[1:]))


AlternatingWord = tuple[AlternatingLetter, ...]


def parse_alternating(text: str) -> AlternatingWord:
    return tuple(AlternatingLetter.parse(t) for t in text.split())


def render_alternating(w: Sequence[AlternatingLetter]) -> str:
    return " ".join(str(c) for c in w)


def is_l_word(w: Sequence[AlternatingLetter]) -> bool:
    """No a_k immediately followed by b_l with k <= l."""
    return not any(
        c.kind == "a" and d.kind == "b" and c.index <= d.index for c, d in zip(w, w[1:])
    )


def l_words(multiset: Mapping[AlternatingLetter, int]) -> list[AlternatingWord]:
    """All words of the language using exactly the given letters, in lexicographic order."""
    letters = sorted(c for c, k in multiset.items() if k)
    pool = [i for i, c in enumerate(letters) for _ in range(multiset[c])]
    words = (tuple(letters[i] for i in p) for p in multiset_permutations(pool))
    return [w for w in words if is_l_word(w)]


def count_l(multiset: Mapping[AlternatingLetter, int]) -> int:
    return len(l_words(multiset))


def shuffle_word_of(w: Sequence[AlternatingLetter]) -> ShuffleWord:
    """Put a_1, a_2, ... at the a-positions of w and x_1, x_2, ... at the b-positions."""
    counts = {"a": 0, "b": 0}
    letters = []
    for c in w:
        counts[c.kind] += 1
        letters.append(lower(counts["a"]) if c.kind == "a" else upper(counts["b"]))
    return ShuffleWord(tuple(letters))


def multichain_of_word(w: Sequence[AlternatingLetter], k: Optional[int] = None) -> tuple[ShuffleWord, ...]:
    """
    Multichain t_0 <= t_1 <= ... <= t_k of W_{m,n} encoded by any alternating word.

    t_0 is the a-part of s(w); step r removes the positions holding a_r and
    adds the positions holding b_r. Every t_r is a subword of s(w).

    Args:
        w: alternating word
        k: number of steps, defaults to the largest index in w

    Raises:
        ValueError: if w uses an index above k
    """
    top_index = max((c.index for c in w), default=0)
    k = top_index if k is None else k
    if top_index > k:
        raise ValueError(f"Index {top_index} exceeds the number of steps {k}")

    s = shuffle_word_of(w).letters
    present = {p for p, c in enumerate(w) if c.kind == "a"}
    chain = [ShuffleWord(tuple(s[p] for p in sorted(present)))]
    for r in range(1, k + 1):
        present -= {p for p, c in enumerate(w) if c == AlternatingLetter("a", r)}
        present |= {p for p, c in enumerate(w) if c == AlternatingLetter("b", r)}
        chain.append(ShuffleWord(tuple(s[p] for p in sorted(present))))
    return tuple(chain)


def l_word_to_multichain(w: Sequence[AlternatingLetter], k: Optional[int] = None) -> tuple[ShuffleWord, ...]:
    """
    multichain_of_word restricted to the language, where it is injective.

    Raises:
        ValueError: if w is not in the language or uses an index above k
    """
    if not is_l_word(w):
        raise ValueError(f"'{render_alternating(w)}' has an a_k immediately followed by b_l with k <= l")
    return multichain_of_word(w, k)


def step_key(chain: Sequence[ShuffleWord]) -> StepKey:
    """Per step (#lower letters removed, #upper letters inserted)."""
    return tuple(
        (len(set(u.lower_letters()) - set(v.lower_letters())), len(set(v.upper_letters()) - set(u.upper_letters())))
        for u, v in zip(chain, chain[1:])
    )


def multiset_of_key(key: StepKey) -> dict[AlternatingLetter, int]:
    out = {}
    for r, (i, j) in enumerate(key, start=1):
        if i:
            out[AlternatingLetter("a", r)] = i
        if j:
            out[AlternatingLetter("b", r)] = j
    return out


def _weak_compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _weak_compositions(total - first, parts - 1):
            yield (first,) + rest


def step_keys(m: int, n: int, k: int) -> Iterator[StepKey]:
    """All refinements of (m, n) into k steps."""
    for lows, ups in product(_weak_compositions(m, k), _weak_compositions(n, k)):
        yield tuple(zip(lows, ups))


def multichains(poset: RankedPoset, k: int) -> Iterator[tuple[int, ...]]:
    """Element ids 0̂ = t_0 <= ... <= t_k = 1̂, in lexicographic order."""
    reach = poset.reachability
    if k == 0:
        if poset.bottom == poset.top:
            yield (poset.bottom,)
        return

    def extend(prefix: list[int]):
        if len(prefix) == k:
            if reach[prefix[-1], poset.top]:
                yield tuple(prefix) + (poset.top,)
            return
        for v in np.flatnonzero(reach[prefix[-1]] & reach[:, poset.top]):
            prefix.append(int(v))
            yield from extend(prefix)
            prefix.pop()

    yield from extend([poset.bottom])


def refined_multichain_census(m: int, n: int, k: int) -> Counter:
    """Multichains of W_{m,n} with k steps counted by step key."""
    poset = shuffle_poset(ShuffleContext(lower_size=m, upper_size=n))
    return Counter(step_key([poset.elements[t] for t in c]) for c in multichains(poset, k))


def l_word_census(m: int, n: int, k: int) -> Counter:
    """Words of the language with m a's and n b's of index <= k, counted by step key."""
    census = Counter()
    for key in step_keys(m, n, k):
        c = count_l(multiset_of_key(key))
        if c:
            census[key] = c
    return census


@dataclass
class BijectionReport:
    m: int
    n: int
    k: int
    words: int
    multichains: int
    collisions: list
    outside: list
    missed: int

    @property
    def ok(self) -> bool:
        return not self.collisions and not self.outside and self.missed == 0 and self.words == self.multichains

    def to_dict(self) -> dict:
        return {
            "m": self.m, "n": self.n, "k": self.k,
            "words": self.words, "multichains": self.multichains,
            "collisions": self.collisions, "outside": self.outside,
            "missed": self.missed, "ok": self.ok,
        }


def verify_l_bijection(m: int, n: int, k: int) -> BijectionReport:
    """Check that t(.) maps the language words onto the k-step multichains of W_{m,n} bijectively."""
    poset = shuffle_poset(ShuffleContext(lower_size=m, upper_size=n))
    targets = {tuple(poset.elements[t] for t in c) for c in multichains(poset, k)}
    images: dict[tuple[ShuffleWord, ...], AlternatingWord] = {}
    collisions, outside = [], []
    n_words = 0
    for key in step_keys(m, n, k):
        for w in l_words(multiset_of_key(key)):
            n_words += 1
            chain = l_word_to_multichain(w, k)
            if chain not in targets:
                outside.append(render_alternating(w))
            elif chain in images:
                collisions.append((render_alternating(images[chain]), render_alternating(w)))
            else:
                images[chain] = w
    report = BijectionReport(
        m=m, n=n, k=k, words=n_words, multichains=len(targets),
        collisions=collisions, outside=outside, missed=len(targets) - len(images),
    )
    logger.debug(f"Language bijection W_{m},{n} k={k}: {report.to_dict()}")
    return report


def product_rhs_coefficient(multiset: Mapping[AlternatingLetter, int]) -> int:
    """
    Coefficient of ∏ a_r^i_r b_r^j_r x^m y^n in
    1/(1 - (Σa_r)x - (Σb_r)y + (Σ_r (a_1+...+a_r) b_r) xy) with indeterminate a_r, b_r.
    """
    if not multiset:
        return 1
    k = max(c.index for c in multiset)
    a = sympy.symbols(f"a1:{k + 1}")
    b = sympy.symbols(f"b1:{k + 1}")
    # x and y are determined by the a- and b-degrees, so they are set to 1
    partial = [sum(a[: r + 1]) for r in range(k)]
    u = sum(a) + sum(b) - sum(p * br for p, br in zip(partial, b))
    m = sum(v for c, v in multiset.items() if c.kind == "a")
    n = sum(v for c, v in multiset.items() if c.kind == "b")
    exponents = [multiset.get(AlternatingLetter("a", r), 0) for r in range(1, k + 1)]
    exponents += [multiset.get(AlternatingLetter("b", r), 0) for r in range(1, k + 1)]
    gens = a + b
    monomial = sympy.Mul(*(g ** e for g, e in zip(gens, exponents)))
    total = sympy.Integer(0)
    for d in range(max(m, n), m + n + 1):
        total += sympy.Poly(sympy.expand(u ** d), *gens).coeff_monomial(monomial)
    return int(total)
