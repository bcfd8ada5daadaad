"""
Chain Labeling Engine for SHUFFLE_POSETS
Labels of maximal chains of W_{M,N} by letters, decoding of label sequences,
increasing chains γ(u, v), adjacent swaps and generic labeling verifiers.
"""
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Hashable, Iterator, Optional, Sequence

from core.errors import DecodeError, InvariantViolation, OrderViolationError
from core.poset import RankedPoset
from core.schemas import ShuffleContext
from core.shuffles.words import (
    Letter,
    ShuffleWord,
    bottom,
    insertion_positions,
    is_below,
    is_valid_shuffle,
    lower,
    top,
    upper,
)

logger = logging.getLogger(__name__)

Chain = tuple[int, ...]


class CoverType(str, Enum):
    """Kind of cover: insertion (x), deletion right after an unconsumed x (xa), other deletion (a)."""
    X = "x"
    XA = "xa"
    A = "a"


@dataclass(frozen=True)
class LabelSequence:
    """Letter labels of a chain with the cover type of every step."""

    labels: tuple[Letter, ...]
    cover_types: tuple[CoverType, ...]

    def __len__(self) -> int:
        return len(self.labels)

    def __str__(self) -> str:
        return " ".join(str(c) for c in self.labels)

    def tokens(self) -> list[str]:
        return [str(c) for c in self.labels]


@dataclass(frozen=True)
class CoverMove:
    """How v is obtained from u: the inserted or deleted letter, and the letter preceding a deletion."""

    inserted: bool
    letter: Letter
    predecessor: Optional[Letter] = None


def cover_move(u: ShuffleWord, v: ShuffleWord) -> CoverMove:
    """
    Describe the cover u ⋖ v.

    Raises:
        ValueError: if v does not cover u
    """
    a, b = u.letters, v.letters
    if len(b) == len(a) + 1:
        p = next((k for k in range(len(a)) if a[k] != b[k]), len(a))
        c = b[p]
        if c.is_upper and a == b[:p] + b[p + 1:]:
            return CoverMove(True, c)
    elif len(b) == len(a) - 1:
        p = next((k for k in range(len(b)) if a[k] != b[k]), len(b))
        c = a[p]
        if c.is_lower and b == a[:p] + a[p + 1:]:
            pred = a[p - 1] if p > 0 and a[p - 1].is_upper else None
            return CoverMove(False, c, pred)
    raise ValueError(f"'{v}' does not cover '{u}'")


def label_step(move: CoverMove, consumed: frozenset) -> tuple[Letter, CoverType, frozenset]:
    """Label of one cover given the x-indices already consumed by earlier (xa) covers."""
    if move.inserted:
        return move.letter, CoverType.X, consumed
    pred = move.predecessor
    if pred is not None and pred.index not in consumed:
        return pred, CoverType.XA, consumed | {pred.index}
    return move.letter, CoverType.A, consumed


def label_path(words: Sequence[ShuffleWord], consumed: frozenset = frozenset()) -> tuple[LabelSequence, frozenset]:
    """Label a saturated chain of words starting from a given consumed state."""
    labels, types = [], []
    for u, v in zip(words, words[1:]):
        c, kind, consumed = label_step(cover_move(u, v), consumed)
        labels.append(c)
        types.append(kind)
    return LabelSequence(tuple(labels), tuple(types)), consumed


def label_words(words: Sequence[ShuffleWord], ctx: ShuffleContext) -> LabelSequence:
    """Label a maximal chain given as words."""
    if not words or words[0] != bottom(ctx) or words[-1] != top(ctx) or len(words) != ctx.total_rank + 1:
        raise ValueError("Not a maximal chain of the poset of shuffles")
    return label_path(words)[0]


def check_label_multiset(sigma: Sequence[Letter], ctx: ShuffleContext) -> dict[int, int]:
    """
    Validate that sigma is a permutation of A ∪ 2X ∪ (𝒳 - X) with |A| + |X| = M.

    Returns:
        Pairing x-index -> a-index of the doubled letters (r-th smallest with r-th smallest)

    Raises:
        DecodeError: if the multiset has the wrong shape
    """
    M, N = ctx.lower_size, ctx.upper_size
    counts = Counter(sigma)
    lowers = {c.index for c in counts if c.is_lower}
    for c, k in counts.items():
        if c.is_lower and (k > 1 or c.index > M):
            raise DecodeError(f"Lower letter {c} repeated or out of range")
        if c.is_upper and (k > 2 or c.index > N):
            raise DecodeError(f"Upper letter {c} repeated more than twice or out of range")
    if any(counts[upper(t)] == 0 for t in range(1, N + 1)):
        raise DecodeError("Every upper letter must appear in the label sequence")
    doubled = sorted(c.index for c, k in counts.items() if c.is_upper and k == 2)
    if len(lowers) + len(doubled) != M:
        raise DecodeError(f"Expected |A| + |X| = {M}, got {len(lowers)} + {len(doubled)}")
    missing = [i for i in range(1, M + 1) if i not in lowers]
    return dict(zip(doubled, missing))


def decode_label(sigma: Sequence[Letter], ctx: ShuffleContext) -> tuple[ShuffleWord, ...]:
    """
    Rebuild the unique maximal chain whose label sequence is sigma.

    Doubled letters x_j are paired with the missing lower letters a_i in index order.
    The first x_j inserts just before a_i and the second deletes a_i. A single x_t
    goes to the rightmost allowed place left of the pair of the next doubled
    letter x_s (s > t), or rightmost overall. Lower letters in sigma are deleted.

    Raises:
        DecodeError: if sigma is not the label sequence of a maximal chain
    """
    pair = check_label_multiset(sigma, ctx)
    doubled = sorted(pair)
    word = list(bottom(ctx).letters)
    words = [ShuffleWord(tuple(word))]
    seen: set[int] = set()

    def position(c: Letter) -> int:
        try:
            return word.index(c)
        except ValueError as e:
            raise DecodeError(f"{c} is not present when needed") from e

    for c in sigma:
        if c.is_lower:
            del word[position(c)]
        elif c.index in pair:
            a = lower(pair[c.index])
            if c.index not in seen:
                seen.add(c.index)
                word.insert(position(a), c)
            else:
                del word[position(a)]
        else:
            slots = insertion_positions(word, c)
            nxt = next((s for s in doubled if s > c.index), None)
            if nxt is None:
                p = slots[-1]
            else:
                x_next = upper(nxt)
                limit = position(x_next) if x_next in word else position(lower(pair[nxt]))
                allowed = [p for p in slots if p <= limit]
                if not allowed:
                    raise DecodeError(f"No place to insert {c}")
                p = allowed[-1]
            word.insert(p, c)
        if not is_valid_shuffle(word, ctx):
            raise DecodeError(f"Decoding produced a non-shuffle word {' '.join(map(str, word))}")
        words.append(ShuffleWord(tuple(word)))

    relabeled = label_path(words)[0].labels
    if relabeled != tuple(sigma):
        raise DecodeError(f"Label sequence {' '.join(map(str, sigma))} is not realized by any chain")
    return tuple(words)


def gamma_words(
    u: ShuffleWord, v: ShuffleWord, ctx: ShuffleContext, consumed: frozenset = frozenset()
) -> tuple[ShuffleWord, ...]:
    """
    The saturated u-v chain with strictly increasing labels.

    First the lower letters of u missing from v are deleted in increasing order,
    except those sitting right after an unconsumed x_j; then, by increasing
    x-index, each new x_t is inserted right after its predecessor in v and
    each held-back a after x_j is deleted at step j.

    Raises:
        OrderViolationError: if u is not below v
    """
    if not is_below(u, v):
        raise OrderViolationError(f"'{u}' is not below '{v}'")
    in_v = set(v.letters)
    word = list(u.letters)
    held: dict[int, Letter] = {}
    for p in range(1, len(word)):
        c, prev = word[p], word[p - 1]
        if c.is_lower and c not in in_v and prev.is_upper and prev.index not in consumed:
            held[prev.index] = c
    held_letters = set(held.values())

    words = [ShuffleWord(tuple(word))]
    for c in sorted(c for c in u.letters if c.is_lower and c not in in_v and c not in held_letters):
        word.remove(c)
        words.append(ShuffleWord(tuple(word)))

    present = set(u.letters)
    events = sorted({c.index for c in v.letters if c.is_upper and c not in present} | set(held))
    for t in events:
        if t in held:
            word.remove(held[t])
        else:
            x = upper(t)
            q = v.letters.index(x)
            p = word.index(v.letters[q - 1]) + 1 if q > 0 else 0
            word.insert(p, x)
        words.append(ShuffleWord(tuple(word)))

    if words[-1] != v:
        raise InvariantViolation(f"Increasing chain from '{u}' ended at '{words[-1]}' instead of '{v}'")
    return tuple(words)


# ---- labelings over arbitrary posets -------------------------------------


class ChainLabeling:
    """
    Labels of maximal chains, computed cover by cover from a state that
    depends only on the chain below the cover.
    """

    def __init__(self, poset: RankedPoset):
        self.poset = poset

    def initial_state(self) -> Hashable:
        return None

    def step(self, state: Hashable, prefix: Chain, v: int) -> tuple[Any, Hashable]:
        """Label of the cover prefix[-1] ⋖ v and the state after it."""
        raise NotImplementedError

    def prefix_labels(self, prefix: Sequence[int]) -> tuple:
        state = self.initial_state()
        out = []
        for r in range(1, len(prefix)):
            label, state = self.step(state, tuple(prefix[:r]), prefix[r])
            out.append(label)
        return tuple(out)

    def labels(self, chain: Sequence[int]) -> tuple:
        if not self.poset.is_maximal_chain(chain):
            raise ValueError(f"{tuple(chain)} is not a maximal chain")
        return self.prefix_labels(chain)

    def enumerate_labeled_chains(self) -> Iterator[tuple[Chain, tuple]]:
        """All maximal chains with their labels, depth first."""
        P = self.poset
        stack = [((P.bottom,), (), self.initial_state())]
        while stack:
            chain, labels, state = stack.pop()
            ups = P.covers_up[chain[-1]]
            if not ups:
                yield chain, labels
                continue
            for v in reversed(ups):
                label, nxt = self.step(state, chain, v)
                stack.append((chain + (v,), labels + (label,), nxt))


class CoordinateLabeling(ChainLabeling):
    """Products of chains: the cover raising coordinate i gets label i+1."""

    def step(self, state, prefix, v):
        u = self.poset.elements[prefix[-1]]
        w = self.poset.elements[v]
        coordinate = next(i for i in range(len(u)) if u[i] != w[i])
        return coordinate + 1, state


class TableLabeling(ChainLabeling):
    """
    Explicit labels for every maximal chain. A prefix takes its labels from the
    first maximal chain (in id order) extending it.
    """

    def __init__(self, poset: RankedPoset, table: dict[Chain, tuple]):
        super().__init__(poset)
        self.table = {tuple(c): tuple(lab) for c, lab in table.items()}
        self._by_prefix: dict[Chain, tuple] = {}
        for chain in sorted(self.table):
            for r in range(1, len(chain) + 1):
                self._by_prefix.setdefault(chain[:r], self.table[chain])

    def initial_state(self):
        return ()

    def step(self, state, prefix, v):
        extended = tuple(prefix) + (v,)
        try:
            return self._by_prefix[extended][len(prefix) - 1], extended
        except KeyError as e:
            raise ValueError(f"No labeled chain extends {extended}") from e

    def labels(self, chain):
        return self.table[tuple(chain)]

    def enumerate_labeled_chains(self):
        for chain in sorted(self.table):
            yield chain, self.table[chain]


class ShuffleLabeling(ChainLabeling):
    """
    Letter labeling of W_{M,N}. The state is the set of x-indices already
    consumed by an (xa) cover.
    """

    def __init__(self, poset: RankedPoset):
        super().__init__(poset)
        ctx = poset.metadata.get("context")
        if not isinstance(ctx, ShuffleContext):
            raise ValueError("ShuffleLabeling needs a poset built by shuffle_poset")
        self.ctx = ctx
        self._moves: list[dict[int, CoverMove]] = [
            {v: cover_move(poset.elements[u], poset.elements[v]) for v in ups}
            for u, ups in enumerate(poset.covers_up)
        ]

    def initial_state(self):
        return frozenset()

    def step(self, state, prefix, v):
        label, _, state = label_step(self._moves[prefix[-1]][v], state)
        return label, state

    def words(self, chain: Sequence[int]) -> tuple[ShuffleWord, ...]:
        return tuple(self.poset.elements[i] for i in chain)

    def label_chain(self, chain: Sequence[int]) -> LabelSequence:
        """Labels and cover types of a maximal chain."""
        if not self.poset.is_maximal_chain(chain):
            raise ValueError(f"{tuple(chain)} is not a maximal chain")
        return label_path(self.words(chain))[0]

    def decode(self, sigma: Sequence[Letter]) -> Chain:
        return tuple(self.poset.index[w] for w in decode_label(sigma, self.ctx))

    def consumed_after(self, prefix: Sequence[int]) -> frozenset:
        return label_path(self.words(prefix))[1]

    def gamma(self, u: int, v: int, consumed: Optional[frozenset] = None) -> Chain:
        """
        Increasing chain from u to v. Without an explicit consumed state the
        state after γ(0̂, u) is used.
        """
        P = self.poset
        if consumed is None:
            consumed = self.consumed_after(self._gamma_ids(P.bottom, u, frozenset()))
        return self._gamma_ids(u, v, consumed)

    def _gamma_ids(self, u: int, v: int, consumed: frozenset) -> Chain:
        words = gamma_words(self.poset.elements[u], self.poset.elements[v], self.ctx, consumed)
        return tuple(self.poset.index[w] for w in words)

    def swap_adjacent(self, chain: Sequence[int], i: int) -> Chain:
        """
        The chain whose labels are those of `chain` with positions i, i+1 swapped.

        Raises:
            ValueError: if i is outside 1..n-1
            InvariantViolation: if the swapped chain differs from `chain` elsewhere than at rank i
        """
        n = self.poset.n
        if not 1 <= i <= n - 1:
            raise ValueError(f"Swap position {i} outside 1..{n - 1}")
        labels = list(self.labels(chain))
        if labels[i - 1] == labels[i]:
            return tuple(chain)
        labels[i - 1], labels[i] = labels[i], labels[i - 1]
        try:
            other = self.decode(labels)
        except DecodeError as e:
            raise InvariantViolation(f"Swapped labels at {i} do not decode: {e}") from e
        if any(other[r] != chain[r] for r in range(n + 1) if r != i) or other[i] == chain[i]:
            raise InvariantViolation(f"Swap at {i} changed the chain outside rank {i}")
        return other

    def cl_augmented_label(self, chain: Sequence[int]) -> tuple[tuple[Letter, int], ...]:
        """Pairs (label, n - ρ(u)) for every cover u ⋖ v of the chain."""
        n = self.poset.n
        return tuple((c, n - r) for r, c in enumerate(self.labels(chain)))

    def rank_symmetry_bijection(self, u: int, v: int, i: int) -> dict[int, int]:
        """
        Map the elements of rank ρ(u)+i in [u, v] to those of rank ρ(v)-i by
        exchanging the label blocks of γ(u,t) and γ(t,v) inside the chain
        γ(0̂,u) γ(u,t) γ(t,v) γ(v,1̂) and decoding.

        Raises:
            OrderViolationError: if u is not below v
            ValueError: if i is out of range
            InvariantViolation: if the map is not a bijection
        """
        P = self.poset
        ru, rv = int(P.rank[u]), int(P.rank[v])
        if not P.leq(u, v):
            raise OrderViolationError(f"'{P.elements[u]}' is not below '{P.elements[v]}'")
        if not 0 <= i <= rv - ru:
            raise ValueError(f"Offset {i} outside 0..{rv - ru}")
        rt = ru + i
        source = [t for t in P.interval(u, v) if P.rank[t] == rt]
        mapping: dict[int, int] = {}
        for t in source:
            pieces = [P.bottom]
            consumed = frozenset()
            for a, b in ((P.bottom, u), (u, t), (t, v), (v, P.top)):
                segment = self._gamma_ids(a, b, consumed)
                consumed = label_path(self.words(segment), consumed)[1]
                pieces.extend(segment[1:])
            labels = self.labels(tuple(pieces))
            reordered = labels[:ru] + labels[rt:rv] + labels[ru:rt] + labels[rv:]
            image = self.decode(reordered)
            if image[ru] != u or image[rv] != v:
                raise InvariantViolation(f"Reordered chain through {t} leaves the interval")
            mapping[t] = image[rv - i]
        if len(set(mapping.values())) != len(mapping):
            raise InvariantViolation(f"Rank bijection on [{u}, {v}] at offset {i} is not injective")
        return mapping

    def label_multiset_census(self) -> Counter:
        """Sorted label multiset -> number of maximal chains carrying it."""
        return Counter(tuple(sorted(labels)) for _, labels in self.enumerate_labeled_chains())


# ---- verifiers --------------------------------------------------------------


@dataclass
class LabelingCheck:
    """Outcome of a labeling verifier; falsy with a witness when the property fails."""

    property: str
    ok: bool
    witness: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"property": self.property, "ok": self.ok, "witness": self.witness}


@dataclass
class LabelingKind:
    """Properties established for a labeling of a poset. E implies C."""

    c: bool = False
    e: bool = False
    r: bool = False
    r_star: bool = False
    s: bool = False

    @classmethod
    def establish(cls, poset: RankedPoset, labeling: ChainLabeling) -> "LabelingKind":
        kind = cls(
            c=bool(verify_c(poset, labeling)),
            e=bool(verify_e(poset, labeling)),
            r=bool(verify_r(poset, labeling)),
            r_star=bool(verify_r_star(poset, labeling)),
            s=bool(verify_s(poset, labeling)),
        )
        logger.info(f"Labeling of {poset.name or 'P'}: {kind}")
        return kind


def verify_c(P: RankedPoset, labeling: ChainLabeling) -> LabelingCheck:
    """Each label depends only on the chain up to and including that cover."""
    seen: dict[Chain, Any] = {}
    for chain, labels in labeling.enumerate_labeled_chains():
        for r, label in enumerate(labels):
            key = chain[: r + 2]
            if seen.setdefault(key, label) != label:
                return LabelingCheck("C", False, {"prefix": list(key), "labels": [seen[key], label]})
    return LabelingCheck("C", True)


def verify_e(P: RankedPoset, labeling: ChainLabeling) -> LabelingCheck:
    """Each label depends only on the cover."""
    seen: dict[tuple[int, int], Any] = {}
    for chain, labels in labeling.enumerate_labeled_chains():
        for (u, v), label in zip(zip(chain, chain[1:]), labels):
            if seen.setdefault((u, v), label) != label:
                return LabelingCheck("E", False, {"cover": [u, v], "labels": [seen[(u, v)], label]})
    return LabelingCheck("E", True)


def _increasing_completions(P: RankedPoset, labeling: ChainLabeling, prefix: Chain, state, strict: bool) -> Counter:
    """Number of increasing saturated chains from prefix[-1] to every element above it."""
    counts: Counter = Counter()
    stack = [(prefix, state, None)]
    while stack:
        chain, st, last = stack.pop()
        for v in P.covers_up[chain[-1]]:
            label, nxt = labeling.step(st, chain, v)
            if last is not None and (label <= last if strict else label < last):
                continue
            counts[v] += 1
            stack.append((chain + (v,), nxt, label))
    return counts


def verify_r(P: RankedPoset, labeling: ChainLabeling, strict: bool = False) -> LabelingCheck:
    """
    For every saturated chain 0̂ ⋖ ... ⋖ w and every u > w there is exactly one
    weakly (strictly if `strict`) increasing completion from w to u.
    """
    name = "R*" if strict else "R"
    R = P.reachability
    done: set = set()
    stack = [((P.bottom,), labeling.initial_state())]
    while stack:
        prefix, state = stack.pop()
        w = prefix[-1]
        key = (w, state)
        if key not in done:
            done.add(key)
            counts = _increasing_completions(P, labeling, prefix, state, strict)
            for u in map(int, R[w].nonzero()[0]):
                if u != w and counts[u] != 1:
                    return LabelingCheck(
                        name, False, {"prefix": list(prefix), "target": u, "completions": counts[u]}
                    )
        for v in P.covers_up[w]:
            stack.append((prefix + (v,), labeling.step(state, prefix, v)[1]))
    return LabelingCheck(name, True)


def verify_r_star(P: RankedPoset, labeling: ChainLabeling) -> LabelingCheck:
    return verify_r(P, labeling, strict=True)


def verify_s(P: RankedPoset, labeling: ChainLabeling) -> LabelingCheck:
    """
    Labels are injective on maximal chains, and wherever two adjacent labels
    differ exactly one chain differs only at that rank and carries the
    swapped labels.
    """
    chains: list[Chain] = []
    owner: dict[tuple, int] = {}
    for chain, labels in labeling.enumerate_labeled_chains():
        if labels in owner:
            return LabelingCheck("S", False, {"chains": [list(chains[owner[labels]]), list(chain)], "labels": list(labels)})
        owner[labels] = len(chains)
        chains.append(chain)
    by_label = {idx: labels for labels, idx in owner.items()}

    neighbours: dict[tuple, list[int]] = defaultdict(list)
    for idx, chain in enumerate(chains):
        for i in range(1, P.n):
            neighbours[(i, chain[:i], chain[i + 1:])].append(idx)

    for idx, chain in enumerate(chains):
        labels = by_label[idx]
        for i in range(1, P.n):
            if labels[i - 1] == labels[i]:
                continue
            swapped = labels[: i - 1] + (labels[i], labels[i - 1]) + labels[i + 1:]
            hits = [j for j in neighbours[(i, chain[:i], chain[i + 1:])] if by_label[j] == swapped]
            if len(hits) != 1:
                return LabelingCheck("S", False, {"chain": list(chain), "rank": i, "matches": len(hits)})
    return LabelingCheck("S", True)


def decreasing_chain_count(P: RankedPoset, labeling: ChainLabeling) -> int:
    """Number of maximal chains with weakly decreasing labels."""
    return sum(
        1 for _, labels in labeling.enumerate_labeled_chains()
        if all(a >= b for a, b in zip(labels, labels[1:]))
    )
