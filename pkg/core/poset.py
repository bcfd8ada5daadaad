"""
Poset Engine for SHUFFLE_POSETS
Finite graded posets with 0̂ and 1̂: flag f/h-vectors, Möbius function,
incidence-algebra convolution, products of chains and isomorphism tests.
"""
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Any, Callable, Hashable, Iterable, Iterator, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd
from networkx.algorithms.isomorphism import DiGraphMatcher

from core.errors import GradingError, OrderViolationError, SizeLimitExceeded

logger = logging.getLogger(__name__)

RankSet = frozenset[int]


@dataclass
class FlagVectors:
    """Flag f-vector α and flag h-vector β keyed by rank sets."""

    alpha: dict[RankSet, int] = field(default_factory=dict)
    beta: dict[RankSet, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha": {",".join(map(str, sorted(S))): v for S, v in self.alpha.items()},
            "beta": {",".join(map(str, sorted(S))): v for S, v in self.beta.items()},
        }


def all_rank_sets(n: int) -> list[RankSet]:
    """Subsets of {1..n-1} ordered by size, then lexicographically; rank 0 has only the empty set."""
    ranks = range(1, n)
    return [frozenset(c) for k in range(max(n, 1)) for c in combinations(ranks, k)]


class RankedPoset:
    """
    Finite graded poset with unique bottom (id 0) and top (id len-1).

    Element ids are assigned rank by rank, so ascending ids never decrease rank.
    Payloads are opaque; `index` maps them back to ids.
    """

    def __init__(
        self,
        elements: Sequence[Any],
        rank: Sequence[int],
        covers_up: Sequence[Sequence[int]],
        name: str = "",
        metadata: Optional[dict] = None,
    ):
        self.elements = tuple(elements)
        self.rank = np.asarray(rank, dtype=np.int64)
        self.covers_up = tuple(tuple(sorted(c)) for c in covers_up)
        down: list[list[int]] = [[] for _ in self.elements]
        for u, ups in enumerate(self.covers_up):
            for v in ups:
                down[v].append(u)
        self.covers_down = tuple(tuple(sorted(d)) for d in down)
        self.name = name
        self.metadata = dict(metadata or {})
        self.bottom = 0
        self.top = len(self.elements) - 1
        self.n = int(self.rank[self.top])
        self.index = {p: i for i, p in enumerate(self.elements)}
        self._alpha_cache: dict[RankSet, int] = {}
        self._mobius_rows: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"RankedPoset({self.name or 'P'}, {len(self)} elements, rank {self.n})"

    # ---- structure -------------------------------------------------------

    @cached_property
    def layers(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.n + 1)]
        for i, r in enumerate(self.rank):
            out[int(r)].append(i)
        return tuple(tuple(layer) for layer in out)

    @cached_property
    def reachability(self) -> np.ndarray:
        """Boolean matrix R with R[u, v] iff u <= v."""
        size = len(self)
        R = np.zeros((size, size), dtype=bool)
        for u in range(size - 1, -1, -1):
            R[u, u] = True
            for v in self.covers_up[u]:
                R[u] |= R[v]
        return R

    @cached_property
    def graph(self) -> nx.DiGraph:
        """Hasse diagram with rank and degree attributes on nodes."""
        G = nx.DiGraph()
        for i in range(len(self)):
            G.add_node(i, rank=int(self.rank[i]), up=len(self.covers_up[i]), down=len(self.covers_down[i]))
        for u, ups in enumerate(self.covers_up):
            for v in ups:
                G.add_edge(u, v)
        return G

    def leq(self, u: int, v: int) -> bool:
        return bool(self.reachability[u, v])

    def interval(self, u: int, v: int) -> list[int]:
        """Element ids of [u, v]."""
        if not self.leq(u, v):
            raise OrderViolationError(f"{self.elements[u]!s} is not below {self.elements[v]!s}")
        mask = self.reachability[u] & self.reachability[:, v]
        return [int(i) for i in np.flatnonzero(mask)]

    def id_of(self, payload: Hashable) -> int:
        try:
            return self.index[payload]
        except KeyError as e:
            raise ValueError(f"{payload!s} is not an element of {self.name or 'the poset'}") from e

    def rank_generating_function(self) -> tuple[int, ...]:
        """Number of elements of each rank."""
        return tuple(len(layer) for layer in self.layers)

    def maximal_chains(self) -> Iterator[tuple[int, ...]]:
        """All 0̂-1̂ chains, depth first in id order."""
        stack = [(self.bottom,)]
        while stack:
            chain = stack.pop()
            ups = self.covers_up[chain[-1]]
            if not ups:
                yield chain
                continue
            for v in reversed(ups):
                stack.append(chain + (v,))

    def is_maximal_chain(self, chain: Sequence[int]) -> bool:
        if len(chain) != self.n + 1 or chain[0] != self.bottom or chain[-1] != self.top:
            return False
        return all(b in self.covers_up[a] for a, b in zip(chain, chain[1:]))

    # ---- flag vectors ----------------------------------------------------

    def _check_rank_set(self, S: Iterable[int]) -> list[int]:
        ranks = sorted(set(S))
        for s in ranks:
            if not 0 < s < self.n:
                raise ValueError(f"Rank {s} is outside 1..{self.n - 1}")
        return ranks

    def _block(self, weights: np.ndarray, r: int, s: int) -> np.ndarray:
        return weights[np.ix_(self.layers[r], self.layers[s])]

    def _chain_sum(self, weights: np.ndarray, ranks: list[int]) -> Any:
        vec = np.array([1], dtype=object)
        prev = 0
        for s in ranks + [self.n]:
            vec = vec.dot(self._block(weights, prev, s))
            prev = s
        return vec[0]

    @cached_property
    def zeta_matrix(self) -> np.ndarray:
        return self.reachability.astype(np.int64).astype(object)

    def alpha(self, S: Iterable[int]) -> int:
        """
        Number of chains 0̂ < t_1 < ... < t_k < 1̂ whose ranks are exactly S.

        Raises:
            ValueError: if S is not inside {1..n-1}
        """
        ranks = self._check_rank_set(S)
        key = frozenset(ranks)
        if key not in self._alpha_cache:
            if self.n == 0:
                self._alpha_cache[key] = 1
            else:
                self._alpha_cache[key] = int(self._chain_sum(self.zeta_matrix, ranks))
        return self._alpha_cache[key]

    def alpha_weighted(self, weights: np.ndarray, S: Iterable[int]) -> Any:
        """Σ over chains with rank set S of φ(0̂,t_1) φ(t_1,t_2) ... φ(t_k,1̂)."""
        ranks = self._check_rank_set(S)
        if self.n == 0:
            return weights[self.bottom, self.top]
        return self._chain_sum(weights, ranks)

    def beta(self, S: Iterable[int]) -> int:
        """Flag h-vector by inclusion-exclusion over subsets of S."""
        ranks = self._check_rank_set(S)
        total = 0
        for k in range(len(ranks) + 1):
            sign = (-1) ** (len(ranks) - k)
            for T in combinations(ranks, k):
                total += sign * self.alpha(T)
        return total

    def flag_vectors(self) -> FlagVectors:
        sets = all_rank_sets(self.n)
        return FlagVectors(alpha={S: self.alpha(S) for S in sets}, beta={S: self.beta(S) for S in sets})

    def flag_table(self) -> pd.DataFrame:
        """α and β for every S ⊆ [n-1] as a DataFrame."""
        rows = [
            {"S": "{" + ",".join(map(str, sorted(S))) + "}", "size": len(S), "alpha": self.alpha(S), "beta": self.beta(S)}
            for S in all_rank_sets(self.n)
        ]
        return pd.DataFrame(rows, columns=["S", "size", "alpha", "beta"])

    def chain_count(self) -> int:
        return self.alpha(range(1, self.n))

    # ---- Möbius function and zeta powers ---------------------------------

    def _mobius_row(self, u: int) -> np.ndarray:
        if u not in self._mobius_rows:
            R = self.reachability
            row = np.zeros(len(self), dtype=object)
            for v in np.flatnonzero(R[u]):
                if v == u:
                    row[v] = 1
                    continue
                mask = R[u] & R[:, v]
                mask[v] = False
                row[v] = -sum(row[mask].tolist())
            self._mobius_rows[u] = row
        return self._mobius_rows[u]

    def mobius(self, u: int, v: int) -> int:
        """
        μ(u, v) by the recursion μ(u,u) = 1, μ(u,v) = -Σ_{u<=t<v} μ(u,t).

        Raises:
            OrderViolationError: if u is not below v
        """
        if not self.leq(u, v):
            raise OrderViolationError(f"{self.elements[u]!s} is not below {self.elements[v]!s}")
        return int(self._mobius_row(u)[v])

    @cached_property
    def mobius_matrix(self) -> np.ndarray:
        return np.vstack([self._mobius_row(u) for u in range(len(self))])

    def zeta_power(self, k: int) -> Fraction:
        """
        ζ^k(0̂, 1̂): number of multichains 0̂ = t_0 <= ... <= t_k = 1̂ for k >= 0,
        and the corresponding power of μ for k < 0.
        """
        step = self.zeta_matrix if k >= 0 else self.mobius_matrix
        row = np.zeros(len(self), dtype=object)
        row[self.bottom] = 1
        for _ in range(abs(k)):
            row = row.dot(step)
        return Fraction(row[self.top])

    def rank_symmetry_witness(self) -> Optional[tuple[int, int]]:
        """First interval [u, v] whose rank counts are not palindromic, or None."""
        R = self.reachability
        for u in range(len(self)):
            for v in np.flatnonzero(R[u]):
                mask = R[u] & R[:, v]
                counts = np.bincount(self.rank[mask] - self.rank[u])
                if not np.array_equal(counts, counts[::-1]):
                    return u, int(v)
        return None

    def is_locally_rank_symmetric(self) -> bool:
        return self.rank_symmetry_witness() is None

    def to_dot(self, render: Callable[[Any], str] = str) -> str:
        """Hasse diagram in DOT, nodes grouped by rank."""
        lines = [f'digraph "{self.name or "P"}" {{', "  rankdir=BT;"]
        for i, p in enumerate(self.elements):
            label = render(p).replace('"', '\\"')
            lines.append(f'  n{i} [label="{label}"];')
        for layer in self.layers:
            lines.append("  { rank=same; " + " ".join(f"n{i};" for i in layer) + " }")
        for u, ups in enumerate(self.covers_up):
            for v in ups:
                lines.append(f"  n{u} -> n{v};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def build(
    cover_generator: Callable[[Any], Iterable[Any]],
    bottom_payload: Any,
    key: Callable[[Any], Any] = repr,
    name: str = "",
    metadata: Optional[dict] = None,
) -> RankedPoset:
    """
    Close the cover relation from the bottom, rank by rank.

    Args:
        cover_generator: payload -> payloads covering it
        bottom_payload: the element 0̂
        key: sort key fixing the id order within a rank
        name: display name
        metadata: free-form data carried on the poset

    Returns:
        RankedPoset with ids ordered by rank, then key

    Raises:
        GradingError: if a cover skips or repeats a rank, or there are several maximal elements
    """
    rank_of = {bottom_payload: 0}
    layers = [[bottom_payload]]
    covers: dict[Any, list[Any]] = {}
    while layers[-1]:
        r = len(layers) - 1
        nxt = []
        for p in layers[r]:
            ups = list(cover_generator(p))
            covers[p] = ups
            for q in ups:
                seen = rank_of.get(q)
                if seen is None:
                    rank_of[q] = r + 1
                    nxt.append(q)
                elif seen != r + 1:
                    raise GradingError(f"Cover {p!s} < {q!s} joins ranks {r} and {seen}")
        layers.append(nxt)
    layers.pop()

    maximal = [p for p, ups in covers.items() if not ups]
    if len(maximal) != 1:
        raise GradingError(f"Expected a unique maximal element, found {len(maximal)}")
    if maximal[0] not in layers[-1] or len(layers[-1]) != 1:
        raise GradingError("The maximal element is not alone in the top rank")

    ordered = [p for layer in layers for p in sorted(layer, key=key)]
    ids = {p: i for i, p in enumerate(ordered)}
    rank = [rank_of[p] for p in ordered]
    covers_up = [[ids[q] for q in covers[p]] for p in ordered]
    logger.debug(f"build: {len(ordered)} elements over {len(layers)} ranks")
    return RankedPoset(ordered, rank, covers_up, name=name, metadata=metadata)


def poset_from_covers(
    covers: Iterable[tuple[Any, Any]],
    elements: Iterable[Any] = (),
    key: Callable[[Any], Any] = repr,
    name: str = "",
    metadata: Optional[dict] = None,
) -> RankedPoset:
    """Build a poset from explicit cover pairs (u, v) meaning u ⋖ v."""
    up: dict[Any, list[Any]] = {p: [] for p in elements}
    has_lower: set = set()
    for u, v in covers:
        up.setdefault(u, []).append(v)
        up.setdefault(v, [])
        has_lower.add(v)
    minimal = [p for p in up if p not in has_lower]
    if len(minimal) != 1:
        raise GradingError(f"Expected a unique minimal element, found {len(minimal)}")
    poset = build(lambda p: up[p], minimal[0], key=key, name=name, metadata=metadata)
    if len(poset) != len(up):
        raise GradingError("Cover data contains elements unreachable from the minimum")
    return poset


def product_of_chains(nu: Sequence[int]) -> RankedPoset:
    """
    C_{ν_1+1} × C_{ν_2+1} × ... with coordinatewise covers.

    Elements are coordinate tuples; the cover raising coordinate i is labeled i+1
    by CoordinateLabeling.
    """
    shape = tuple(int(p) for p in nu)
    if not shape or any(p < 1 for p in shape):
        raise ValueError(f"Expected a nonempty sequence of positive parts, got {nu!r}")

    def covers(c):
        return [c[:i] + (c[i] + 1,) + c[i + 1:] for i in range(len(shape)) if c[i] < shape[i]]

    name = "C" + "xC".join(str(p + 1) for p in shape)
    return build(covers, (0,) * len(shape), key=lambda c: c, name=name, metadata={"shape": shape})


def is_isomorphic(P: RankedPoset, Q: RankedPoset, max_size: int = 1000) -> bool:
    """
    Graded isomorphism of Hasse diagrams, matching rank and up/down degrees.

    Raises:
        SizeLimitExceeded: if either poset has more than max_size elements
    """
    if len(P) > max_size or len(Q) > max_size:
        raise SizeLimitExceeded(f"Isomorphism test limited to {max_size} elements")
    if len(P) != len(Q) or P.n != Q.n or P.rank_generating_function() != Q.rank_generating_function():
        return False
    if P.graph.number_of_edges() != Q.graph.number_of_edges():
        return False
    matcher = DiGraphMatcher(
        P.graph,
        Q.graph,
        node_match=lambda a, b: a["rank"] == b["rank"] and a["up"] == b["up"] and a["down"] == b["down"],
    )
    return matcher.is_isomorphic()


class IncidenceFunction:
    """
    Element of the incidence algebra of a poset: a matrix of exact values
    supported on pairs u <= v.
    """

    def __init__(self, poset: RankedPoset, values: np.ndarray):
        self.poset = poset
        self.values = values

    def __call__(self, u: int, v: int) -> Any:
        return self.values[u, v]

    def __eq__(self, other) -> bool:
        if not isinstance(other, IncidenceFunction):
            return NotImplemented
        return self.poset is other.poset and bool(np.all(self.values == other.values))

    __hash__ = None

    @classmethod
    def zeta(cls, poset: RankedPoset) -> "IncidenceFunction":
        return cls(poset, poset.zeta_matrix.copy())

    @classmethod
    def delta(cls, poset: RankedPoset) -> "IncidenceFunction":
        return cls(poset, np.identity(len(poset), dtype=np.int64).astype(object))

    @classmethod
    def mobius(cls, poset: RankedPoset) -> "IncidenceFunction":
        return cls(poset, poset.mobius_matrix.copy())

    @classmethod
    def from_callable(cls, poset: RankedPoset, fn: Callable[[int, int], Any]) -> "IncidenceFunction":
        """Tabulate fn(u, v) on comparable pairs, zero elsewhere."""
        values = np.zeros((len(poset), len(poset)), dtype=object)
        for u, v in zip(*np.nonzero(poset.reachability)):
            values[u, v] = fn(int(u), int(v))
        return cls(poset, values)


def convolve(P: RankedPoset, f: IncidenceFunction, g: IncidenceFunction) -> IncidenceFunction:
    """(f∗g)(u, v) = Σ_{u<=t<=v} f(u,t) g(t,v)."""
    if f.poset is not P or g.poset is not P:
        raise ValueError("Incidence functions belong to a different poset")
    return IncidenceFunction(P, f.values.dot(g.values))
