"""
Local Action Engine for SHUFFLE_POSETS
Symmetric group action on maximal chains induced by swapping adjacent labels:
generator tables, orbits, stabilizers, permutation characters and
structural checks of the action.
"""
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from itertools import combinations, permutations
from math import factorial, prod
from typing import Any, Optional, Sequence

import networkx as nx
import numpy as np
import pandas as pd
from networkx.algorithms.isomorphism import DiGraphMatcher
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from core.algebra.symfunc import (
    Partition,
    flag_qsym,
    frobenius_from_character,
    frobenius_from_orbit_types,
    h,
    omega,
    partitions,
)
from core.errors import InvariantViolation, SizeLimitExceeded
from core.poset import RankedPoset, is_isomorphic, poset_from_covers, product_of_chains
from core.shuffles.labeling import ChainLabeling, LabelingCheck, TableLabeling

logger = logging.getLogger(__name__)


def _apply(table: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Compose a generator table with chain ids, propagating -1 (undefined)."""
    return np.where(x >= 0, table[np.maximum(x, 0)], -1)


def transposition_word(p: int, q: int) -> list[int]:
    """Generators whose product is the transposition (p q), p < q."""
    return list(range(p, q)) + list(range(q - 2, p - 1, -1))


def cycle_word(lam: Sequence[int]) -> list[int]:
    """Generators of a permutation with cycles of lengths λ on consecutive positions."""
    word, start = [], 1
    for part in lam:
        word.extend(range(start, start + part - 1))
        start += part
    return word


@dataclass
class Orbit:
    """Chains of one orbit, the multiplicities ν of their common label multiset and the multiset itself."""

    chain_ids: np.ndarray
    type: Partition
    multiset: tuple

    def __len__(self) -> int:
        return len(self.chain_ids)

    def to_dict(self) -> dict:
        return {
            "size": len(self),
            "type": list(self.type),
            "multiset": [str(c) for c in self.multiset],
            "shape": [part + 1 for part in self.type],
        }


@dataclass
class OrbitDecomposition:
    orbits: list[Orbit]
    tables: np.ndarray

    def __len__(self) -> int:
        return len(self.orbits)

    def types(self) -> list[Partition]:
        return [o.type for o in self.orbits]

    def type_census(self) -> Counter:
        return Counter(self.types())


@dataclass
class StabilizerReport:
    """Fixed transpositions of a chain and the blocks of the Young subgroup they generate."""

    chain: int
    blocks: tuple[tuple[int, ...], ...]
    fixing_generators: tuple[int, ...] = ()

    @property
    def order(self) -> int:
        return prod(factorial(len(b)) for b in self.blocks)


class LocalAction:
    """
    σ_i sends a chain to the chain whose labels are its labels with positions
    i and i+1 exchanged. Tables hold -1 where no such chain exists or the
    choice is ambiguous.
    """

    def __init__(self, poset: RankedPoset, labeling: ChainLabeling):
        self.poset = poset
        self.labeling = labeling
        chains, labels = [], []
        for chain, lab in labeling.enumerate_labeled_chains():
            chains.append(chain)
            labels.append(lab)
        self.n = poset.n
        self.chains = chains
        self.labels = labels
        self.chain_array = np.array(chains, dtype=np.int64).reshape(len(chains), self.n + 1)
        self.alphabet = sorted({c for lab in labels for c in lab})
        code = {c: k for k, c in enumerate(self.alphabet)}
        self.codes = np.array([[code[c] for c in lab] for lab in labels], dtype=np.int64).reshape(len(labels), self.n)
        self.chain_index = {c: k for k, c in enumerate(chains)}
        self.ambiguous: list[dict] = []
        self.tables = self._build_tables()
        logger.info(f"Local action on {poset.name or 'P'}: {len(chains)} chains, {self.n - 1} generators")

    def __len__(self) -> int:
        return len(self.chains)

    def _build_tables(self) -> np.ndarray:
        n, count = self.n, len(self.chains)
        tables = np.full((max(n - 1, 0), count), -1, dtype=np.int64)
        base = len(self.alphabet) + 1
        if base ** n >= 2 ** 62:
            raise SizeLimitExceeded(f"Label codes of length {n} over {base - 1} letters do not fit in 64 bits")
        weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
        keys = self.codes @ weights if n else np.zeros(count, dtype=np.int64)
        # Matches swapped labels globally; locality_violations checks the image shares the other ranks.
        if len(np.unique(keys)) == count:
            order = np.argsort(keys, kind="stable")
            sorted_keys = keys[order]
            for i in range(1, n):
                target = keys + (self.codes[:, i] - self.codes[:, i - 1]) * (weights[i - 1] - weights[i])
                pos = np.clip(np.searchsorted(sorted_keys, target), 0, count - 1)
                tables[i - 1] = np.where(sorted_keys[pos] == target, order[pos], -1)
            return tables

        for i in range(1, n):
            groups: dict[tuple, list[int]] = defaultdict(list)
            for k, c in enumerate(self.chains):
                groups[(c[:i], c[i + 1:])].append(k)
            for k, c in enumerate(self.chains):
                lab = self.labels[k]
                if lab[i - 1] == lab[i]:
                    tables[i - 1, k] = k
                    continue
                swapped = lab[: i - 1] + (lab[i], lab[i - 1]) + lab[i + 1:]
                hits = [j for j in groups[(c[:i], c[i + 1:])] if self.labels[j] == swapped]
                if len(hits) == 1:
                    tables[i - 1, k] = hits[0]
                else:
                    self.ambiguous.append({"chain": k, "generator": i, "matches": len(hits)})
        return tables

    # ---- acting --------------------------------------------------------------

    def chain_id(self, chain: Sequence[int]) -> int:
        return self.chain_index[tuple(chain)]

    def act_generator(self, i: int, c: int) -> int:
        """
        σ_i applied to chain id c.

        Raises:
            ValueError: if i is outside 1..n-1
            InvariantViolation: if σ_i is undefined at c
        """
        if not 1 <= i <= self.n - 1:
            raise ValueError(f"Generator {i} outside 1..{self.n - 1}")
        target = int(self.tables[i - 1, c])
        if target < 0:
            raise InvariantViolation(f"σ_{i} is not defined on chain {self.chains[c]}")
        return target

    def act_word(self, word: Sequence[int], c: int) -> int:
        """Apply σ_{w_1} σ_{w_2} ... σ_{w_k}, rightmost first."""
        for i in reversed(word):
            c = self.act_generator(i, c)
        return c

    def _act_all(self, word: Sequence[int]) -> np.ndarray:
        x = np.arange(len(self.chains), dtype=np.int64)
        for i in reversed(word):
            x = _apply(self.tables[i - 1], x)
        return x

    # ---- properties of the action ----------------------------------------------

    def undefined_entries(self) -> list[dict]:
        rows, cols = np.nonzero(self.tables < 0)
        return [{"generator": int(i) + 1, "chain": int(c)} for i, c in zip(rows, cols)]

    def locality_violations(self) -> list[dict]:
        """Chains moved by σ_i at a rank other than i."""
        out = []
        for i in range(1, self.n):
            target = self.tables[i - 1]
            ok = target >= 0
            src = self.chain_array[ok]
            dst = self.chain_array[target[ok]]
            differs = (src != dst)
            differs[:, i] = False
            for k in np.flatnonzero(differs.any(axis=1)):
                out.append({"generator": i, "chain": int(np.flatnonzero(ok)[k])})
        return out

    def coxeter_violations(self, max_witnesses: int = 10) -> list[dict]:
        """Chains where σ_i² = 1, (σ_iσ_{i+1})³ = 1 or (σ_iσ_j)² = 1 (|i-j| >= 2) fails."""
        ids = np.arange(len(self.chains), dtype=np.int64)
        relations = [(f"s{i}^2", [i, i]) for i in range(1, self.n)]
        relations += [(f"(s{i}s{i + 1})^3", [i, i + 1] * 3) for i in range(1, self.n - 1)]
        relations += [(f"(s{i}s{j})^2", [i, j] * 2) for i, j in combinations(range(1, self.n), 2) if j - i >= 2]
        out = []
        for name, word in relations:
            bad = np.flatnonzero(self._act_all(word) != ids)
            for c in bad[: max(0, max_witnesses - len(out))]:
                out.append({"relation": name, "chain": int(c)})
            if len(out) >= max_witnesses:
                break
        return out

    def orbits(self) -> OrbitDecomposition:
        """Connected components of the graph joining c to σ_i(c)."""
        count = len(self.chains)
        rows, cols = [], []
        for i in range(1, self.n):
            target = self.tables[i - 1]
            ok = target >= 0
            rows.append(np.flatnonzero(ok))
            cols.append(target[ok])
        if rows:
            r, c = np.concatenate(rows), np.concatenate(cols)
        else:
            r = c = np.zeros(0, dtype=np.int64)
        graph = coo_matrix((np.ones(len(r), dtype=np.int8), (r, c)), shape=(count, count)).tocsr()
        n_comp, comp = connected_components(graph, directed=False)
        order = np.argsort(comp, kind="stable")
        splits = np.split(order, np.flatnonzero(np.diff(comp[order])) + 1) if count else []
        orbits = []
        for members in sorted(splits, key=lambda m: int(m.min())):
            lab = self.labels[int(members[0])]
            nu = tuple(sorted(Counter(lab).values(), reverse=True))
            orbits.append(Orbit(members, nu, tuple(sorted(lab))))
        logger.info(f"{n_comp} orbits on {count} chains")
        return OrbitDecomposition(orbits, self.tables)

    def orbit_size_violations(self, decomposition: Optional[OrbitDecomposition] = None) -> list[dict]:
        """Orbits whose size is not n!/∏ν_i! or whose chains carry different label multisets."""
        decomposition = decomposition or self.orbits()
        out = []
        for k, orbit in enumerate(decomposition.orbits):
            expected = factorial(self.n) // prod(factorial(p) for p in orbit.type)
            mixed = any(tuple(sorted(self.labels[int(c)])) != orbit.multiset for c in orbit.chain_ids)
            if len(orbit) != expected or mixed:
                out.append({"orbit": k, "size": len(orbit), "expected": expected, "mixed_labels": mixed})
        return out

    def stabilizer(self, c: int) -> StabilizerReport:
        """
        Transpositions fixing c and the blocks they generate.

        Raises:
            InvariantViolation: if the blocks differ from the positions of equal labels,
                or the orbit size contradicts a Young stabilizer
        """
        n = self.n
        fixed = [(p, q) for p, q in combinations(range(1, n + 1), 2) if self.act_word(transposition_word(p, q), c) == c]
        parent = list(range(n + 1))

        def find(a: int) -> int:
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for p, q in fixed:
            parent[find(p)] = find(q)
        blocks_map: dict[int, list[int]] = defaultdict(list)
        for pos in range(1, n + 1):
            blocks_map[find(pos)].append(pos)
        blocks = tuple(sorted(tuple(b) for b in blocks_map.values()))

        by_label: dict[Any, list[int]] = defaultdict(list)
        for pos, label in enumerate(self.labels[c], start=1):
            by_label[label].append(pos)
        if blocks != tuple(sorted(tuple(b) for b in by_label.values())):
            raise InvariantViolation(f"Stabilizer of chain {c} is not the Young subgroup of equal labels")

        report = StabilizerReport(c, blocks, tuple(i for i in range(1, n) if self.tables[i - 1, c] == c))
        orbit_size = self._orbit_size(c)
        if orbit_size * report.order != factorial(n):
            raise InvariantViolation(f"Orbit of chain {c} has size {orbit_size}, stabilizer order {report.order}")
        return report

    def _orbit_size(self, c: int) -> int:
        seen, stack = {c}, [c]
        while stack:
            k = stack.pop()
            for i in range(1, self.n):
                t = int(self.tables[i - 1, k])
                if t >= 0 and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return len(seen)

    def character_value(self, lam: Sequence[int], reverse_cycles: bool = False) -> int:
        """
        Number of chains fixed by a permutation of cycle type λ, cycles placed
        on consecutive positions (largest first, or smallest first).
        """
        lam = tuple(sorted(lam, reverse=True))
        if sum(lam) != self.n or any(p < 1 for p in lam):
            raise ValueError(f"{lam} is not a partition of {self.n}")
        word = cycle_word(lam[::-1] if reverse_cycles else lam)
        ids = np.arange(len(self.chains), dtype=np.int64)
        return int(np.count_nonzero(self._act_all(word) == ids))

    def character(self) -> dict[Partition, int]:
        return {lam: self.character_value(lam) for lam in partitions(self.n)}


def orbit_report(action: LocalAction, decomposition: Optional[OrbitDecomposition] = None) -> pd.DataFrame:
    """One row per orbit: size, type ν, label multiset and product-of-chains shape."""
    decomposition = decomposition or action.orbits()
    rows = []
    for orbit in decomposition.orbits:
        row = orbit.to_dict()
        row["representative"] = [str(action.poset.elements[i]) for i in action.chains[int(orbit.chain_ids[0])]]
        rows.append(row)
    return pd.DataFrame(rows, columns=["size", "type", "multiset", "shape", "representative"])


def orbit_subposet(action: LocalAction, orbit: Orbit) -> RankedPoset:
    """Poset formed by the covers lying on the chains of an orbit."""
    covers = {(int(a), int(b)) for c in orbit.chain_ids for a, b in zip(action.chains[int(c)], action.chains[int(c)][1:])}
    if not covers:
        return poset_from_covers([], elements=[action.poset.bottom], key=int)
    return poset_from_covers(sorted(covers), key=int)


def verify_orbit_shape(action: LocalAction, orbit: Orbit, max_size: int = 1000) -> bool:
    """The chains of an orbit form a product of chains of shape ν + 1."""
    if action.n == 0:
        return True
    return is_isomorphic(orbit_subposet(action, orbit), product_of_chains(orbit.type), max_size=max_size)


def verify_frobenius_match(P: RankedPoset, labeling: ChainLabeling, strict: bool = True, max_size: int = 1000) -> bool:
    """
    Σ_orbits h_ν equals the Frobenius characteristic of the fixed-point
    character, and equals ωF_P when labels strictly increase along the
    unique increasing chains (F_P itself otherwise). In the latter case a
    single orbit of type ν also forces P to be the product of chains of ν.
    """
    action = LocalAction(P, labeling)
    decomposition = action.orbits()
    from_orbits = frobenius_from_orbit_types(decomposition.types(), P.n)
    from_character = frobenius_from_character(action.character(), P.n)
    F = flag_qsym(P)
    target = omega(F) if strict else F
    if not (from_orbits == from_character == target):
        logger.warning(f"Frobenius mismatch on {P.name or 'P'}")
        return False
    if not strict and len(decomposition) == 1:
        nu = decomposition.orbits[0].type
        if F != h(nu) or not is_isomorphic(P, product_of_chains(nu), max_size=max_size):
            return False
    return True


# ---- rank three classes -----------------------------------------------------------


def _class_is_standard(start: int, end: int, members: list[tuple[int, int]], triples: dict) -> bool:
    """The chains δ of a class, with their labels, form a product of chains labeled by coordinates."""
    edges: dict[tuple[int, int], Any] = {}
    for d1, d2 in members:
        t = triples[(d1, d2)]
        for edge, label in (((start, d1), t[0]), ((d1, d2), t[1]), ((d2, end), t[2])):
            if edges.setdefault(edge, label) != label:
                return False
    mult = Counter(triples[members[0]])
    ranked = sorted(mult, key=lambda c: (-mult[c], c))
    coordinate = {c: k + 1 for k, c in enumerate(ranked)}
    nu = tuple(mult[c] for c in ranked)

    G = nx.DiGraph()
    for (a, b), label in edges.items():
        G.add_edge(a, b, label=coordinate[label])
    Q = product_of_chains(nu)
    H = nx.DiGraph()
    for u, ups in enumerate(Q.covers_up):
        for v in ups:
            src, dst = Q.elements[u], Q.elements[v]
            H.add_edge(u, v, label=next(i for i in range(len(src)) if src[i] != dst[i]) + 1)
    if G.number_of_nodes() != H.number_of_nodes() or G.number_of_edges() != H.number_of_edges():
        return False
    return DiGraphMatcher(G, H, edge_match=lambda x, y: x["label"] == y["label"]).is_isomorphic()


def _split_into_classes(start: int, end: int, group: list[tuple[int, int]], triples: dict) -> Optional[list[list]]:
    """Partition δ's sharing a label multiset into classes, one δ per arrangement of the multiset."""
    arrangements = len(set(permutations(triples[group[0]])))
    if len(group) % arrangements:
        return None

    def search(remaining: list) -> Optional[list[list]]:
        if not remaining:
            return []
        first, rest = remaining[0], remaining[1:]
        for others in combinations(rest, arrangements - 1):
            members = [first, *others]
            if len({triples[m] for m in members}) != arrangements:
                continue
            if not _class_is_standard(start, end, members, triples):
                continue
            tail = search([m for m in rest if m not in others])
            if tail is not None:
                return [members, *tail]
        return None

    return search(group)


def verify_rank_three_classes(P: RankedPoset, labeling: ChainLabeling) -> LabelingCheck:
    """
    For every maximal chain and every window of three consecutive covers, the
    alternative windows between the same endpoints, labeled inside the full
    chain, split into classes that are labeled products of chains: six windows
    for three distinct labels, three for a repeated label, one for a triple label.
    """
    n = P.n
    if n < 3:
        return LabelingCheck("rank-3 classes", True)
    seen: set = set()
    for chain, _ in labeling.enumerate_labeled_chains():
        for i in range(1, n - 1):
            tau, theta = chain[:i], chain[i + 2:]
            if (tau, theta) in seen:
                continue
            seen.add((tau, theta))
            start, end = chain[i - 1], chain[i + 2]
            deltas = [
                (d1, d2)
                for d1 in P.covers_up[start]
                for d2 in P.covers_up[d1]
                if end in P.covers_up[d2]
            ]
            triples = {d: tuple(labeling.labels(tau + d + theta)[i - 1: i + 2]) for d in deltas}
            groups: dict[tuple, list] = defaultdict(list)
            for d in deltas:
                groups[tuple(sorted(triples[d]))].append(d)
            for multiset, group in groups.items():
                if _split_into_classes(start, end, group, triples) is None:
                    return LabelingCheck(
                        "rank-3 classes",
                        False,
                        {"chain": list(chain), "position": i, "multiset": [str(c) for c in multiset]},
                    )
    return LabelingCheck("rank-3 classes", True)


# ---- fixtures with repeated label sequences ------------------------------------


def crown_counterexample() -> tuple[RankedPoset, TableLabeling]:
    """
    Rank 3 poset with atoms A1..A6 and coatoms B1..B6, A_k below B_k and B_{k+1}.
    Its twelve chains carry every arrangement of a, b, c twice, so adjacent
    swaps are defined but σ1σ2σ1 and σ2σ1σ2 disagree.
    """
    covers = [("0", f"A{k}") for k in range(1, 7)]
    covers += [(f"B{k}", "1") for k in range(1, 7)]
    covers += [(f"A{k}", f"B{k}") for k in range(1, 7)]
    covers += [(f"A{k}", f"B{k % 6 + 1}") for k in range(1, 7)]
    P = poset_from_covers(covers, key=str, name="crown")
    arrangements = ["abc", "bac", "bca", "cba", "cab", "acb"]
    table = {}
    for m in range(12):
        k = m // 2
        atom, coatom = (f"A{k + 1}", f"B{k + 1}") if m % 2 else (f"A{k if k else 6}", f"B{k + 1}")
        chain = (P.index["0"], P.index[atom], P.index[coatom], P.index["1"])
        table[chain] = tuple(arrangements[m % 6])
    return P, TableLabeling(P, table)


def split_orbit_example() -> tuple[RankedPoset, TableLabeling]:
    """
    Rank 3 poset with six chains labeled abb, bab, bba, bab, abb, bba: labels
    repeat, yet the swaps define an action with two orbits on the same multiset.
    """
    pairs = [("A", "B", "abb"), ("A'", "B", "bab"), ("A'", "B'", "bba"),
             ("A''", "B'", "bab"), ("A'''", "B'", "abb"), ("A''", "B''", "bba")]
    covers = {("0", a) for a, _, _ in pairs} | {(b, "1") for _, b, _ in pairs} | {(a, b) for a, b, _ in pairs}
    P = poset_from_covers(sorted(covers), key=str, name="split orbit")
    table = {(P.index["0"], P.index[a], P.index[b], P.index["1"]): tuple(lab) for a, b, lab in pairs}
    return P, TableLabeling(P, table)
