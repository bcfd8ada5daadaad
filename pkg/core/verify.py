"""
Verification Engine for SHUFFLE_POSETS
Runs the exhaustive consistency suites over small shuffle posets and reports findings.
"""
import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb, factorial
from typing import Callable, Optional

import pandas as pd

from core.algebra.language import (
    AlternatingLetter, l_words, parse_alternating, product_rhs_coefficient, verify_l_bijection,
)
from core.algebra.series import (
    BivariateSeries, MultiplicativeFunction, classify_elements, convolve_closed_form,
    convolve_direct_series, count_by_type, epsilon_split, iterated_product, product_identity,
    zeta_polynomial_gf, zeta_values,
)
from core.algebra.symfunc import (
    SymPoly, flag_qsym, h, is_symmetric, omega, partitions, shuffle_flag_closed_form, verify_mobius_flag_identity,
    verify_recurrence,
)
from core.errors import InvariantViolation, SizeLimitExceeded
from core.poset import RankedPoset, product_of_chains
from core.schemas import RunLimits, ShuffleContext
from core.shuffles.action import LocalAction, verify_frobenius_match, verify_orbit_shape, verify_rank_three_classes
from core.shuffles.labeling import (
    CoordinateLabeling, ShuffleLabeling, decreasing_chain_count, verify_c, verify_r_star, verify_s,
)
from core.shuffles.words import (
    chain_count_formula, element_count_formula, lower, mobius_formula, shuffle_poset, upper,
)

logger = logging.getLogger(__name__)


@dataclass
class Finding:
    """Outcome of one check; a failed check carries a minimal witness."""
    id: str
    suite: str
    title: str
    description: str
    passed: bool
    witness: Optional[dict] = None

    def to_dict(self):
        """Convert to dictionary for serialization."""
        return {
            'id': self.id,
            'suite': self.suite,
            'title': self.title,
            'description': self.description,
            'passed': self.passed,
            'witness': self.witness,
        }


SUITES = {
    1: "counting",
    2: "flag-symmetry",
    3: "labeling",
    4: "local-action",
    5: "frobenius",
    6: "generalized-flag",
    7: "types",
    8: "convolution",
    9: "language",
}


class VerificationEngine:
    """Exhaustive checks of the shuffle-poset identities for all M + N up to a bound."""

    def __init__(self, max_sum: int = 4, limits: Optional[RunLimits] = None, seed: int = 0):
        """
        Initialize verification engine.

        Args:
            max_sum: largest M + N swept by the suites
            limits: size caps (default RunLimits())
            seed: seed for the random multiplicative tables

        Raises:
            SizeLimitExceeded: if max_sum exceeds limits.max_rank
        """
        self.limits = limits or RunLimits()
        if max_sum > self.limits.max_rank:
            raise SizeLimitExceeded(f"max_sum {max_sum} exceeds the rank cap {self.limits.max_rank}")
        self.max_sum = max_sum
        self.seed = seed
        self._posets: dict[tuple[int, int], RankedPoset] = {}

    def poset(self, M: int, N: int) -> RankedPoset:
        if (M, N) not in self._posets:
            self._posets[(M, N)] = shuffle_poset(ShuffleContext(lower_size=M, upper_size=N))
        return self._posets[(M, N)]

    def sizes(self, cap: Optional[int] = None) -> list[tuple[int, int]]:
        bound = self.max_sum if cap is None else min(cap, self.max_sum)
        return [(M, s - M) for s in range(bound + 1) for M in range(s, -1, -1)]

    # ---- suites -------------------------------------------------------------

    def check_counting(self) -> list[Finding]:
        """Element, maximal chain and Möbius counts against their closed forms."""
        findings = []
        for M, N in self.sizes(7):
            P = self.poset(M, N)
            observed = {"elements": len(P), "chains": P.chain_count(), "mobius": P.mobius(P.bottom, P.top)}
            expected = {
                "elements": element_count_formula(M, N),
                "chains": chain_count_formula(M, N),
                "mobius": mobius_formula(M, N),
            }
            findings.append(self._compare(1, f"W{M}{N}", "Counting identities", observed, expected))
        return findings

    def check_flag_symmetry(self) -> list[Finding]:
        findings = []
        computed: dict[tuple[int, int], SymPoly] = {}
        for M, N in self.sizes(6):
            P = self.poset(M, N)
            witness = P.rank_symmetry_witness()
            F = computed[(M, N)] = flag_qsym(P)
            check = is_symmetric(F)
            ok = witness is None and bool(check) and F == shuffle_flag_closed_form(M, N)
            findings.append(Finding(
                id=f"flag-W{M}{N}", suite=SUITES[2], title="Flag function symmetry",
                description=f"W_{M},{N}: intervals rank-symmetric, flag function symmetric and of closed form",
                passed=ok,
                witness=None if ok else {"interval": witness, "symmetry_witness": check.witness},
            ))
        bound = min(4, self.max_sum)
        ok = verify_recurrence(bound, bound)
        findings.append(Finding(
            id=f"flag-recurrence-{bound}", suite=SUITES[2], title="Flag function recurrence",
            description=f"Recurrence and truncated generating identity for M, N <= {bound}", passed=ok,
        ))
        ok = verify_recurrence(self.max_sum, self.max_sum, table=computed)
        findings.append(Finding(
            id="flag-recurrence-posets", suite=SUITES[2], title="Flag function recurrence",
            description=f"Recurrence and truncated generating identity on the computed flag functions, M + N <= {min(6, self.max_sum)}",
            passed=ok,
        ))
        return findings

    def check_labeling(self) -> list[Finding]:
        findings = []
        for M, N in self.sizes(6):
            P = self.poset(M, N)
            labeling = ShuffleLabeling(P)
            witness: dict = {}

            for chain, labels in labeling.enumerate_labeled_chains():
                if labeling.decode(labels) != chain:
                    witness = {"round_trip": [str(P.elements[i]) for i in chain]}
                    break
            census = labeling.label_multiset_census()
            expected = self.expected_label_census(M, N)
            if not witness and census != expected:
                extra = sorted(set(census) ^ set(expected))
                witness = {"multisets": [str(c) for c in (extra[0] if extra else ())]}
            for check in (verify_c(P, labeling), verify_r_star(P, labeling), verify_s(P, labeling)):
                if not witness and not check:
                    witness = check.to_dict()
            decreasing = decreasing_chain_count(P, labeling)
            if not witness and decreasing != abs(mobius_formula(M, N)):
                witness = {"decreasing": decreasing, "mobius": mobius_formula(M, N)}
            if not witness and M + N <= 4:
                witness = self._rank_symmetry_witness(P, labeling)

            findings.append(Finding(
                id=f"labeling-W{M}{N}", suite=SUITES[3], title="Chain labeling properties",
                description=f"W_{M},{N}: decode round trip, label multisets, C, R*, S, decreasing chains, rank symmetry",
                passed=not witness, witness=witness or None,
            ))
        return findings

    @staticmethod
    def _rank_symmetry_witness(P: RankedPoset, labeling: ShuffleLabeling) -> dict:
        """First interval and offset where relabeling fails to pair the two ranks bijectively."""
        for u in range(len(P)):
            for v in P.interval(u, P.top):
                for i in range(int(P.rank[v] - P.rank[u]) + 1):
                    try:
                        mapping = labeling.rank_symmetry_bijection(u, v, i)
                    except InvariantViolation as e:
                        return {"interval": [str(P.elements[u]), str(P.elements[v])], "offset": i, "error": str(e)}
                    target = [t for t in P.interval(u, v) if P.rank[t] == P.rank[v] - i]
                    if sorted(mapping.values()) != target:
                        return {"interval": [str(P.elements[u]), str(P.elements[v])], "offset": i}
        return {}

    @staticmethod
    def expected_label_census(M: int, N: int) -> dict:
        """Multisets A ∪ 2X ∪ (X_all - X), |A| + |X| = M, each carried by (M+N)!/2^|X| chains."""
        out = {}
        xs = [upper(j) for j in range(1, N + 1)]
        for k in range(min(M, N) + 1):
            for A in combinations([lower(i) for i in range(1, M + 1)], M - k):
                for X in combinations(xs, k):
                    key = tuple(sorted(list(A) + list(X) + xs))
                    out[key] = factorial(M + N) // 2 ** k
        return out

    def check_local_action(self) -> list[Finding]:
        findings = []
        for M, N in self.sizes(5):
            P = self.poset(M, N)
            action = LocalAction(P, ShuffleLabeling(P))
            witness: dict = {}
            problems = action.undefined_entries() or action.locality_violations() or action.coxeter_violations()
            if problems:
                witness = {"action": problems[0]}
            if not witness:
                try:
                    for c in range(len(action)):
                        action.stabilizer(c)
                except InvariantViolation as e:
                    witness = {"stabilizer": str(e)}
            decomposition = action.orbits()
            if not witness:
                bad = [k for k, o in enumerate(decomposition.orbits)
                       if not verify_orbit_shape(action, o, self.limits.max_isomorphism_size)]
                if bad:
                    witness = {"orbit_shape": bad[0]}
            if not witness:
                census = decomposition.type_census()
                for k in range(min(M, N) + 1):
                    nu = tuple([2] * k + [1] * (M + N - 2 * k))
                    if census.get(nu, 0) != comb(M, k) * comb(N, k):
                        witness = {"type": list(nu), "orbits": census.get(nu, 0)}
                        break
            if not witness:
                classes = verify_rank_three_classes(P, action.labeling)
                if not classes:
                    witness = classes.to_dict()
            findings.append(Finding(
                id=f"action-W{M}{N}", suite=SUITES[4], title="Local symmetric group action",
                description=f"W_{M},{N}: Coxeter relations, Young stabilizers, orbit shapes, orbit census and rank-3 classes",
                passed=not witness, witness=witness or None,
            ))
        return findings

    def check_frobenius(self) -> list[Finding]:
        findings = []
        for M, N in self.sizes(5):
            P = self.poset(M, N)
            ok = verify_frobenius_match(P, ShuffleLabeling(P), strict=True, max_size=self.limits.max_isomorphism_size)
            if ok and (M, N) == (2, 1):
                ok = omega(flag_qsym(P)) == h([1, 1, 1]) + h([2, 1]).scale(2)
            findings.append(Finding(
                id=f"frobenius-W{M}{N}", suite=SUITES[5], title="Frobenius characteristic",
                description=f"W_{M},{N}: orbit types, fixed-point character and ωF agree", passed=ok,
            ))
        for nu in self._chain_shapes(6):
            C = product_of_chains(nu)
            ok = verify_frobenius_match(C, CoordinateLabeling(C), strict=False, max_size=self.limits.max_isomorphism_size)
            findings.append(Finding(
                id=f"frobenius-C{''.join(map(str, nu))}", suite=SUITES[5], title="Frobenius characteristic",
                description=f"Product of chains {C.name}: orbit types, character and F agree", passed=ok,
            ))
        return findings

    def _chain_shapes(self, cap: int) -> list[tuple[int, ...]]:
        return [nu for n in range(1, min(cap, self.max_sum) + 1) for nu in partitions(n)]

    def check_generalized_flag(self) -> list[Finding]:
        findings = []
        targets = [self.poset(M, N) for M, N in self.sizes(5)]
        targets += [product_of_chains((a, b)) for a in range(1, self.max_sum) for b in range(1, a + 1)
                    if a + b <= min(6, self.max_sum)]
        for P in targets:
            findings.append(Finding(
                id=f"mobius-flag-{P.name}", suite=SUITES[6], title="Möbius-weighted flag function",
                description=f"{P.name}: F(μ) = (-1)^n ωF(ζ)", passed=verify_mobius_flag_identity(P),
            ))
        return findings

    def check_types(self) -> list[Finding]:
        findings = []
        for M, N in self.sizes(6):
            census = classify_elements(M, N)
            mismatch = next(((t, k) for t, k in census.items() if count_by_type(t) != k), None)
            total = sum(count_by_type(t) for t in census)
            ok = mismatch is None and total == element_count_formula(M, N)
            witness = None
            if not ok:
                witness = {"type": mismatch[0].to_dict(), "observed": mismatch[1]} if mismatch else {"total": total}
            findings.append(Finding(
                id=f"types-W{M}{N}", suite=SUITES[7], title="Element count by type",
                description=f"W_{M},{N}: type counts match exhaustive classification", passed=ok, witness=witness,
            ))
        return findings

    def check_convolution(self, trials: int = 10) -> list[Finding]:
        findings = []
        bound = min(6, self.max_sum)
        trunc = (bound, bound)
        rng = random.Random(self.seed)
        pairs: list[tuple[str, MultiplicativeFunction, MultiplicativeFunction]] = [
            ("zeta", MultiplicativeFunction.zeta(trunc), MultiplicativeFunction.zeta(trunc)),
            ("mobius", MultiplicativeFunction.mobius(trunc), MultiplicativeFunction.zeta(trunc)),
        ]
        pairs += [(f"random-{t}", random_table(rng, trunc), random_table(rng, trunc)) for t in range(trials)]
        for name, f, g in pairs:
            direct = convolve_direct_series(f, g, trunc, max_total=bound)
            closed = convolve_closed_form(f.to_series(), g.to_series())
            witness = _first_mismatch(direct, closed, bound)
            if witness is None:
                parts = epsilon_split(f.to_series(), g.to_series())
                for eps, part in zip((1, 0, -1), parts):
                    witness = _first_mismatch(convolve_direct_series(f, g, trunc, bound, epsilon=eps), part, bound)
                    if witness is not None:
                        witness["epsilon"] = eps
                        break
            findings.append(Finding(
                id=f"convolution-{name}", suite=SUITES[8], title="Closed-form convolution",
                description=f"Closed form and ε-parts equal the direct sums for i + j <= {bound}",
                passed=witness is None, witness=witness,
            ))

        for t in range(3):
            F, G, H = (random_table(rng, trunc).to_series() for _ in range(3))
            left = convolve_closed_form(convolve_closed_form(F, G), H)
            right = convolve_closed_form(F, convolve_closed_form(G, H))
            witness = _first_mismatch(left, right, bound)
            findings.append(Finding(
                id=f"convolution-associative-{t}", suite=SUITES[8], title="Associativity of convolution",
                description=f"(f∗g)∗h = f∗(g∗h) on random tables for i + j <= {bound}",
                passed=witness is None, witness=witness,
            ))

        small = [Fraction(1), Fraction(-1, 2), Fraction(2, 3)]
        for k in range(1, 4):
            a = [rng.choice(small) for _ in range(k)]
            b = [rng.choice(small) for _ in range(k)]
            ok = product_identity(a, b, (5, 5)) == iterated_product(a, b, (5, 5))
            findings.append(Finding(
                id=f"product-identity-{k}", suite=SUITES[8], title="Product of chain factors",
                description=f"{k}-fold product matches its closed form", passed=ok,
                witness=None if ok else {"a": [str(x) for x in a], "b": [str(x) for x in b]},
            ))

        witness = None
        for k in range(-1, 5):
            gf = zeta_polynomial_gf(k, (2, 2))
            for M, N in ((1, 1), (1, 0), (2, 1)):
                if gf[M, N] != zeta_values(M, N, k):
                    witness = {"k": k, "M": M, "N": N, "series": str(gf[M, N])}
            if gf[1, 1] != Fraction(3 * k * k - k, 2):
                witness = {"k": k, "Z11": str(gf[1, 1])}
        findings.append(Finding(
            id="zeta-polynomial", suite=SUITES[8], title="Zeta polynomial generating function",
            description="Z(k) from 1/(1 - kx - ky + C(k+1,2)xy) matches ζ^k on the finite posets",
            passed=witness is None, witness=witness,
        ))
        return findings

    def check_language(self) -> list[Finding]:
        findings = []
        for s in range(min(4, self.max_sum) + 1):
            for m in range(s, -1, -1):
                n = s - m
                for k in range(1, 4):
                    report = verify_l_bijection(m, n, k)
                    findings.append(Finding(
                        id=f"language-W{m}{n}-k{k}", suite=SUITES[9], title="Word to multichain bijection",
                        description=f"Words with {m} a's and {n} b's of index <= {k} onto {k}-step multichains",
                        passed=report.ok, witness=None if report.ok else report.to_dict(),
                    ))
        multiset = {AlternatingLetter("a", 1): 2, AlternatingLetter("b", 1): 1, AlternatingLetter("b", 2): 1}
        words = set(l_words(multiset))
        named = {parse_alternating("b1 b2 a1 a1"), parse_alternating("b2 b1 a1 a1")}
        ok = product_rhs_coefficient(multiset) == 2 and words == named
        findings.append(Finding(
            id="language-coefficient", suite=SUITES[9], title="Language coefficient",
            description="Coefficient of a1^2 b1 b2 is 2, realised by b1 b2 a1 a1 and b2 b1 a1 a1", passed=ok,
        ))
        return findings

    # ---- runner ---------------------------------------------------------------

    def run_all(self, suites: Optional[list[int]] = None) -> tuple[pd.DataFrame, list[Finding]]:
        """
        Run the selected suites (all by default).

        Returns:
            (report DataFrame with one row per finding, findings)
        """
        runners: dict[int, Callable[[], list[Finding]]] = {
            1: self.check_counting,
            2: self.check_flag_symmetry,
            3: self.check_labeling,
            4: self.check_local_action,
            5: self.check_frobenius,
            6: self.check_generalized_flag,
            7: self.check_types,
            8: self.check_convolution,
            9: self.check_language,
        }
        findings: list[Finding] = []
        for number in suites or sorted(runners):
            if number not in runners:
                raise ValueError(f"Unknown suite {number}; choose from 1..{len(runners)}")
            batch = runners[number]()
            failed = sum(1 for f in batch if not f.passed)
            logger.info(f"Suite {number} ({SUITES[number]}): {len(batch)} checks, {failed} failed")
            findings.extend(batch)
        report = pd.DataFrame(
            [{"id": f.id, "suite": f.suite, "title": f.title, "passed": f.passed} for f in findings],
            columns=["id", "suite", "title", "passed"],
        )
        return report, findings

    @staticmethod
    def _compare(suite: int, tag: str, title: str, observed: dict, expected: dict) -> Finding:
        diff = {k: {"observed": observed[k], "expected": expected[k]} for k in expected if observed[k] != expected[k]}
        return Finding(
            id=f"{SUITES[suite]}-{tag}", suite=SUITES[suite], title=title,
            description=f"{tag}: " + ", ".join(f"{k}={expected[k]}" for k in expected),
            passed=not diff, witness=diff or None,
        )


def random_table(rng: random.Random, trunc: tuple[int, int]) -> MultiplicativeFunction:
    """Multiplicative function with f_00 = 1 and small random rational values."""
    values = {
        (i, j): Fraction(rng.randint(-3, 3), rng.randint(1, 3))
        for i in range(trunc[0] + 1) for j in range(trunc[1] + 1)
    }
    values[(0, 0)] = Fraction(1)
    return MultiplicativeFunction(values, trunc)


def _first_mismatch(direct: BivariateSeries, closed: BivariateSeries, bound: int) -> Optional[dict]:
    for i in range(bound + 1):
        for j in range(bound + 1 - i):
            if direct[i, j] != closed[i, j]:
                return {"i": i, "j": j, "direct": str(direct[i, j]), "closed": str(closed[i, j])}
    return None
