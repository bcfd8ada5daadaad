"""
Export Engine for SHUFFLE_POSETS
Deterministic JSON, text, CSV and DOT renderings of posets, chains, orbits and series.
"""
import io
import json
from fractions import Fraction
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import pandas as pd

from core.algebra.series import BivariateSeries, ShuffleType
from core.algebra.symfunc import SymPoly, is_symmetric, to_L_basis
from core.poset import RankedPoset
from core.schemas import FindingRecord, OrbitRecord
from core.shuffles.action import LocalAction, OrbitDecomposition, orbit_report
from core.shuffles.labeling import ChainLabeling, LabelSequence
from core.shuffles.words import ShuffleWord


def rational(q) -> str:
    """Exact 'p/q' text; integers print without a denominator."""
    return str(Fraction(q))


def _plain(value: Any) -> Any:
    """Turn numpy scalars, Fractions, words and tuples into JSON-ready values."""
    if isinstance(value, Fraction):
        return rational(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, ShuffleWord):
        return value.tokens()
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    return value


class ExportEngine:
    """Renders computation results; output is byte-identical for identical inputs."""

    def __init__(self, indent: int = 2):
        """
        Initialize export engine.

        Args:
            indent: JSON indentation
        """
        self.indent = indent

    # ---- serialization -----------------------------------------------------

    def to_json(self, payload: Any) -> str:
        return json.dumps(_plain(payload), indent=self.indent, sort_keys=True, ensure_ascii=False) + "\n"

    def to_text(self, df: pd.DataFrame) -> str:
        if df.empty:
            return "(empty)\n"
        return df.map(lambda v: _text_cell(v)).to_string(index=False) + "\n"

    def export_to_csv(self, df: pd.DataFrame) -> bytes:
        """
        Export a result table to CSV.

        Args:
            df: table from one of the engines

        Returns:
            CSV file as bytes
        """
        output = io.StringIO()
        df.map(lambda v: _text_cell(v)).to_csv(output, index=False)
        return output.getvalue().encode("utf-8")

    # ---- domain values -----------------------------------------------------

    @staticmethod
    def word(w: ShuffleWord) -> list[str]:
        return w.tokens()

    @staticmethod
    def labels(sequence: LabelSequence) -> list[str]:
        return sequence.tokens()

    @staticmethod
    def partition(lam: Sequence[int]) -> list[int]:
        return sorted((int(p) for p in lam), reverse=True)

    def sympoly(self, F: SymPoly, basis: str = "M") -> dict:
        """
        Coefficients of F in the monomial quasisymmetric ('M'), fundamental ('L')
        or monomial symmetric ('m') basis.

        Raises:
            ValueError: for an unknown basis, or basis 'm' with a non-symmetric F
        """
        if basis == "M":
            terms = {",".join(map(str, alpha)): rational(c) for alpha, c in F.items()}
        elif basis == "L":
            terms = {
                "{" + ",".join(map(str, sorted(S))) + "}": rational(c)
                for S, c in sorted(to_L_basis(F).items(), key=lambda t: (len(t[0]), sorted(t[0])))
            }
        elif basis == "m":
            check = is_symmetric(F)
            if not check:
                raise ValueError(f"Not symmetric, no m-basis expansion: {check.witness}")
            terms = {",".join(map(str, lam)): rational(c) for lam, c in check.coefficients.items() if c}
        else:
            raise ValueError(f"Unknown basis {basis!r}; use 'M', 'L' or 'm'")
        return {"basis": basis, "degree": F.degree, "terms": terms}

    @staticmethod
    def series(F: BivariateSeries) -> list[list[str]]:
        """Coefficient grid, row i holding the coefficients of x^i y^0, x^i y^1, ..."""
        return [[rational(c) for c in row] for row in F.to_grid()]

    def series_text(self, F: BivariateSeries) -> str:
        grid = pd.DataFrame(self.series(F))
        grid.index.name = "i\\j"
        return grid.to_string() + "\n"

    @staticmethod
    def shuffle_type(t: ShuffleType) -> dict:
        return t.to_dict()

    # ---- composite reports -------------------------------------------------

    @staticmethod
    def poset_summary(P: RankedPoset) -> dict:
        return {
            "name": P.name,
            "elements": len(P),
            "rank": P.n,
            "rank_sizes": [len(layer) for layer in P.layers],
            "covers": sum(len(c) for c in P.covers_up),
        }

    @staticmethod
    def flag_records(P: RankedPoset) -> list[dict]:
        return [
            {"S": row.S, "size": int(row.size), "alpha": int(row.alpha), "beta": int(row.beta)}
            for row in P.flag_table().itertuples(index=False)
        ]

    @staticmethod
    def chains(labeling: ChainLabeling, limit: Optional[int] = None) -> list[dict]:
        """Maximal chains with their labels in enumeration order."""
        P = labeling.poset
        out = []
        for chain, labels in labeling.enumerate_labeled_chains():
            if limit is not None and len(out) >= limit:
                break
            out.append({
                "chain": [_plain(P.elements[i]) for i in chain],
                "labels": [str(c) for c in labels],
            })
        return out

    @staticmethod
    def orbits(action: LocalAction, decomposition: Optional[OrbitDecomposition] = None) -> list[dict]:
        """Orbit rows validated through OrbitRecord."""
        report = orbit_report(action, decomposition)
        return [OrbitRecord(**_plain(row)).model_dump() for row in report.to_dict(orient="records")]

    @staticmethod
    def findings(findings: Iterable) -> list[dict]:
        return [FindingRecord(**_plain(f.to_dict())).model_dump() for f in findings]

    @staticmethod
    def to_dot(P: RankedPoset) -> str:
        return P.to_dot(render=lambda p: (" ".join(p.tokens()) or "∅") if isinstance(p, ShuffleWord) else str(p))


def _text_cell(value: Any) -> Any:
    plain = _plain(value)
    if isinstance(plain, list):
        return " ".join(map(str, plain)) if plain else "-"
    return plain
