"""
Tests for Export Engine
"""
from fractions import Fraction

import pandas as pd
import pytest

from core.algebra.symfunc import flag_qsym, monomial_qsym
from core.algebra.series import type_of, zeta_polynomial_gf
from core.export import ExportEngine, rational
from core.schemas import ShuffleContext
from core.shuffles.action import LocalAction
from core.shuffles.labeling import ShuffleLabeling
from core.shuffles.words import parse_word, shuffle_poset
from core.verify import VerificationEngine


@pytest.fixture
def exporter():
    """Default export engine."""
    return ExportEngine()


@pytest.fixture
def w21():
    """W_{2,1}."""
    return shuffle_poset(ShuffleContext(lower_size=2, upper_size=1))


def test_rational():
    """Integers print bare, other rationals as p/q."""
    assert rational(3) == "3"
    assert rational(Fraction(-1, 2)) == "-1/2"
    assert rational(Fraction(4, 2)) == "2"


def test_to_json_is_sorted(exporter):
    """Keys are sorted and rationals become strings."""
    text = exporter.to_json({"b": 1, "a": Fraction(1, 2), "w": parse_word("x1 a1")})
    assert text == '{\n  "a": "1/2",\n  "b": 1,\n  "w": [\n    "x1",\n    "a1"\n  ]\n}\n'
    assert exporter.to_json({"b": 1, "a": 2}) == exporter.to_json({"a": 2, "b": 1})


def test_sympoly_bases(exporter, w21):
    """Flag function of W_{2,1} in the three bases."""
    F = flag_qsym(w21)
    assert exporter.sympoly(F, "m")["terms"] == {"3": "1", "2,1": "5", "1,1,1": "12"}
    assert exporter.sympoly(F, "M")["terms"]["1,2"] == "5"
    assert exporter.sympoly(F, "L")["terms"] == {"{}": "1", "{1}": "4", "{2}": "4", "{1,2}": "3"}
    assert exporter.sympoly(F)["degree"] == 3


def test_sympoly_rejects(exporter):
    """Unknown bases and non-symmetric m-expansions fail."""
    with pytest.raises(ValueError):
        exporter.sympoly(monomial_qsym((1, 2)), "m")
    with pytest.raises(ValueError):
        exporter.sympoly(monomial_qsym((1, 2)), "h")


def test_series_grid(exporter):
    """Rows are powers of x."""
    assert exporter.series(zeta_polynomial_gf(2, (1, 1))) == [["1", "2"], ["2", "5"]]
    assert "5" in exporter.series_text(zeta_polynomial_gf(2, (1, 1)))


def test_poset_summary(exporter, w21):
    """Name, size, rank and rank sizes."""
    summary = exporter.poset_summary(w21)
    assert summary["name"] == "W_2,1"
    assert summary["elements"] == 12
    assert summary["rank"] == 3
    assert summary["rank_sizes"] == [1, 5, 5, 1]
    assert summary["covers"] == sum(len(c) for c in w21.covers_up)


def test_flag_records(exporter, w21):
    """One record per rank set."""
    records = exporter.flag_records(w21)
    assert len(records) == 4
    assert {"S": "{1,2}", "size": 2, "alpha": 12, "beta": 3} in records


def test_chains(exporter, w21):
    """Chains come with their label tokens."""
    rows = exporter.chains(ShuffleLabeling(w21))
    assert len(rows) == 12
    assert all(len(r["labels"]) == 3 for r in rows)
    assert len(exporter.chains(ShuffleLabeling(w21), limit=2)) == 2


def test_orbits(exporter, w21):
    """Orbit rows pass through the record schema."""
    rows = exporter.orbits(LocalAction(w21, ShuffleLabeling(w21)))
    assert sorted(r["size"] for r in rows) == [3, 3, 6]
    assert all(set(r) == {"size", "type", "multiset", "shape", "representative"} for r in rows)


def test_findings(exporter):
    """Findings serialize through the record schema."""
    _, findings = VerificationEngine(max_sum=1).run_all([1])
    records = exporter.findings(findings)
    assert len(records) == 3
    assert all(r["passed"] for r in records)


def test_dot_marks_empty_word(exporter):
    """The empty word is drawn as ∅."""
    dot = exporter.to_dot(shuffle_poset(ShuffleContext(lower_size=1, upper_size=1)))
    assert "∅" in dot
    assert "x1 a1" in dot


def test_csv_and_text(exporter):
    """Lists are space joined, rationals exact."""
    df = pd.DataFrame({"x": [[1, 2]], "y": [Fraction(1, 3)]})
    assert exporter.export_to_csv(df) == b"x,y\n1 2,1/3\n"
    assert exporter.to_text(pd.DataFrame()) == "(empty)\n"
    assert "1/3" in exporter.to_text(df)


def test_shuffle_type(exporter):
    """Types serialize with their derived counts."""
    ctx = ShuffleContext(lower_size=1, upper_size=1)
    record = exporter.shuffle_type(type_of(parse_word("x1 a1"), ctx))
    assert (record["M"], record["N"]) == (1, 1)
    assert record["epsilon"] in (-1, 0, 1)
