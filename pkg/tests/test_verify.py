"""
Tests for Verification Engine
"""
import pytest

from core.errors import SizeLimitExceeded
from core.schemas import RunLimits
from core.verify import SUITES, VerificationEngine


@pytest.fixture
def engine():
    """Engine sweeping M + N <= 3."""
    return VerificationEngine(max_sum=3)


def test_sizes(engine):
    """Sizes are listed by total, larger M first."""
    assert engine.sizes(1) == [(0, 0), (1, 0), (0, 1)]
    assert len(engine.sizes()) == 10


def test_poset_cache(engine):
    """Posets are built once per size."""
    assert engine.poset(2, 1) is engine.poset(2, 1)
    assert len(engine.poset(2, 1)) == 12


@pytest.mark.parametrize("suite", sorted(SUITES))
def test_each_suite_passes(engine, suite):
    """Every suite passes on the small posets."""
    report, findings = engine.run_all([suite])
    assert findings
    failed = [f.to_dict() for f in findings if not f.passed]
    assert failed == []
    assert report["passed"].all()
    assert set(report["suite"]) == {SUITES[suite]}


def test_run_all_report_columns():
    """The report has one row per finding."""
    report, findings = VerificationEngine(max_sum=2).run_all()
    assert list(report.columns) == ["id", "suite", "title", "passed"]
    assert len(report) == len(findings)
    assert set(report["suite"]) == set(SUITES.values())


def test_expected_label_census():
    """W_{1,1}: {a1, x1} on two chains, {x1, x1} on one."""
    census = VerificationEngine.expected_label_census(1, 1)
    assert sorted(census.values()) == [1, 2]
    assert sum(census.values()) == 3


def test_size_cap():
    """Sweeps beyond the rank cap are refused."""
    with pytest.raises(SizeLimitExceeded):
        VerificationEngine(max_sum=5, limits=RunLimits(max_rank=4))


def test_unknown_suite(engine):
    """Suite numbers outside the table are rejected."""
    with pytest.raises(ValueError):
        engine.run_all([len(SUITES) + 1])


@pytest.mark.slow
def test_full_sweep_at_default_bound():
    """Every suite passes for M + N <= 7, the command-line default."""
    report, findings = VerificationEngine(max_sum=7).run_all()
    failed = [f.to_dict() for f in findings if not f.passed]
    assert failed == []
    assert report["passed"].all()
    ids = set(report["id"])
    assert "flag-recurrence-posets" in ids
    assert "frobenius-C3111" in ids
    assert "convolution-associative-0" in ids


def test_chain_shapes_cover_all_partitions(engine):
    """Product-of-chains shapes are every partition up to the bound."""
    assert engine._chain_shapes(6) == [(1,), (2,), (1, 1), (3,), (2, 1), (1, 1, 1)]
