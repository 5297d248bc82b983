import pytest

from vertisplit.core.errors import ConfigError
from vertisplit.core.fixtures import two_block_fixture
from vertisplit.core.validation import (
    SLOW_SUITES,
    SUITES,
    ValidationContext,
    check_dirichlet,
    check_icor_bounds,
    enumerate_equal_splits,
    expand_suites,
    run_suites,
)


def test_expand_all_and_quick():
    assert expand_suites(["all"]) == list(SUITES)
    quick = expand_suites(["quick"])
    assert not set(quick) & set(SLOW_SUITES)
    assert expand_suites(["shapley", "shapley", "mean-alpha"]) == ["shapley", "mean-alpha"]


def test_unknown_suite():
    with pytest.raises(ConfigError, match="inconnue"):
        expand_suites(["nope"])


def test_enumeration_landscape_of_block_fixture():
    landscape = enumerate_equal_splits(two_block_fixture(2))
    assert len(landscape) == 6
    values = sorted(v for _, v in landscape)
    assert values[0] == pytest.approx(-1.0)
    assert values[-1] == pytest.approx(0.0, abs=1e-9)


def test_analytic_suites_pass():
    seen = []
    results = run_suites(["pcor-mcor", "perfect-corr", "mean-alpha", "shapley"], on_result=seen.append)
    assert [r.name for r in results] == ["pcor-mcor", "perfect-corr", "mean-alpha", "shapley"]
    assert seen == results
    assert all(r.passed for r in results), [r.to_dict() for r in results if not r.passed]


def test_icor_bounds_suite(small_brkga):
    result = check_icor_bounds(ValidationContext(brkga=small_brkga, threads=1), sizes=(2, 3))
    assert result.passed, result.details
    assert result.details["m=3"]["splits"] == 20


def test_dirichlet_suite():
    result = check_dirichlet(ValidationContext(), seeds=200)
    assert result.passed, result.details


def test_range_and_exchange_suites():
    results = run_suites(["pcor-range", "exchange"])
    assert all(r.passed for r in results), [r.details for r in results]


@pytest.mark.slow
def test_truncation_suite():
    (result,) = run_suites(["truncation"])
    assert result.passed, result.details
