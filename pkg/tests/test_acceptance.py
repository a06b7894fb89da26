"""Release gate: every stock check on the bundled dataset, one line each.

Check 2 compares mean price impact against external reference levels and
is dataset dependent; it reports as xfail when the bands are missed so
the qualitative gates stay strict while the divergence stays visible.
"""

import pytest

from swapcost.checks import format_check, run_all_checks


@pytest.fixture(scope="module")
def results():
    return {result.number: result for result in run_all_checks()}


def _gate(results, number):
    result = results[number]
    print(format_check(result))
    if not result.hard and not result.passed:
        pytest.xfail(f"soft, dataset-dependent: {result.detail}")
    assert result.passed, result.detail


def test_fee_columns_exact_and_fast(results):
    _gate(results, 1)


def test_mean_impact_near_reference_levels(results):
    _gate(results, 2)


def test_routed_setup_cheaper_at_bracket_volumes(results):
    _gate(results, 3)


def test_routed_setup_dominates_at_high_gas(results):
    _gate(results, 4)


def test_router_prefers_concentrated_pools(results):
    _gate(results, 5)


def test_solver_invariants_hold(results):
    _gate(results, 6)


def test_backtest_is_deterministic(results):
    _gate(results, 7)
