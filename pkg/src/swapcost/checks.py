"""Runnable consistency checks over the whole engine.

Each check reproduces one headline property of the default experiment:
exact fee columns, impact levels against the reference breakdown,
cost orderings, the gas crossover, router selection, solver math, and
bit-level determinism. The same implementations back both the test
suite and the ``check`` CLI subcommand.

Check 2 compares mean price impact against reference values recorded
for an undistributed market dataset; its bands depend on the fixings
used, so it is tagged soft and does not gate the CLI exit status.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path
from tempfile import TemporaryDirectory

import numpy as np

from .amm import (
    CryptoswapParams,
    Pool,
    Reserves,
    clmm_price_impact,
    cryptoswap_solve_d,
    stableswap_solve_d,
    swap_exact_out,
)
from .amm import _cached_d
from .backtest import (
    BacktestReport,
    default_config,
    run_backtest,
    sweep_config,
    sweep_gas_volume,
    write_report_csv,
)

__all__ = ["CheckResult", "run_all_checks", "format_check", "HARD_CHECKS", "SOFT_CHECKS"]


@dataclass(frozen=True)
class CheckResult:
    number: int
    name: str
    passed: bool
    hard: bool
    detail: str
    duration_s: float


HARD_CHECKS = (1, 3, 4, 5, 6, 7)
SOFT_CHECKS = (2,)

# reference mean price-impact costs (EUR) from the published breakdown
# the small/medium/large experiment is compared against
_IMPACT_REFERENCE = {
    "l1-mariana": {1e4: 0.01, 1e5: 1.08, 1e6: 10271.42},
    "l2l3-exchange": {1e4: 0.02, 1e5: 15.33, 1e6: 5345.04},
}
_IMPACT_BAND = 0.30


def _default_report(fx_path) -> tuple[BacktestReport, float]:
    _cached_d.cache_clear()
    start = time.perf_counter()
    report = run_backtest(default_config(fx_path))
    return report, time.perf_counter() - start


def check_exact_fee_columns(fx_path=None) -> CheckResult:
    """1: gas and swap-fee aggregate columns are exact; run completes within 1 s."""
    start = time.perf_counter()
    report, runtime = _default_report(fx_path)
    problems = []
    expected_fee = {1e4: 1.0, 1e5: 10.0, 1e6: 100.0}
    for agg in report.aggregates:
        want_gas = 15.0 if agg.scenario == "l1-mariana" else 0.3
        if agg.gas_eur != want_gas:
            problems.append(f"{agg.scenario}@{agg.volume_eur:g}: gas {agg.gas_eur!r} != {want_gas}")
        if agg.lp_fee_eur != expected_fee[agg.volume_eur]:
            problems.append(
                f"{agg.scenario}@{agg.volume_eur:g}: fee {agg.lp_fee_eur!r}"
                f" != {expected_fee[agg.volume_eur]}"
            )
    if len(report.aggregates) != 6:
        problems.append(f"expected 6 aggregate rows, got {len(report.aggregates)}")
    if runtime >= 1.0:
        problems.append(f"runtime {runtime:.2f}s >= 1s")
    detail = "; ".join(problems) if problems else (
        f"gas 15.0/0.3 and swap fees 1/10/100 EUR exact, runtime {runtime:.2f}s"
    )
    return CheckResult(1, "exact fee columns", not problems, True,
                       detail, time.perf_counter() - start)


def check_impact_bands(fx_path=None) -> CheckResult:
    """2 (soft): mean price impact within 30% of the reference breakdown."""
    start = time.perf_counter()
    report, runtime = _default_report(fx_path)
    problems = []
    readings = []
    for agg in report.aggregates:
        ref = _IMPACT_REFERENCE[agg.scenario][agg.volume_eur]
        lo, hi = ref * (1 - _IMPACT_BAND), ref * (1 + _IMPACT_BAND)
        readings.append(f"{agg.scenario}@{agg.volume_eur:g}: {agg.impact_eur:.2f} (ref {ref})")
        if not (lo <= agg.impact_eur <= hi):
            problems.append(
                f"{agg.scenario}@{agg.volume_eur:g}: impact {agg.impact_eur:.2f}"
                f" outside [{lo:.2f}, {hi:.2f}]"
            )
    if runtime >= 30.0:
        problems.append(f"runtime {runtime:.2f}s >= 30s")
    detail = "; ".join(problems) if problems else "; ".join(readings)
    return CheckResult(2, "price-impact bands", not problems, False,
                       detail, time.perf_counter() - start)


def check_outperformance(fx_path=None) -> CheckResult:
    """3: routed system strictly cheaper on average at 10k and 1mn EUR."""
    start = time.perf_counter()
    report, _ = _default_report(fx_path)
    totals = {(a.scenario, a.volume_eur): a.total_eur for a in report.aggregates}
    problems = []
    readings = []
    for volume in (1e4, 1e6):
        single = totals[("l1-mariana", volume)]
        routed = totals[("l2l3-exchange", volume)]
        readings.append(f"@{volume:g}: {routed:.2f} < {single:.2f}")
        if not routed < single:
            problems.append(f"@{volume:g}: routed {routed:.2f} !< single-pool {single:.2f}")
    detail = "; ".join(problems) if problems else "; ".join(readings)
    return CheckResult(3, "outperformance at 10k and 1mn", not problems, True,
                       detail, time.perf_counter() - start)


def check_gas_crossover(fx_path=None) -> CheckResult:
    """4: at 800 EUR gas the routed system is never costlier, any volume in [1, 1e6]."""
    start = time.perf_counter()
    grid = sweep_gas_volume(sweep_config(fx_path, gas_levels_eur=(800.0,)))
    runtime = time.perf_counter() - start
    worst = min(grid.diff_eur[0])
    problems = []
    if worst < 0.0:
        vi = grid.diff_eur[0].index(worst)
        problems.append(f"negative difference {worst:.4f} at volume {grid.volumes_eur[vi]:g}")
    if runtime >= 60.0:
        problems.append(f"runtime {runtime:.2f}s >= 60s")
    detail = "; ".join(problems) if problems else (
        f"min difference {worst:.2f} EUR >= 0 across {len(grid.volumes_eur)} volumes,"
        f" runtime {runtime:.2f}s"
    )
    return CheckResult(4, "gas crossover at 800 EUR", not problems, True,
                       detail, time.perf_counter() - start)


def check_router_selection(fx_path=None) -> CheckResult:
    """5: the routed 3-token pool is never chosen; concentrated venue wins >90% at 1mn."""
    start = time.perf_counter()
    report, _ = _default_report(fx_path)
    routed_rows = [r for r in report.rows if r.scenario == "l2l3-exchange"]
    three_token = [r for r in routed_rows if r.venue == "op1"]
    large = [r for r in routed_rows if r.volume_eur == 1e6]
    clmm_share = sum(1 for r in large if r.venue == "op3") / len(large) if large else 0.0
    problems = []
    if three_token:
        problems.append(f"3-token routed pool chosen {len(three_token)} times")
    if clmm_share <= 0.90:
        problems.append(f"concentrated venue share {clmm_share:.1%} <= 90% at 1mn")
    detail = "; ".join(problems) if problems else (
        f"3-token routed pool chosen 0 times; concentrated venue share {clmm_share:.1%} at 1mn"
    )
    return CheckResult(5, "router selection pattern", not problems, True,
                       detail, time.perf_counter() - start)


def _oracle_d(amounts, amplification, gamma) -> float:
    # textbook-form residual bisected to float resolution; written without
    # the library's grouped form so it is an independent witness
    n = len(amounts)
    s = sum(amounts)
    p = math.prod(amounts)

    def residual(d):
        k0 = p * float(n) ** n / d**n
        k = amplification * k0 * gamma**2 / (gamma + 1.0 - k0) ** 2
        return k * d ** (n - 1) * s + p - (k * d**n + (d / n) ** n)

    lo, hi = max(amounts), n * s
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if residual(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _check_balanced(problems: list[str]) -> None:
    for x in (1.0, 1e3, 1e8):
        for n in (2, 3):
            d = cryptoswap_solve_d((x,) * n, 50.0, 1e-8)
            if abs(d - n * x) > 1e-10:
                problems.append(f"balanced dampened D({x:g}x{n}) off by {d - n * x:.3e}")
            ds = stableswap_solve_d((x,) * n, 50.0)
            if abs(ds - n * x) > 1e-10:
                problems.append(f"balanced amplified D({x:g}x{n}) off by {ds - n * x:.3e}")


def _check_oracle_agreement(problems: list[str]) -> None:
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 4))
        base = 10.0 ** rng.uniform(3, 8)
        amounts = tuple(base * rng.uniform(0.5, 2.0) for _ in range(n))
        amplification = float(rng.uniform(10.0, 200.0))
        gamma = 10.0 ** rng.uniform(-9, -4)
        d = cryptoswap_solve_d(amounts, amplification, gamma)
        oracle = _oracle_d(amounts, amplification, gamma)
        worst = max(worst, abs(d - oracle) / oracle)
    if worst > 1e-8:
        problems.append(f"solver vs bisection oracle relative gap {worst:.3e} > 1e-8")


def _check_homogeneity(problems: list[str]) -> None:
    amounts = (2.5e7, 2.6e7, 2.4e7)
    d = cryptoswap_solve_d(amounts, 50.0, 1e-8)
    pool = Pool("h", CryptoswapParams(50.0, 1e-8),
                Reserves(("CHF", "EUR", "SGD"), amounts), 1e-4, 2.5e7, (1.0, 1.0, 1.0))
    quote = swap_exact_out(pool, "CHF", "EUR", 1e5, 1.04)
    for c in (1e-3, 7.0, 1e4):
        scaled = tuple(c * a for a in amounts)
        dc = cryptoswap_solve_d(scaled, 50.0, 1e-8)
        if abs(dc - c * d) > 1e-9 * abs(c * d):
            problems.append(f"D homogeneity broken at c={c:g}: {dc!r} vs {c * d!r}")
        pool_c = Pool("h", CryptoswapParams(50.0, 1e-8),
                      Reserves(("CHF", "EUR", "SGD"), scaled), 1e-4, 2.5e7 * c,
                      (1.0, 1.0, 1.0))
        quote_c = swap_exact_out(pool_c, "CHF", "EUR", c * 1e5, 1.04)
        if abs(quote_c.input_amount - c * quote.input_amount) > 1e-9 * c * quote.input_amount:
            problems.append(
                f"input homogeneity broken at c={c:g}:"
                f" {quote_c.input_amount!r} vs {c * quote.input_amount!r}"
            )


def _check_round_trip(problems: list[str]) -> None:
    amounts = (1.2e7, 0.9e7)
    pool = Pool("r", CryptoswapParams(50.0, 1e-8),
                Reserves(("CHF", "EUR"), amounts), 1e-4, 1.2e7, (1.0, 0.75))
    out = swap_exact_out(pool, "CHF", "EUR", 3e5, 0.75)
    pool_after = Pool("r", CryptoswapParams(50.0, 1e-8), out.reserves_after,
                      1e-4, 1.2e7, (1.0, 0.75))
    back = swap_exact_out(pool_after, "EUR", "CHF", out.input_amount, 1 / 0.75)
    for before, after in zip(amounts, back.reserves_after.amounts):
        if abs(after - before) > 1e-8 * before:
            problems.append(f"round trip drifted {before!r} -> {after!r}")


def _check_clmm(problems: list[str]) -> None:
    base = clmm_price_impact(1e4, 8.3e6, 1.05, 1.05, 1.2)
    if clmm_price_impact(2e4, 8.3e6, 1.05, 1.05, 1.2) != 2.0 * base:
        problems.append("doubling the output does not exactly double the impact fraction")
    for factor in (3.0, 17.5, 500.0):
        scaled = clmm_price_impact(factor * 1e4, 8.3e6, 1.05, 1.05, 1.2)
        if abs(scaled - factor * base) > 1e-12 * scaled:
            problems.append(f"linearity broken at factor {factor:g}")
    if clmm_price_impact(1e4, 8.3e6, 1.05, 1.05, 1.0) != 0.0:
        problems.append("impact not exactly zero at unit range width")
    previous = base
    for width in (1.1, 1.01, 1.001, 1.000001):
        value = clmm_price_impact(1e4, 8.3e6, 1.05, 1.05, width)
        if not 0.0 <= value < previous:
            problems.append(f"impact not shrinking toward zero at width {width}")
        previous = value
    if previous > 1e-9:
        problems.append(f"impact {previous:.3e} too large near unit width")


def check_solver_properties(fx_path=None) -> CheckResult:
    """6: invariant math holds without any dataset."""
    start = time.perf_counter()
    problems: list[str] = []
    _check_balanced(problems)
    _check_oracle_agreement(problems)
    _check_homogeneity(problems)
    _check_round_trip(problems)
    _check_clmm(problems)
    detail = "; ".join(problems) if problems else (
        "balanced identity, 1000-state oracle agreement, homogeneity,"
        " round trip, closed-form linearity all hold"
    )
    return CheckResult(6, "solver properties", not problems, True,
                       detail, time.perf_counter() - start)


def check_determinism(fx_path=None) -> CheckResult:
    """7: two consecutive default runs write bit-identical report files."""
    start = time.perf_counter()
    with TemporaryDirectory() as tmp:
        first = Path(tmp) / "first.csv"
        second = Path(tmp) / "second.csv"
        write_report_csv(run_backtest(default_config(fx_path)), first)
        _cached_d.cache_clear()
        write_report_csv(run_backtest(default_config(fx_path)), second)
        identical = first.read_bytes() == second.read_bytes()
        size = first.stat().st_size
    detail = (
        f"two runs, {size} bytes each, bit-identical" if identical
        else "consecutive runs differ"
    )
    return CheckResult(7, "bit-identical reruns", identical, True,
                       detail, time.perf_counter() - start)


_ALL_CHECKS = (
    check_exact_fee_columns,
    check_impact_bands,
    check_outperformance,
    check_gas_crossover,
    check_router_selection,
    check_solver_properties,
    check_determinism,
)


def run_all_checks(fx_path=None) -> list[CheckResult]:
    return [check(fx_path) for check in _ALL_CHECKS]


def format_check(result: CheckResult) -> str:
    verdict = "PASS" if result.passed else "FAIL"
    tag = "" if result.hard else " [soft]"
    return (
        f"{verdict}  check {result.number}: {result.name}{tag}"
        f" ({result.duration_s:.2f}s) - {result.detail}"
    )
