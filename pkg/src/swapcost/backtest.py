"""Day-by-day simulation, aggregation, and parameter sweeps.

The driver replays a daily fixing series: each day every scenario's
pools are re-seeded at that day's rates, one exact-output EUR purchase
paid in CHF is quoted per trade volume, routed to the cheapest venue,
and costed. Aggregates are arithmetic means per scenario and volume.
Sweeps compare the first configured scenario against the second on a
gas-by-volume grid of mean total-cost differences.
"""

from __future__ import annotations

import datetime
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .costs import GasModel
from .errors import EmptyReport, SwapCostError
from .marketdata import FxDay, ScenarioSpec, load_fx_csv, scenario_preset, venues_for_day
from .routing import TradeRequest, quote_and_route

__all__ = [
    "BacktestConfig",
    "ReportRow",
    "ErrorRow",
    "AggregateRow",
    "BacktestReport",
    "SweepGrid",
    "default_config",
    "sweep_config",
    "run_backtest",
    "aggregate_table",
    "write_report_csv",
    "write_aggregate_csv",
    "sweep_gas_volume",
    "sweep_tvl",
    "write_sweep_csv",
    "REPORT_HEADER",
    "AGGREGATE_HEADER",
    "SWEEP_HEADER",
    "DEFAULT_VOLUMES_EUR",
    "SWEEP_VOLUMES_EUR",
    "SWEEP_GAS_EUR",
]

DEFAULT_VOLUMES_EUR = (1e4, 1e5, 1e6)

# sweep resolution: 30 log-spaced volumes spanning 1 EUR to 1mn EUR,
# 20 log-spaced gas levels spanning 1 EUR to 1000 EUR
SWEEP_VOLUMES_EUR = tuple(float(v) for v in np.geomspace(1.0, 1e6, 30))
SWEEP_GAS_EUR = tuple(float(g) for g in np.geomspace(1.0, 1e3, 20))

REPORT_HEADER = "date,scenario,volume_eur,venue,pool,gas_eur,lp_fee_eur,impact_eur,total_eur"
AGGREGATE_HEADER = (
    "scenario,volume_eur,days,gas_eur,lp_fee_eur,impact_eur,total_eur,"
    "gas_bps,lp_fee_bps,impact_bps,total_bps"
)
SWEEP_HEADER = "gas_eur,volume_eur,tvl_chf,diff_eur,diff_pct"


def _positive_grid(values, label: str) -> tuple[float, ...]:
    grid = tuple(float(v) for v in values)
    if not grid:
        raise ValueError(f"{label} grid is empty")
    for v in grid:
        if not (math.isfinite(v) and v > 0.0):
            raise ValueError(f"{label} grid has non-positive entry {v!r}")
    return grid


@dataclass(frozen=True)
class BacktestConfig:
    """Inputs of one simulation run.

    ``run_backtest`` uses the first gas and liquidity levels; sweeps use
    the full grids. The trade is always an exact-output purchase of
    ``receive`` paid in ``pay``.
    """

    fx_path: str | Path
    scenarios: tuple[ScenarioSpec, ...]
    volumes_eur: tuple[float, ...] = DEFAULT_VOLUMES_EUR
    gas_levels_eur: tuple[float, ...] = (15.0,)
    tvl_levels_chf: tuple[float, ...] = (100e6,)
    l2_gas_divisor: float = 50.0
    pay: str = "CHF"
    receive: str = "EUR"

    def __post_init__(self) -> None:
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "volumes_eur", _positive_grid(self.volumes_eur, "volume"))
        object.__setattr__(self, "tvl_levels_chf", _positive_grid(self.tvl_levels_chf, "liquidity"))
        gas = tuple(float(g) for g in self.gas_levels_eur)
        if not gas:
            raise ValueError("gas grid is empty")
        for g in gas:
            if not (math.isfinite(g) and g >= 0.0):
                raise ValueError(f"gas grid has negative entry {g!r}")
        object.__setattr__(self, "gas_levels_eur", gas)
        if self.pay == self.receive:
            raise ValueError("pay and receive currency must differ")
        names = [s.name for s in self.scenarios]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate scenario names in {names}")


def default_config(fx_path: str | Path | None = None, **overrides) -> BacktestConfig:
    """Both preset scenarios on the bundled sample data, stock volume tiers."""
    from .marketdata import sample_fx_path

    overrides.setdefault(
        "scenarios",
        (scenario_preset("l1-mariana"), scenario_preset("l2l3-exchange")),
    )
    return BacktestConfig(
        fx_path=fx_path if fx_path is not None else sample_fx_path(),
        **overrides,
    )


def sweep_config(fx_path: str | Path | None = None, **overrides) -> BacktestConfig:
    """Default config with the sweep-resolution volume and gas grids."""
    overrides.setdefault("volumes_eur", SWEEP_VOLUMES_EUR)
    overrides.setdefault("gas_levels_eur", SWEEP_GAS_EUR)
    return default_config(fx_path, **overrides)


@dataclass(frozen=True)
class ReportRow:
    date: datetime.date
    scenario: str
    volume_eur: float
    venue: str
    pool: str
    gas_eur: float
    lp_fee_eur: float
    impact_eur: float
    total_eur: float


@dataclass(frozen=True)
class ErrorRow:
    date: datetime.date
    scenario: str
    volume_eur: float
    reason: str


@dataclass(frozen=True)
class AggregateRow:
    """Arithmetic means over included days, in EUR and basis points of volume."""

    scenario: str
    volume_eur: float
    days: int
    gas_eur: float
    lp_fee_eur: float
    impact_eur: float
    total_eur: float
    gas_bps: float
    lp_fee_bps: float
    impact_bps: float
    total_bps: float


@dataclass(frozen=True)
class BacktestReport:
    rows: tuple[ReportRow, ...]
    aggregates: tuple[AggregateRow, ...]
    errors: tuple[ErrorRow, ...]


def _mean(values: list[float]) -> float:
    # fsum keeps constant columns exact: the mean of n identical floats
    # comes back as that float
    return math.fsum(values) / len(values)


def _trade_terms(day: FxDay, cfg: BacktestConfig, volume_eur: float) -> TradeRequest:
    rates = day.rates()
    receive_to_eur = rates["EUR"] / rates[cfg.receive]
    return TradeRequest(
        pay=cfg.pay,
        receive=cfg.receive,
        amount_out=volume_eur / receive_to_eur,
        spot_rate=day.pair_rate(cfg.pay, cfg.receive),
        receive_to_eur=receive_to_eur,
    )


def _aggregate(
    rows: list[ReportRow],
    excluded: set[tuple[datetime.date, float]],
    scenario_order: list[str],
) -> tuple[AggregateRow, ...]:
    grouped: dict[tuple[str, float], list[ReportRow]] = {}
    volumes: list[float] = []
    for row in rows:
        if (row.date, row.volume_eur) in excluded:
            continue
        grouped.setdefault((row.scenario, row.volume_eur), []).append(row)
        if row.volume_eur not in volumes:
            volumes.append(row.volume_eur)
    volumes.sort()
    aggregates = []
    for scenario in scenario_order:
        for volume in volumes:
            sub = grouped.get((scenario, volume))
            if not sub:
                continue
            gas = _mean([r.gas_eur for r in sub])
            fee = _mean([r.lp_fee_eur for r in sub])
            impact = _mean([r.impact_eur for r in sub])
            total = _mean([r.total_eur for r in sub])
            scale = 1e4 / volume
            aggregates.append(
                AggregateRow(
                    scenario=scenario,
                    volume_eur=volume,
                    days=len(sub),
                    gas_eur=gas,
                    lp_fee_eur=fee,
                    impact_eur=impact,
                    total_eur=total,
                    gas_bps=gas * scale,
                    lp_fee_bps=fee * scale,
                    impact_bps=impact * scale,
                    total_bps=total * scale,
                )
            )
    return tuple(aggregates)


def run_backtest(cfg: BacktestConfig) -> BacktestReport:
    """Replay every fixing day at the first gas and liquidity level.

    A failing (day, volume) combination is recorded as an error row and
    that combination is left out of every scenario's aggregate, keeping
    the means comparable across scenarios.
    """
    if not cfg.scenarios:
        return BacktestReport(rows=(), aggregates=(), errors=())
    fx = load_fx_csv(cfg.fx_path)
    gas_model = GasModel(cfg.gas_levels_eur[0], cfg.l2_gas_divisor)
    tvl = cfg.tvl_levels_chf[0]
    rows: list[ReportRow] = []
    errors: list[ErrorRow] = []
    excluded: set[tuple[datetime.date, float]] = set()
    for day in fx:
        for scenario in cfg.scenarios:
            venues = venues_for_day(scenario, day, tvl)
            for volume in cfg.volumes_eur:
                request = _trade_terms(day, cfg, volume)
                try:
                    decision = quote_and_route(venues, request, gas_model)
                except SwapCostError as exc:
                    errors.append(ErrorRow(day.date, scenario.name, volume, str(exc)))
                    excluded.add((day.date, volume))
                    continue
                chosen = decision.chosen
                rows.append(
                    ReportRow(
                        date=day.date,
                        scenario=scenario.name,
                        volume_eur=volume,
                        venue=chosen.venue_id,
                        pool=chosen.pool_id,
                        gas_eur=chosen.costs.gas_eur,
                        lp_fee_eur=chosen.costs.lp_fee_eur,
                        impact_eur=chosen.costs.impact_eur,
                        total_eur=chosen.costs.total_eur,
                    )
                )
    rows.sort(key=lambda r: (r.date, r.scenario, r.volume_eur))
    scenario_order = [s.name for s in cfg.scenarios]
    return BacktestReport(
        rows=tuple(rows),
        aggregates=_aggregate(rows, excluded, scenario_order),
        errors=tuple(errors),
    )


_SIZE_LABELS = {1e4: "small (10k)", 1e5: "medium (100k)", 1e6: "large (1mn)"}

_TABLE_COLUMNS = ("Total Fee", "Gas Fee", "Swap Fee", "Price Impact")


def _volume_label(volume: float) -> str:
    if volume in _SIZE_LABELS:
        return _SIZE_LABELS[volume]
    return f"{volume:,.0f} EUR" if volume >= 1.0 else f"{volume:g} EUR"


def _cell(eur: float, bps: float) -> str:
    return f"{eur:,.2f} ({bps:,.1f} bps)"


def aggregate_table(report: BacktestReport) -> str:
    """Aligned plain-text breakdown of mean fees per scenario and size."""
    if not report.aggregates:
        raise EmptyReport("no aggregate rows to tabulate")
    header = ["Scenario", "Volume", *_TABLE_COLUMNS]
    body = []
    for agg in report.aggregates:
        body.append(
            [
                agg.scenario,
                _volume_label(agg.volume_eur),
                _cell(agg.total_eur, agg.total_bps),
                _cell(agg.gas_eur, agg.gas_bps),
                _cell(agg.lp_fee_eur, agg.lp_fee_bps),
                _cell(agg.impact_eur, agg.impact_bps),
            ]
        )
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    if report.errors:
        lines.append(f"excluded error rows: {len(report.errors)}")
    return "\n".join(lines)


def write_report_csv(report: BacktestReport, path: str | Path) -> None:
    """Per-row results, one line per (date, scenario, volume), sorted."""
    with open(path, "w", newline="") as handle:
        handle.write(REPORT_HEADER + "\n")
        for r in report.rows:
            handle.write(
                f"{r.date.isoformat()},{r.scenario},{r.volume_eur!r},{r.venue},{r.pool},"
                f"{r.gas_eur!r},{r.lp_fee_eur!r},{r.impact_eur!r},{r.total_eur!r}\n"
            )


def write_aggregate_csv(report: BacktestReport, path: str | Path) -> None:
    if not report.aggregates:
        raise EmptyReport("no aggregate rows to write")
    with open(path, "w", newline="") as handle:
        handle.write(AGGREGATE_HEADER + "\n")
        for a in report.aggregates:
            handle.write(
                f"{a.scenario},{a.volume_eur!r},{a.days},{a.gas_eur!r},{a.lp_fee_eur!r},"
                f"{a.impact_eur!r},{a.total_eur!r},{a.gas_bps!r},{a.lp_fee_bps!r},"
                f"{a.impact_bps!r},{a.total_bps!r}\n"
            )


@dataclass(frozen=True)
class SweepGrid:
    """Mean total-cost difference, first scenario minus second, per grid cell.

    Positive values mean the second (routed multi-venue) scenario is
    cheaper. ``diff_pct`` is the difference as a fraction of the first
    scenario's mean total. Arrays are indexed [gas][volume].
    """

    base_scenario: str
    routed_scenario: str
    tvl_chf: float
    gas_levels_eur: tuple[float, ...]
    volumes_eur: tuple[float, ...]
    diff_eur: tuple[tuple[float, ...], ...]
    diff_pct: tuple[tuple[float, ...], ...]
    days: int
    excluded_days: int


def _zero_gas_totals(
    cfg: BacktestConfig, fx, tvl: float
) -> tuple[list[list[float]], list[list[float]], int]:
    """Per-volume lists of paired daily chosen totals at zero gas."""
    base, routed = cfg.scenarios
    zero_gas = GasModel(0.0, cfg.l2_gas_divisor)
    base_totals: list[list[float]] = [[] for _ in cfg.volumes_eur]
    routed_totals: list[list[float]] = [[] for _ in cfg.volumes_eur]
    excluded = 0
    for day in fx:
        base_venues = venues_for_day(base, day, tvl)
        routed_venues = venues_for_day(routed, day, tvl)
        for vi, volume in enumerate(cfg.volumes_eur):
            request = _trade_terms(day, cfg, volume)
            try:
                base_total = quote_and_route(base_venues, request, zero_gas).chosen.costs.total_eur
                routed_total = quote_and_route(routed_venues, request, zero_gas).chosen.costs.total_eur
            except SwapCostError:
                excluded += 1
                continue
            base_totals[vi].append(base_total)
            routed_totals[vi].append(routed_total)
    return base_totals, routed_totals, excluded


def _grid_for_tvl(cfg: BacktestConfig, fx, tvl: float) -> SweepGrid:
    base, routed = cfg.scenarios
    base_totals, routed_totals, excluded = _zero_gas_totals(cfg, fx, tvl)
    base_means = []
    routed_means = []
    for vi, volume in enumerate(cfg.volumes_eur):
        if not base_totals[vi]:
            raise EmptyReport(f"every day failed at volume {volume!r}")
        base_means.append(_mean(base_totals[vi]))
        routed_means.append(_mean(routed_totals[vi]))
    diff_rows = []
    pct_rows = []
    for gas in cfg.gas_levels_eur:
        gas_model = GasModel(gas, cfg.l2_gas_divisor)
        base_gas = gas_model.gas_eur(base.layer)
        routed_gas = gas_model.gas_eur(routed.layer)
        # gas is constant within a day and scenario, so the mean total is
        # the zero-gas mean shifted by the per-layer charge, and the
        # in-scenario routing choice is unchanged
        diff_row = []
        pct_row = []
        for vi in range(len(cfg.volumes_eur)):
            base_total = base_means[vi] + base_gas
            routed_total = routed_means[vi] + routed_gas
            diff = base_total - routed_total
            diff_row.append(diff)
            pct_row.append(diff / base_total)
        diff_rows.append(tuple(diff_row))
        pct_rows.append(tuple(pct_row))
    return SweepGrid(
        base_scenario=base.name,
        routed_scenario=routed.name,
        tvl_chf=tvl,
        gas_levels_eur=cfg.gas_levels_eur,
        volumes_eur=cfg.volumes_eur,
        diff_eur=tuple(diff_rows),
        diff_pct=tuple(pct_rows),
        days=max(len(v) for v in base_totals),
        excluded_days=excluded,
    )


def sweep_gas_volume(cfg: BacktestConfig) -> SweepGrid:
    """Gas-by-volume grid of mean daily cost difference at the first liquidity level.

    Requires exactly two scenarios: the difference is first minus
    second, so positive cells mean the second one is cheaper.
    """
    if len(cfg.scenarios) != 2:
        raise ValueError("sweep compares exactly two scenarios")
    fx = load_fx_csv(cfg.fx_path)
    return _grid_for_tvl(cfg, fx, cfg.tvl_levels_chf[0])


def sweep_tvl(cfg: BacktestConfig) -> tuple[SweepGrid, ...]:
    """One gas-by-volume grid per configured liquidity level."""
    if len(cfg.scenarios) != 2:
        raise ValueError("sweep compares exactly two scenarios")
    fx = load_fx_csv(cfg.fx_path)
    return tuple(_grid_for_tvl(cfg, fx, tvl) for tvl in cfg.tvl_levels_chf)


def write_sweep_csv(grid: SweepGrid, path: str | Path) -> None:
    """Long-form grid, gas-major; header preceded by sign-convention metadata."""
    with open(path, "w", newline="") as handle:
        handle.write(
            f"# diff = mean total({grid.base_scenario}) - mean total({grid.routed_scenario});"
            f" positive means {grid.routed_scenario} is cheaper\n"
        )
        handle.write(
            f"# days={grid.days} excluded={grid.excluded_days} tvl_chf={grid.tvl_chf!r}\n"
        )
        handle.write(SWEEP_HEADER + "\n")
        for gi, gas in enumerate(grid.gas_levels_eur):
            for vi, volume in enumerate(grid.volumes_eur):
                handle.write(
                    f"{gas!r},{volume!r},{grid.tvl_chf!r},"
                    f"{grid.diff_eur[gi][vi]!r},{grid.diff_pct[gi][vi]!r}\n"
                )
