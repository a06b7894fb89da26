"""Command-line front end.

Subcommands: ``quote`` prices one trade across venues, ``backtest``
replays the fixing series and writes row and aggregate files plus
figures, ``sweep`` writes gas-by-volume difference grids, ``table``
prints the mean fee breakdown, ``check`` runs the consistency checks.

The CLI is a thin shell: every number it prints or writes comes from
the library modules. Usage errors exit 2, data errors exit 1; ``check``
exits 1 when a hard check fails.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import json
import sys
from pathlib import Path

from .backtest import (
    BacktestConfig,
    DEFAULT_VOLUMES_EUR,
    SWEEP_GAS_EUR,
    SWEEP_VOLUMES_EUR,
    aggregate_table,
    default_config,
    run_backtest,
    sweep_tvl,
    write_aggregate_csv,
    write_report_csv,
    write_sweep_csv,
)
from .checks import format_check, run_all_checks
from .costs import GasModel
from .errors import SwapCostError
from .marketdata import (
    FxDay,
    SCENARIO_PRESETS,
    load_fx_csv,
    sample_fx_path,
    load_scenario_file,
    scenario_preset,
    venues_for_day,
)
from .routing import TradeRequest, quote_and_route

__all__ = ["build_parser", "main", "entrypoint"]

_FORMATS = ("text", "csv", "json")


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not value > 0.0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return value


def _non_negative(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value < 0.0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _date(text: str) -> datetime.date:
    try:
        return datetime.date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a YYYY-MM-DD date: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swapcost",
        description="Cost engine and backtester for currency swaps on automated market makers.",
    )
    parser.add_argument(
        "--seed", type=int, default=None,
        help="reserved for future stochastic features; the engine is deterministic",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    quote = sub.add_parser("quote", help="price one trade across all venues")
    quote.add_argument("--pair", default="CHF/EUR", metavar="PAY/RECEIVE",
                       help="currency pair, pay/receive (default CHF/EUR)")
    quote.add_argument("--volume", type=_positive, default=1e4,
                       help="trade volume in EUR (default 10000)")
    quote.add_argument("--preset", default="l2l3-exchange",
                       help="scenario preset name or scenario file path")
    quote.add_argument("--gas", type=_non_negative, default=15.0,
                       help="base-layer gas charge in EUR (default 15)")
    quote.add_argument("--tvl", type=_positive, default=100e6,
                       help="total system liquidity in CHF (default 100e6)")
    quote.add_argument("--rate-eur", type=_positive, default=None,
                       help="EUR per CHF fixing override")
    quote.add_argument("--rate-sgd", type=_positive, default=None,
                       help="SGD per CHF fixing override")
    quote.add_argument("--fx", default=None, help="fixings file (default: bundled sample)")
    quote.add_argument("--date", type=_date, default=None,
                       help="fixing date to quote at (default: last row)")
    quote.add_argument("--format", choices=_FORMATS, default="text")

    backtest = sub.add_parser("backtest", help="replay the fixing series and write reports")
    _add_run_arguments(backtest)
    backtest.add_argument("--out", default="out", help="output directory (default ./out)")
    backtest.add_argument("--no-figures", action="store_true",
                          help="skip rendering figures next to the delimited output")

    sweep = sub.add_parser("sweep", help="write gas-by-volume cost difference grids")
    _add_run_arguments(sweep)
    sweep.add_argument("--out", default="out", help="output directory (default ./out)")
    sweep.add_argument("--no-figures", action="store_true",
                       help="skip rendering figures next to the delimited output")

    table = sub.add_parser("table", help="print the mean fee breakdown per scenario and size")
    _add_run_arguments(table)
    table.add_argument("--format", choices=_FORMATS, default="text")

    check = sub.add_parser("check", help="run the consistency checks")
    check.add_argument("--fx", default=None, help="fixings file (default: bundled sample)")
    check.add_argument("--format", choices=("text", "json"), default="text")

    return parser


def _add_run_arguments(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", default="default",
                     help="'default' or a path to a flat key = value run configuration")
    sub.add_argument("--fx", default=None, help="fixings file (default: bundled sample)")
    sub.add_argument("--scenario", action="append", default=None, metavar="NAME_OR_PATH",
                     help="scenario preset name or file; repeat for several")
    sub.add_argument("--volume", action="append", type=_positive, default=None,
                     help="trade volume in EUR; repeat for several")
    sub.add_argument("--gas", action="append", type=_non_negative, default=None,
                     help="base-layer gas level in EUR; repeat for several")
    sub.add_argument("--tvl", action="append", type=_positive, default=None,
                     help="total system liquidity in CHF; repeat for several")


def _resolve_scenario(name_or_path: str):
    if name_or_path in SCENARIO_PRESETS:
        return scenario_preset(name_or_path)
    return load_scenario_file(name_or_path)


def _split_values(text: str) -> list[str]:
    return [part for part in (p.strip() for p in text.replace(",", " ").split()) if part]


def _load_run_config(path: str) -> dict:
    """Flat run configuration: fx, scenario (repeatable), volumes, gas, tvl."""
    from .errors import ConfigError

    values: dict = {"scenario": []}
    for line_no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key = key.strip().lower()
        value = value.strip()
        if key == "scenario":
            values["scenario"].append(value)
        elif key == "fx":
            values["fx"] = value
        elif key in ("volumes", "gas", "tvl"):
            try:
                values[key] = [float(v) for v in _split_values(value)]
            except ValueError:
                raise ConfigError(f"{path}:{line_no}: bad number in {value!r}") from None
        else:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
    return values


def _build_config(args: argparse.Namespace, sweep_grids: bool) -> BacktestConfig:
    file_values: dict = {"scenario": []}
    if args.config != "default":
        file_values = _load_run_config(args.config)
    fx_path = args.fx or file_values.get("fx") or sample_fx_path()
    scenario_names = args.scenario or file_values["scenario"] or list(SCENARIO_PRESETS)
    scenarios = tuple(_resolve_scenario(name) for name in scenario_names)
    volumes = args.volume or file_values.get("volumes") or (
        SWEEP_VOLUMES_EUR if sweep_grids else DEFAULT_VOLUMES_EUR
    )
    gas = args.gas or file_values.get("gas") or (
        SWEEP_GAS_EUR if sweep_grids else (15.0,)
    )
    tvl = args.tvl or file_values.get("tvl") or (100e6,)
    return BacktestConfig(
        fx_path=fx_path,
        scenarios=scenarios,
        volumes_eur=tuple(volumes),
        gas_levels_eur=tuple(gas),
        tvl_levels_chf=tuple(tvl),
    )


def _fixing_day(args: argparse.Namespace, parser: argparse.ArgumentParser) -> FxDay:
    if args.rate_eur is not None or args.rate_sgd is not None:
        if args.rate_eur is None or args.rate_sgd is None:
            parser.error("--rate-eur and --rate-sgd go together")
        return FxDay(date=args.date or datetime.date(1970, 1, 1),
                     chf_eur=args.rate_eur, chf_sgd=args.rate_sgd)
    series = load_fx_csv(args.fx or sample_fx_path())
    if args.date is not None:
        return series.get(args.date)
    return series.last()


def _cmd_quote(args: argparse.Namespace, parser: argparse.ArgumentParser) -> int:
    pair = args.pair.upper().split("/")
    if len(pair) != 2 or not all(pair):
        parser.error(f"--pair must be PAY/RECEIVE, got {args.pair!r}")
    day = _fixing_day(args, parser)
    rates = day.rates()
    for ccy in pair:
        if ccy not in rates:
            parser.error(f"unknown currency {ccy!r}; known: {', '.join(sorted(rates))}")
    pay, receive = pair
    if pay == receive:
        parser.error("pay and receive currency must differ")
    scenario = _resolve_scenario(args.preset)
    venues = venues_for_day(scenario, day, args.tvl)
    receive_to_eur = rates["EUR"] / rates[receive]
    request = TradeRequest(
        pay=pay,
        receive=receive,
        amount_out=args.volume / receive_to_eur,
        spot_rate=day.pair_rate(pay, receive),
        receive_to_eur=receive_to_eur,
    )
    decision = quote_and_route(venues, request, GasModel(l1_gas_eur=args.gas))
    ordered = sorted(decision.candidates, key=lambda c: (c.venue_id, c.pool_id))
    chosen = decision.chosen
    if args.format == "json":
        payload = {
            "pair": f"{pay}/{receive}",
            "volume_eur": args.volume,
            "date": day.date.isoformat(),
            "chosen": {"venue": chosen.venue_id, "pool": chosen.pool_id},
            "candidates": [
                {
                    "venue": c.venue_id,
                    "pool": c.pool_id,
                    "gas_eur": c.costs.gas_eur,
                    "lp_fee_eur": c.costs.lp_fee_eur,
                    "impact_eur": c.costs.impact_eur,
                    "total_eur": c.costs.total_eur,
                }
                for c in ordered
            ],
        }
        print(json.dumps(payload, sort_keys=True))
    elif args.format == "csv":
        print("venue,pool,gas_eur,lp_fee_eur,impact_eur,total_eur,chosen")
        for c in ordered:
            flag = "1" if (c.venue_id, c.pool_id) == (chosen.venue_id, chosen.pool_id) else "0"
            print(f"{c.venue_id},{c.pool_id},{c.costs.gas_eur!r},{c.costs.lp_fee_eur!r},"
                  f"{c.costs.impact_eur!r},{c.costs.total_eur!r},{flag}")
    else:
        print(f"{pay}->{receive} volume {args.volume:,.2f} EUR on {day.date.isoformat()}"
              f" (rate {request.spot_rate:.6f})")
        width = max(len(c.venue_id) + len(c.pool_id) for c in ordered) + 2
        print(f"{'venue/pool'.ljust(width)}  {'gas':>10}  {'lp fee':>10}"
              f"  {'impact':>14}  {'total':>14}")
        for c in ordered:
            name = f"{c.venue_id} {c.pool_id}".ljust(width)
            print(f"{name}  {c.costs.gas_eur:>10.4f}  {c.costs.lp_fee_eur:>10.4f}"
                  f"  {c.costs.impact_eur:>14.4f}  {c.costs.total_eur:>14.4f}")
        print(f"chosen: {chosen.venue_id} {chosen.pool_id}"
              f" at {chosen.costs.total_eur:,.4f} EUR total")
    return 0


def _render_report_figures(report, out: Path) -> list[Path]:
    from .figures import breakdown_figure, timeseries_figure

    return [
        timeseries_figure(report, out / "report_timeseries.png"),
        breakdown_figure(report, out / "cost_breakdown.png"),
    ]


def _cmd_backtest(args: argparse.Namespace) -> int:
    cfg = _build_config(args, sweep_grids=False)
    report = run_backtest(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "report.csv"
    aggregate_path = out / "aggregates.csv"
    write_report_csv(report, report_path)
    write_aggregate_csv(report, aggregate_path)
    written = [report_path, aggregate_path]
    if not args.no_figures and report.rows:
        written.extend(_render_report_figures(report, out))
    print(f"{len(report.rows)} rows over {len({r.date for r in report.rows})} days,"
          f" {len(report.errors)} error rows excluded")
    for path in written:
        print(f"wrote {path}")
    return 0


def _tvl_tag(tvl: float) -> str:
    return f"{tvl:.0f}" if tvl == int(tvl) else f"{tvl:g}"


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = _build_config(args, sweep_grids=True)
    grids = sweep_tvl(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for grid in grids:
        tag = _tvl_tag(grid.tvl_chf)
        csv_path = out / f"sweep_tvl_{tag}.csv"
        write_sweep_csv(grid, csv_path)
        print(f"wrote {csv_path}")
        if not args.no_figures:
            from .figures import sweep_heatmap

            png_path = sweep_heatmap(grid, out / f"sweep_tvl_{tag}.png")
            print(f"wrote {png_path}")
    return 0


def _cmd_table(args: argparse.Namespace) -> int:
    cfg = _build_config(args, sweep_grids=False)
    report = run_backtest(cfg)
    if args.format == "json":
        rows = [dataclasses.asdict(a) for a in report.aggregates]
        print(json.dumps({"aggregates": rows, "error_rows": len(report.errors)},
                         sort_keys=True))
    elif args.format == "csv":
        import io

        buffer = io.StringIO()
        from .backtest import AGGREGATE_HEADER

        buffer.write(AGGREGATE_HEADER + "\n")
        for a in report.aggregates:
            buffer.write(
                f"{a.scenario},{a.volume_eur!r},{a.days},{a.gas_eur!r},{a.lp_fee_eur!r},"
                f"{a.impact_eur!r},{a.total_eur!r},{a.gas_bps!r},{a.lp_fee_bps!r},"
                f"{a.impact_bps!r},{a.total_bps!r}\n"
            )
        print(buffer.getvalue(), end="")
    else:
        print(aggregate_table(report))
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    results = run_all_checks(args.fx)
    if args.format == "json":
        print(json.dumps([dataclasses.asdict(r) for r in results], sort_keys=True))
    else:
        for result in results:
            print(format_check(result))
    hard_failures = [r for r in results if r.hard and not r.passed]
    return 1 if hard_failures else 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "quote":
            return _cmd_quote(args, parser)
        if args.command == "backtest":
            return _cmd_backtest(args)
        if args.command == "sweep":
            return _cmd_sweep(args)
        if args.command == "table":
            return _cmd_table(args)
        return _cmd_check(args)
    except (SwapCostError, OSError, KeyError) as exc:
        # KeyError str() wraps the message in quotes; OSError args[0] is errno
        message = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"swapcost: error: {message}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    raise SystemExit(main())
