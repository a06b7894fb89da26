"""Cost engine and backtester for currency swaps on automated market makers.

The package quotes exact-output swaps on three pool families (two
invariant curves solved numerically, one concentrated-liquidity form
solved in closed form), decomposes the cost of each trade into gas,
pool fee, and price impact, routes across venues by total cost, and
replays daily fixing series to compare system designs.
"""

from .amm import (
    ClmmParams,
    CryptoswapParams,
    Pool,
    PoolParams,
    Reserves,
    StableswapParams,
    SwapQuote,
    clmm_price_impact,
    cryptoswap_solve_d,
    init_reserves,
    price_impact_fraction,
    spot_price,
    stableswap_solve_d,
    swap_exact_out,
)
from .backtest import (
    AggregateRow,
    BacktestConfig,
    BacktestReport,
    ErrorRow,
    ReportRow,
    SweepGrid,
    aggregate_table,
    default_config,
    run_backtest,
    sweep_config,
    sweep_gas_volume,
    sweep_tvl,
    write_aggregate_csv,
    write_report_csv,
    write_sweep_csv,
)
from .checks import CheckResult, run_all_checks
from .costs import CostBreakdown, GasModel, Layer, bps, lp_fee, total_swap_cost
from .errors import (
    AmmError,
    ConfigError,
    DataError,
    DerivativeVanished,
    EmptyCandidates,
    EmptyReport,
    EmptySeries,
    InsufficientLiquidity,
    MalformedRow,
    NoBracket,
    NonConvergence,
    NonPositiveRate,
    NoVenueForPair,
    RangeExceeded,
    RoutingError,
    SolverError,
    SwapCostError,
)
from .marketdata import (
    FxDay,
    FxSeries,
    PoolBlueprint,
    ScenarioSpec,
    load_fx_csv,
    load_scenario_file,
    sample_fx_path,
    scenario_preset,
    venues_for_day,
)
from .numerics import RootConfig, RootResult, bisection, newton_raphson, newton_raphson_fused
from .routing import Candidate, RouteDecision, TradeRequest, Venue, quote_all, quote_and_route, route

__version__ = "0.1.0"
