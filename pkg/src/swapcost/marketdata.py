"""Daily FX fixings and scenario-to-pool construction.

Rates are quoted per one Swiss franc: ``chf_eur`` is EUR per CHF,
``chf_sgd`` is SGD per CHF. A scenario describes venues and pool shapes
declaratively; combining it with one day's fixings and a total system
liquidity yields concrete pools, re-seeded at that day's rates so every
currency leg carries equal value.
"""

from __future__ import annotations

import csv
import datetime
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Iterator

from .amm import (
    ClmmParams,
    CryptoswapParams,
    Pool,
    PoolParams,
    StableswapParams,
    init_reserves,
)
from .costs import Layer
from .errors import (
    ConfigError,
    EmptySeries,
    MalformedRow,
    NonPositiveRate,
)
from .routing import Venue

__all__ = [
    "FxDay",
    "FxSeries",
    "load_fx_csv",
    "sample_fx_path",
    "PoolBlueprint",
    "ScenarioSpec",
    "scenario_preset",
    "SCENARIO_PRESETS",
    "load_scenario_file",
    "venues_for_day",
]

FX_HEADER = ("date", "chf_eur", "chf_sgd")

HOME_CURRENCY = "CHF"

POOL_KINDS = ("cryptoswap", "stableswap", "clmm")


@dataclass(frozen=True)
class FxDay:
    """One day's fixings, quoted per one CHF."""

    date: datetime.date
    chf_eur: float
    chf_sgd: float

    def rates(self) -> dict[str, float]:
        return {"CHF": 1.0, "EUR": self.chf_eur, "SGD": self.chf_sgd}

    def pair_rate(self, pay: str, receive: str) -> float:
        """Market rate in receive units per pay unit."""
        rates = self.rates()
        return rates[receive] / rates[pay]


@dataclass(frozen=True)
class FxSeries:
    days: tuple[FxDay, ...]
    _by_date: dict[datetime.date, FxDay] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.days:
            raise EmptySeries("no usable fixing rows")
        object.__setattr__(self, "_by_date", {d.date: d for d in self.days})

    def __len__(self) -> int:
        return len(self.days)

    def __iter__(self) -> Iterator[FxDay]:
        return iter(self.days)

    def get(self, date: datetime.date) -> FxDay:
        try:
            return self._by_date[date]
        except KeyError:
            raise KeyError(f"no fixing for {date.isoformat()}") from None

    def first(self) -> FxDay:
        return self.days[0]

    def last(self) -> FxDay:
        return self.days[-1]


def _parse_rate(cell: str, column: str, path: str, line_no: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise MalformedRow(path, line_no, f"{column} is not a number: {cell!r}") from None
    if not math.isfinite(value) or value <= 0.0:
        raise NonPositiveRate(path, line_no, f"{column} must be positive, got {cell!r}")
    return value


def load_fx_csv(path: str | Path) -> FxSeries:
    """Read daily fixings from a delimited file.

    Expected header: ``date,chf_eur,chf_sgd``. Full-line ``#`` comments
    and blank lines are ignored. A row missing either rate is dropped
    (the series keeps only dates where both fixings exist); anything
    else malformed raises with the offending line number.
    """
    path = Path(path)
    display = str(path)
    days: list[FxDay] = []
    seen: dict[datetime.date, int] = {}
    with open(path, newline="") as handle:
        header_done = False
        for line_no, raw in enumerate(csv.reader(handle), start=1):
            if not raw or (raw[0].lstrip().startswith("#")):
                continue
            cells = [c.strip() for c in raw]
            if all(c == "" for c in cells):
                continue
            if not header_done:
                if tuple(c.lower() for c in cells) != FX_HEADER:
                    raise MalformedRow(
                        display, line_no,
                        f"expected header {','.join(FX_HEADER)}, got {','.join(cells)}",
                    )
                header_done = True
                continue
            if len(cells) != len(FX_HEADER):
                raise MalformedRow(
                    display, line_no, f"expected {len(FX_HEADER)} columns, got {len(cells)}"
                )
            date_cell, eur_cell, sgd_cell = cells
            try:
                date = datetime.date.fromisoformat(date_cell)
            except ValueError:
                raise MalformedRow(display, line_no, f"bad date {date_cell!r}") from None
            if date in seen:
                raise MalformedRow(
                    display, line_no,
                    f"duplicate date {date_cell} (first at line {seen[date]})",
                )
            seen[date] = line_no
            if eur_cell == "" or sgd_cell == "":
                continue
            days.append(
                FxDay(
                    date=date,
                    chf_eur=_parse_rate(eur_cell, "chf_eur", display, line_no),
                    chf_sgd=_parse_rate(sgd_cell, "chf_sgd", display, line_no),
                )
            )
    if not days:
        raise EmptySeries(f"no usable fixing rows in {display}")
    days.sort(key=lambda d: d.date)
    return FxSeries(days=tuple(days))


def sample_fx_path() -> Path:
    """Location of the bundled synthetic sample fixings."""
    return Path(str(resources.files("swapcost").joinpath("data/sample_fx.csv")))


@dataclass(frozen=True)
class PoolBlueprint:
    """Shape of one pool before any market data is applied.

    ``share`` is the exact fraction of total system liquidity allocated
    to this pool; shares across a scenario must sum to one.
    """

    venue_id: str
    kind: str
    currencies: tuple[str, ...]
    share: Fraction

    def __post_init__(self) -> None:
        if self.kind not in POOL_KINDS:
            raise ConfigError(f"unknown pool kind {self.kind!r}")
        if len(self.currencies) < 2 or len(set(self.currencies)) != len(self.currencies):
            raise ConfigError(f"bad currency list {self.currencies!r}")
        if self.kind == "clmm" and len(self.currencies) != 2:
            raise ConfigError("concentrated pools hold exactly two currencies")
        if not (0 < self.share <= 1):
            raise ConfigError(f"pool share {self.share} out of (0, 1]")

    @property
    def pool_id(self) -> str:
        return f"{self.venue_id}-" + "-".join(c.lower() for c in self.currencies)


@dataclass(frozen=True)
class ScenarioSpec:
    """A named system layout: settlement layer plus pool blueprints."""

    name: str
    layer: Layer
    blueprints: tuple[PoolBlueprint, ...]
    amplification: float = 50.0
    gamma: float = 1e-8
    range_width: float = 1.2
    fee_rate: float = 1e-4

    def __post_init__(self) -> None:
        if not self.blueprints:
            raise ConfigError(f"scenario {self.name!r} has no pools")
        total = sum(bp.share for bp in self.blueprints)
        if total != 1:
            raise ConfigError(
                f"scenario {self.name!r} shares sum to {total}, expected 1"
            )
        ids = [bp.pool_id for bp in self.blueprints]
        if len(set(ids)) != len(ids):
            raise ConfigError(f"scenario {self.name!r} has duplicate pool ids")

    def params_for(self, kind: str) -> PoolParams:
        if kind == "cryptoswap":
            return CryptoswapParams(self.amplification, self.gamma)
        if kind == "stableswap":
            return StableswapParams(self.amplification)
        return ClmmParams(self.range_width)


def _preset_l1() -> ScenarioSpec:
    return ScenarioSpec(
        name="l1-mariana",
        layer=Layer.L1,
        blueprints=(
            PoolBlueprint("mariana", "cryptoswap", ("CHF", "EUR", "SGD"), Fraction(1)),
        ),
    )


def _preset_l2l3() -> ScenarioSpec:
    third = Fraction(1, 3)
    sixth = Fraction(1, 6)
    return ScenarioSpec(
        name="l2l3-exchange",
        layer=Layer.L2L3,
        blueprints=(
            PoolBlueprint("op1", "cryptoswap", ("CHF", "EUR", "SGD"), third),
            PoolBlueprint("op2", "cryptoswap", ("CHF", "EUR"), sixth),
            PoolBlueprint("op2", "cryptoswap", ("CHF", "SGD"), sixth),
            PoolBlueprint("op3", "clmm", ("CHF", "EUR"), sixth),
            PoolBlueprint("op3", "clmm", ("CHF", "SGD"), sixth),
        ),
    )


SCENARIO_PRESETS = {
    "l1-mariana": _preset_l1,
    "l2l3-exchange": _preset_l2l3,
}


def scenario_preset(name: str) -> ScenarioSpec:
    try:
        factory = SCENARIO_PRESETS[name]
    except KeyError:
        known = ", ".join(sorted(SCENARIO_PRESETS))
        raise ConfigError(f"unknown scenario {name!r}; presets: {known}") from None
    return factory()


def _parse_share(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"bad pool share {text!r}") from None


def _parse_pool_line(value: str) -> PoolBlueprint:
    parts = value.split()
    if len(parts) != 4:
        raise ConfigError(
            f"pool line needs 'venue kind CCY/CCY[/CCY] share', got {value!r}"
        )
    venue_id, kind, ccy_text, share_text = parts
    currencies = tuple(c.strip().upper() for c in ccy_text.split("/"))
    return PoolBlueprint(venue_id, kind, currencies, _parse_share(share_text))


def load_scenario_file(path: str | Path) -> ScenarioSpec:
    """Parse a flat ``key = value`` scenario description.

    Recognised keys: ``name``, ``layer`` (l1 or l2l3), ``amplification``,
    ``gamma``, ``range_width``, ``fee_rate``, and one ``pool`` line per
    pool in the form ``pool = <venue> <kind> CCY/CCY[/CCY] <share>``
    where the share is an exact fraction such as ``1/6``.
    """
    path = Path(path)
    fields: dict[str, str] = {}
    pools: list[PoolBlueprint] = []
    for line_no, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {raw!r}")
        key = key.strip().lower()
        value = value.strip()
        if key == "pool":
            pools.append(_parse_pool_line(value))
        elif key in ("name", "layer", "amplification", "gamma", "range_width", "fee_rate"):
            if key in fields:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
            fields[key] = value
        else:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r}")
    if "name" not in fields:
        raise ConfigError(f"{path}: scenario needs a name")
    if "layer" not in fields:
        raise ConfigError(f"{path}: scenario needs a layer (l1 or l2l3)")
    try:
        layer = Layer(fields["layer"].lower())
    except ValueError:
        raise ConfigError(f"{path}: unknown layer {fields['layer']!r}") from None
    numeric = {}
    for key, default in (
        ("amplification", 50.0),
        ("gamma", 1e-8),
        ("range_width", 1.2),
        ("fee_rate", 1e-4),
    ):
        if key in fields:
            try:
                numeric[key] = float(fields[key])
            except ValueError:
                raise ConfigError(f"{path}: bad number for {key}: {fields[key]!r}") from None
        else:
            numeric[key] = default
    return ScenarioSpec(
        name=fields["name"],
        layer=layer,
        blueprints=tuple(pools),
        **numeric,
    )


def venues_for_day(
    scenario: ScenarioSpec, day: FxDay, tvl_chf: float
) -> tuple[Venue, ...]:
    """Concrete venues for one day, every pool re-seeded at that day's rates.

    The per-leg seed notional is the pool's exact liquidity share of
    ``tvl_chf`` divided by its number of currency legs, rounded to float
    once at the end.
    """
    if not (math.isfinite(tvl_chf) and tvl_chf > 0.0):
        raise ValueError(f"non-positive system liquidity {tvl_chf!r}")
    rates = day.rates()
    grouped: dict[str, list[Pool]] = {}
    order: list[str] = []
    for bp in scenario.blueprints:
        for ccy in bp.currencies:
            if ccy not in rates:
                raise ConfigError(f"no fixing for currency {ccy!r} on {day.date}")
        seed_notional = float(Fraction(tvl_chf) * bp.share / len(bp.currencies))
        leg_rates = tuple(rates[c] for c in bp.currencies)
        pool = Pool(
            pool_id=bp.pool_id,
            params=scenario.params_for(bp.kind),
            reserves=init_reserves(seed_notional, {c: rates[c] for c in bp.currencies}),
            fee_rate=scenario.fee_rate,
            seed_notional=seed_notional,
            seed_rates=leg_rates,
        )
        if bp.venue_id not in grouped:
            grouped[bp.venue_id] = []
            order.append(bp.venue_id)
        grouped[bp.venue_id].append(pool)
    return tuple(
        Venue(venue_id=vid, layer=scenario.layer, pools=tuple(grouped[vid]))
        for vid in order
    )
