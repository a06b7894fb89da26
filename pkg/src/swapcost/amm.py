"""Pool state and invariant math for the three supported curve families.

Two families share one invariant shape on raw token reserves,

    K * D**(N-1) * sum(x) + prod(x) == K * D**N + (D/N)**N,

differing only in the coupling term K. The amplified-only family uses
K = A * K0, the dampened family uses K = A * K0 * g**2 / (g + 1 - K0)**2,
with K0 = prod(x) * N**N / D**N. Exact-output swaps hold D fixed, reduce
the receive reserve, and root-solve the new pay reserve. The concentrated
liquidity family is closed-form and never touches the root finder.

All quantities are plain floats in token units. Fees never enter the curve
math; they are accounted downstream on top of fee-free quotes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Mapping, Sequence, Union

from .errors import InsufficientLiquidity, NoBracket, RangeExceeded
from .numerics import (
    DEFAULT_ROOT_CONFIG,
    RootConfig,
    RootResult,
    bisection,
    newton_raphson_fused,
)

__all__ = [
    "Reserves",
    "CryptoswapParams",
    "StableswapParams",
    "ClmmParams",
    "PoolParams",
    "Pool",
    "SwapQuote",
    "init_reserves",
    "cryptoswap_solve_d",
    "stableswap_solve_d",
    "swap_exact_out",
    "clmm_price_impact",
    "price_impact_fraction",
    "spot_price",
]


@dataclass(frozen=True)
class Reserves:
    """Ordered per-currency token balances of one pool."""

    currencies: tuple[str, ...]
    amounts: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.currencies) != len(self.amounts):
            raise ValueError("currency and amount counts differ")
        if len(set(self.currencies)) != len(self.currencies):
            raise ValueError(f"duplicate currency in {self.currencies}")
        for ccy, amt in zip(self.currencies, self.amounts):
            if not (math.isfinite(amt) and amt > 0.0):
                raise ValueError(f"non-positive reserve {amt!r} for {ccy}")

    def index(self, currency: str) -> int:
        try:
            return self.currencies.index(currency)
        except ValueError:
            raise KeyError(f"currency {currency!r} not in pool") from None

    def amount(self, currency: str) -> float:
        return self.amounts[self.index(currency)]

    def has(self, currency: str) -> bool:
        return currency in self.currencies


@dataclass(frozen=True)
class CryptoswapParams:
    amplification: float
    gamma: float


@dataclass(frozen=True)
class StableswapParams:
    amplification: float


@dataclass(frozen=True)
class ClmmParams:
    # price range spans [rate / range_width, rate * range_width]
    range_width: float


PoolParams = Union[CryptoswapParams, StableswapParams, ClmmParams]


@dataclass(frozen=True)
class Pool:
    """One liquidity pool, including its seeding anchors.

    ``seed_notional`` is the per-currency notional at the most recent
    (re)seeding and ``seed_rates`` the exchange rates used then, aligned
    with ``reserves.currencies``. Swaps return evolved copies; the seed
    anchors deliberately stay fixed until the next reseeding.
    """

    pool_id: str
    params: PoolParams
    reserves: Reserves
    fee_rate: float
    seed_notional: float
    seed_rates: tuple[float, ...]

    @property
    def kind(self) -> str:
        if isinstance(self.params, CryptoswapParams):
            return "cryptoswap"
        if isinstance(self.params, StableswapParams):
            return "stableswap"
        return "clmm"

    def supports(self, pay: str, receive: str) -> bool:
        return self.reserves.has(pay) and self.reserves.has(receive)

    def seed_rate(self, currency: str) -> float:
        return self.seed_rates[self.reserves.index(currency)]


@dataclass(frozen=True)
class SwapQuote:
    """Fee-free exact-output quote.

    ``price_impact_cost`` is the receive-currency value given up versus
    executing the whole trade at the reference spot rate, defined as
    ``spot_rate * input_amount - output_amount``. Float rounding and the
    curve's off-center seeding can push it a hair below zero for dust
    trades; it is reported signed rather than clamped.
    """

    input_amount: float
    output_amount: float
    price_impact_fraction: float
    price_impact_cost: float
    executed_rate: float
    reserves_after: Reserves


def init_reserves(seed_notional: float, rates: Mapping[str, float]) -> Reserves:
    """Reserves worth ``seed_notional`` numeraire units per currency leg.

    ``rates`` maps currency to units per one numeraire unit, numeraire
    itself included with rate 1. A two-currency pool seeded with notional
    n and rate s therefore holds (n, s * n).
    """
    if not (math.isfinite(seed_notional) and seed_notional > 0.0):
        raise ValueError(f"non-positive seed notional {seed_notional!r}")
    currencies = tuple(rates)
    amounts = []
    for ccy in currencies:
        rate = rates[ccy]
        if not (math.isfinite(rate) and rate > 0.0):
            raise ValueError(f"non-positive rate {rate!r} for {ccy}")
        amounts.append(seed_notional * rate)
    return Reserves(currencies=currencies, amounts=tuple(amounts))


def _ipow(base: float, exponent: int) -> float:
    # left-associated repeated product, matching math.prod ordering so that
    # balanced pools cancel exactly at float level
    out = base
    for _ in range(exponent - 1):
        out *= base
    return out


def _validate_pool_state(amounts: Sequence[float]) -> None:
    if len(amounts) < 2:
        raise ValueError("need at least two reserves")
    for amt in amounts:
        if not (math.isfinite(amt) and amt > 0.0):
            raise ValueError(f"non-positive reserve {amt!r}")


def _crypto_d_fdf(amounts: Sequence[float], amplification: float, gamma: float):
    n = len(amounts)
    total = sum(amounts)
    prod = math.prod(amounts)
    nn = _ipow(float(n), n)
    scale = _ipow(total / n, n)
    gg = gamma * gamma

    def fdf(d: float) -> tuple[float, float]:
        don = d / n
        pd = _ipow(don, n)
        dn = _ipow(d, n)
        dpow = dn / d
        k0 = prod * nn / dn
        g1 = gamma + 1.0 - k0
        k = amplification * k0 * gg / (g1 * g1)
        dk = amplification * gg * (g1 + 2.0 * k0) / (g1 * g1 * g1) * (-n * k0 / d)
        f = (k * dpow * (total - d) - (pd - prod)) / scale
        df = ((dk * dpow + k * (n - 1) * (dpow / d)) * (total - d) - k * dpow - pd / don) / scale
        return f, df

    return fdf, total, scale


def _stable_d_fdf(amounts: Sequence[float], amplification: float):
    n = len(amounts)
    total = sum(amounts)
    prod = math.prod(amounts)
    nn = _ipow(float(n), n)
    scale = _ipow(total / n, n)

    def fdf(d: float) -> tuple[float, float]:
        don = d / n
        pd = _ipow(don, n)
        dn = _ipow(d, n)
        dpow = dn / d
        k = amplification * prod * nn / dn
        dk = -n * k / d
        f = (k * dpow * (total - d) - (pd - prod)) / scale
        df = ((dk * dpow + k * (n - 1) * (dpow / d)) * (total - d) - k * dpow - pd / don) / scale
        return f, df

    return fdf, total, scale


def _solve_d(fdf, total: float, amounts: Sequence[float], config: RootConfig) -> RootResult:
    # initial guess: sum of reserves; for a balanced pool the residual is
    # already exactly zero there and the solve is a no-op
    try:
        return newton_raphson_fused(fdf, total, config, domain=lambda d: d > 0.0)
    except Exception:
        lo = max(amounts)
        hi = len(amounts) * total
        return bisection(lambda d: fdf(d)[0], lo, hi, config)


def _cryptoswap_d_result(
    amounts: Sequence[float], amplification: float, gamma: float, config: RootConfig
) -> RootResult:
    _validate_pool_state(amounts)
    fdf, total, _ = _crypto_d_fdf(amounts, amplification, gamma)
    return _solve_d(fdf, total, amounts, config)


def _stableswap_d_result(
    amounts: Sequence[float], amplification: float, config: RootConfig
) -> RootResult:
    _validate_pool_state(amounts)
    fdf, total, _ = _stable_d_fdf(amounts, amplification)
    return _solve_d(fdf, total, amounts, config)


@lru_cache(maxsize=8192)
def _cached_d(kind: str, params_key: tuple, amounts: tuple[float, ...]) -> float:
    if kind == "cryptoswap":
        return _cryptoswap_d_result(amounts, params_key[0], params_key[1], DEFAULT_ROOT_CONFIG).root
    return _stableswap_d_result(amounts, params_key[0], DEFAULT_ROOT_CONFIG).root


def cryptoswap_solve_d(
    amounts: Sequence[float],
    amplification: float,
    gamma: float,
    config: RootConfig | None = None,
) -> float:
    """Invariant D for given reserves under the dampened-coupling curve."""
    if config is None:
        return _cached_d("cryptoswap", (amplification, gamma), tuple(amounts))
    return _cryptoswap_d_result(amounts, amplification, gamma, config).root


def stableswap_solve_d(
    amounts: Sequence[float],
    amplification: float,
    config: RootConfig | None = None,
) -> float:
    """Invariant D for given reserves under the amplified-only curve."""
    if config is None:
        return _cached_d("stableswap", (amplification,), tuple(amounts))
    return _stableswap_d_result(amounts, amplification, config).root


def _pay_fdf(
    kind: str,
    d: float,
    rest_sum: float,
    rest_prod: float,
    n: int,
    amplification: float,
    gamma: float,
    scale: float,
):
    nn = _ipow(float(n), n)
    dn = _ipow(d, n)
    dpow = dn / d
    pd = _ipow(d / n, n)
    if kind == "cryptoswap":
        gg = gamma * gamma

        def fdf(x: float) -> tuple[float, float]:
            s = x + rest_sum
            p = x * rest_prod
            k0 = p * nn / dn
            g1 = gamma + 1.0 - k0
            k = amplification * k0 * gg / (g1 * g1)
            dk = amplification * gg * (g1 + 2.0 * k0) / (g1 * g1 * g1) * (k0 / x)
            f = (k * dpow * (s - d) - (pd - p)) / scale
            df = (dk * dpow * (s - d) + k * dpow + rest_prod) / scale
            return f, df

    else:

        def fdf(x: float) -> tuple[float, float]:
            s = x + rest_sum
            p = x * rest_prod
            k = amplification * p * nn / dn
            dk = amplification * rest_prod * nn / dn
            f = (k * dpow * (s - d) - (pd - p)) / scale
            df = (dk * dpow * (s - d) + k * dpow + rest_prod) / scale
            return f, df

    return fdf, pd


def _solve_pay_reserve(
    kind: str,
    amounts: Sequence[float],
    pay_index: int,
    receive_index: int,
    amount_out: float,
    amplification: float,
    gamma: float,
    config: RootConfig,
) -> float:
    n = len(amounts)
    d = (
        cryptoswap_solve_d(amounts, amplification, gamma)
        if kind == "cryptoswap"
        else stableswap_solve_d(amounts, amplification)
    )
    x0 = amounts[pay_index]
    rest_sum = 0.0
    rest_prod = 1.0
    for j, amt in enumerate(amounts):
        if j == pay_index:
            continue
        value = amt - amount_out if j == receive_index else amt
        rest_sum += value
        rest_prod *= value
    scale = _ipow(sum(amounts) / n, n)
    fdf, pd = _pay_fdf(kind, d, rest_sum, rest_prod, n, amplification, gamma, scale)
    try:
        result = newton_raphson_fused(fdf, x0, config, domain=lambda x: x > 0.0)
    except Exception:
        # mathematically the root lies between the current reserve and the
        # pure constant-product endpoint for this curve family
        hi = pd / rest_prod * (1.0 + 1e-9)
        if hi <= x0:
            hi = x0 * (1.0 + 1e-9)
        try:
            result = bisection(lambda x: fdf(x)[0], x0, hi, config)
        except NoBracket:
            result = bisection(lambda x: fdf(x)[0], x0 * (1.0 - 1e-9), hi * 1.01, config)
    return result.root


def clmm_price_impact(
    amount_out: float,
    seed_notional: float,
    rate_at_seed: float,
    rate_now: float,
    range_width: float,
) -> float:
    """Impact fraction for a concentrated-liquidity position, exact in closed form.

    Linear in the requested output: amount_out / (seed_notional *
    sqrt(rate_at_seed * rate_now)) * (1 - 1 / sqrt(range_width)). The
    guard rejects trades that would drain the in-range depth.
    """
    if not (math.isfinite(amount_out) and amount_out > 0.0):
        raise ValueError(f"non-positive output amount {amount_out!r}")
    if not (math.isfinite(seed_notional) and seed_notional > 0.0):
        raise ValueError(f"non-positive seed notional {seed_notional!r}")
    if rate_at_seed <= 0.0 or rate_now <= 0.0:
        raise ValueError("rates must be positive")
    if range_width < 1.0:
        raise ValueError(f"range width {range_width!r} must be >= 1")
    depth = seed_notional * math.sqrt(rate_at_seed * rate_now)
    if amount_out > depth:
        raise RangeExceeded(
            f"output {amount_out!r} exceeds in-range depth {depth!r}"
        )
    return amount_out / depth * (1.0 - 1.0 / math.sqrt(range_width))


def price_impact_fraction(input_amount: float, output_amount: float, spot_rate: float) -> float:
    """Executed-versus-spot rate deviation, signed, negative when worse than spot."""
    if input_amount <= 0.0 or output_amount <= 0.0 or spot_rate <= 0.0:
        raise ValueError("amounts and spot rate must be positive")
    return (output_amount / input_amount) / spot_rate - 1.0


def swap_exact_out(
    pool: Pool,
    pay: str,
    receive: str,
    amount_out: float,
    spot_rate: float,
    config: RootConfig | None = None,
) -> SwapQuote:
    """Quote the exact input needed to withdraw ``amount_out`` of ``receive``.

    ``spot_rate`` is the reference market rate in receive units per pay
    unit; it anchors the impact accounting and, for the concentrated
    family, the closed-form depth. The invariant families solve the new
    pay reserve at fixed D; the remaining reserve of a three-currency
    pool passes through bit-identical.
    """
    if pay == receive:
        raise ValueError("pay and receive currency must differ")
    if not (math.isfinite(amount_out) and amount_out > 0.0):
        raise ValueError(f"non-positive output amount {amount_out!r}")
    if not (math.isfinite(spot_rate) and spot_rate > 0.0):
        raise ValueError(f"non-positive spot rate {spot_rate!r}")
    cfg = config or DEFAULT_ROOT_CONFIG
    reserves = pool.reserves
    pay_index = reserves.index(pay)
    receive_index = reserves.index(receive)
    receive_reserve = reserves.amounts[receive_index]
    if amount_out >= receive_reserve:
        raise InsufficientLiquidity(
            f"requested {amount_out!r} of {receive}, reserve holds {receive_reserve!r}"
        )

    if isinstance(pool.params, ClmmParams):
        fraction_vs_depth = clmm_price_impact(
            amount_out,
            pool.seed_notional,
            pool.seed_rate(receive) / pool.seed_rate(pay),
            spot_rate,
            pool.params.range_width,
        )
        impact_cost = fraction_vs_depth * amount_out
        amount_in = (amount_out + impact_cost) / spot_rate
    else:
        gamma = pool.params.gamma if isinstance(pool.params, CryptoswapParams) else 0.0
        new_pay_reserve = _solve_pay_reserve(
            pool.kind,
            reserves.amounts,
            pay_index,
            receive_index,
            amount_out,
            pool.params.amplification,
            gamma,
            cfg,
        )
        amount_in = new_pay_reserve - reserves.amounts[pay_index]
        impact_cost = spot_rate * amount_in - amount_out

    new_amounts = list(reserves.amounts)
    new_amounts[pay_index] = reserves.amounts[pay_index] + amount_in
    new_amounts[receive_index] = receive_reserve - amount_out
    return SwapQuote(
        input_amount=amount_in,
        output_amount=amount_out,
        price_impact_fraction=price_impact_fraction(amount_in, amount_out, spot_rate),
        price_impact_cost=impact_cost,
        executed_rate=amount_out / amount_in,
        reserves_after=replace(reserves, amounts=tuple(new_amounts)),
    )


def spot_price(pool: Pool, base: str, quote: str, eps: float = 1e-6) -> float:
    """Marginal rate in quote units per base unit, from a vanishing test trade.

    Probes with an exact-output swap of ``eps`` times the quote reserve.
    For the concentrated family the probe is anchored at the pool's own
    seed rate, so a freshly seeded pool reports that rate back.
    """
    if not (0.0 < eps < 1.0):
        raise ValueError(f"eps {eps!r} out of (0, 1)")
    probe_out = eps * pool.reserves.amount(quote)
    if isinstance(pool.params, ClmmParams):
        anchor = pool.seed_rate(quote) / pool.seed_rate(base)
    else:
        anchor = 1.0
    trial = swap_exact_out(pool, base, quote, probe_out, anchor)
    return trial.executed_rate
