"""Fee accounting on top of fee-free pool quotes.

Total cost of a swap decomposes into three additive parts, all in EUR:
a fixed gas charge per transaction, a proportional liquidity-provider
fee on the traded volume, and the price impact realised against the
reference spot rate. The decomposition is exact: ``total_eur`` is always
the plain sum ``gas + lp + impact`` in that order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .amm import SwapQuote

__all__ = [
    "Layer",
    "GasModel",
    "CostBreakdown",
    "lp_fee",
    "total_swap_cost",
    "bps",
]


class Layer(enum.Enum):
    """Settlement layer a venue runs on; gas differs by orders of magnitude."""

    L1 = "l1"
    L2L3 = "l2l3"


@dataclass(frozen=True)
class GasModel:
    """Per-transaction gas charge by settlement layer.

    Rollup-style layers amortise calldata, so their charge is the base
    layer's divided by ``l2_divisor``.
    """

    l1_gas_eur: float = 15.0
    l2_divisor: float = 50.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.l1_gas_eur) and self.l1_gas_eur >= 0.0):
            raise ValueError(f"negative gas charge {self.l1_gas_eur!r}")
        if not (math.isfinite(self.l2_divisor) and self.l2_divisor > 0.0):
            raise ValueError(f"non-positive gas divisor {self.l2_divisor!r}")

    def gas_eur(self, layer: Layer) -> float:
        if layer is Layer.L1:
            return self.l1_gas_eur
        return self.l1_gas_eur / self.l2_divisor


@dataclass(frozen=True)
class CostBreakdown:
    gas_eur: float
    lp_fee_eur: float
    impact_eur: float
    total_eur: float


def lp_fee(volume_eur: float, fee_rate: float) -> float:
    """Proportional pool fee on the traded EUR volume."""
    if volume_eur < 0.0 or fee_rate < 0.0:
        raise ValueError("volume and fee rate must be non-negative")
    return volume_eur * fee_rate


def total_swap_cost(
    quote: SwapQuote,
    volume_eur: float,
    fee_rate: float,
    gas_eur: float,
    receive_to_eur: float = 1.0,
) -> CostBreakdown:
    """Full cost of one quoted swap, in EUR.

    ``receive_to_eur`` converts the quote's impact cost from receive
    currency to EUR; it is 1 when the receive currency already is EUR.
    """
    if not (math.isfinite(receive_to_eur) and receive_to_eur > 0.0):
        raise ValueError(f"non-positive conversion rate {receive_to_eur!r}")
    gas = gas_eur
    fee = lp_fee(volume_eur, fee_rate)
    impact = quote.price_impact_cost * receive_to_eur
    return CostBreakdown(
        gas_eur=gas,
        lp_fee_eur=fee,
        impact_eur=impact,
        total_eur=gas + fee + impact,
    )


def bps(cost_eur: float, volume_eur: float) -> float:
    """Cost as basis points of traded volume."""
    if volume_eur <= 0.0:
        raise ValueError(f"non-positive volume {volume_eur!r}")
    return cost_eur / volume_eur * 1e4
