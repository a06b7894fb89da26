"""Single-hop venue selection by total cost.

The router quotes one trade against every pool that holds both
currencies, prices each candidate end to end (gas by the venue's
settlement layer, pool fee, impact), and picks the cheapest. Ties break
lexicographically on venue then pool id so repeated runs always pick
the same route. There is no order splitting and no multi-hop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .amm import Pool, SwapQuote, swap_exact_out
from .costs import CostBreakdown, GasModel, Layer, total_swap_cost
from .errors import EmptyCandidates, InsufficientLiquidity, NoVenueForPair

__all__ = [
    "TradeRequest",
    "Venue",
    "Candidate",
    "RouteDecision",
    "quote_all",
    "route",
    "quote_and_route",
]


@dataclass(frozen=True)
class TradeRequest:
    """One exact-output trade to price: pay ``pay``, receive ``amount_out`` of ``receive``.

    ``spot_rate`` is the reference rate in receive units per pay unit and
    ``receive_to_eur`` converts receive units to EUR for fee accounting
    (1 when the receive currency is EUR itself).
    """

    pay: str
    receive: str
    amount_out: float
    spot_rate: float
    receive_to_eur: float = 1.0

    def __post_init__(self) -> None:
        if self.pay == self.receive:
            raise ValueError("pay and receive currency must differ")
        if not (math.isfinite(self.amount_out) and self.amount_out > 0.0):
            raise ValueError(f"non-positive trade size {self.amount_out!r}")
        if not (math.isfinite(self.spot_rate) and self.spot_rate > 0.0):
            raise ValueError(f"non-positive spot rate {self.spot_rate!r}")

    @property
    def volume_eur(self) -> float:
        return self.amount_out * self.receive_to_eur


@dataclass(frozen=True)
class Venue:
    venue_id: str
    layer: Layer
    pools: tuple[Pool, ...]


@dataclass(frozen=True)
class Candidate:
    """One fully costed way to execute a trade."""

    venue_id: str
    layer: Layer
    pool_id: str
    quote: SwapQuote
    costs: CostBreakdown


@dataclass(frozen=True)
class RouteDecision:
    chosen: Candidate
    candidates: tuple[Candidate, ...]


def quote_all(
    venues: tuple[Venue, ...] | list[Venue],
    request: TradeRequest,
    gas_model: GasModel,
) -> list[Candidate]:
    """Price the trade on every pool holding the pair.

    Pools whose depth cannot serve the requested size are skipped, not
    errors. Raises NoVenueForPair when no pool holds the pair at all.
    """
    supported = 0
    candidates: list[Candidate] = []
    for venue in venues:
        gas_eur = gas_model.gas_eur(venue.layer)
        for pool in venue.pools:
            if not pool.supports(request.pay, request.receive):
                continue
            supported += 1
            try:
                quote = swap_exact_out(
                    pool, request.pay, request.receive, request.amount_out, request.spot_rate
                )
            except InsufficientLiquidity:
                continue
            costs = total_swap_cost(
                quote,
                request.volume_eur,
                pool.fee_rate,
                gas_eur,
                request.receive_to_eur,
            )
            candidates.append(
                Candidate(
                    venue_id=venue.venue_id,
                    layer=venue.layer,
                    pool_id=pool.pool_id,
                    quote=quote,
                    costs=costs,
                )
            )
    if supported == 0:
        raise NoVenueForPair(
            f"no pool holds {request.pay}/{request.receive} on any venue"
        )
    return candidates


def route(candidates: list[Candidate] | tuple[Candidate, ...]) -> RouteDecision:
    """Cheapest candidate by total EUR cost, deterministic under ties."""
    if not candidates:
        raise EmptyCandidates("no executable candidate for the trade")
    chosen = min(candidates, key=lambda c: (c.costs.total_eur, c.venue_id, c.pool_id))
    return RouteDecision(chosen=chosen, candidates=tuple(candidates))


def quote_and_route(
    venues: tuple[Venue, ...] | list[Venue],
    request: TradeRequest,
    gas_model: GasModel,
) -> RouteDecision:
    """Quote every supporting pool, then pick the cheapest."""
    return route(quote_all(venues, request, gas_model))
