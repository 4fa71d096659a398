"""Uniform-price auction clearing for single price/quantity bids.

Bids are stacked in ascending price order (merit order) against an inelastic
hourly load.  Everything cheaper than the marginal price tier is dispatched in
full, the marginal tier shares the residual load pro rata by offered quantity,
and all dispatched energy earns the marginal price.  When total offered
quantity cannot cover the load, the hour is flagged as a shortage, every offer
is dispatched in full, and the clearing price is the price cap.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class Bid:
    """One producer's hourly offer: quantity MWh at price EUR/MWh."""

    producer_id: str
    price: float
    quantity: float

    def __post_init__(self):
        if not math.isfinite(self.price) or self.price < 0.0:
            raise ValueError(
                f"bid price must be finite and >= 0, got {self.price}"
            )
        if not math.isfinite(self.quantity) or self.quantity < 0.0:
            raise ValueError(
                f"bid quantity must be finite and >= 0, got {self.quantity}"
            )


@dataclass(frozen=True)
class ClearingResult:
    mcp: float
    dispatch: dict[str, float]
    marginal_producer_ids: frozenset[str]
    shortage: bool


def clear(bids: list[Bid], load: float, price_cap: float) -> ClearingResult:
    """Clear one hour of the uniform-price auction.

    Edge rules: with no bids the result is a shortage at the cap when load is
    positive and a quiet mcp of 0 when it is not; with load 0 the cheapest
    tier is marginal and nothing is dispatched; a bid priced above the cap is
    rejected as invalid.
    """
    if load < 0.0:
        raise ValueError(f"load must be >= 0, got {load}")
    if not price_cap > 0.0:
        raise ValueError(f"price cap must be > 0, got {price_cap}")
    seen: set[str] = set()
    for b in bids:
        if b.producer_id in seen:
            raise ValueError(f"duplicate bid for producer {b.producer_id!r}")
        seen.add(b.producer_id)
        if b.price > price_cap:
            raise ValueError(
                f"bid price {b.price} above price cap {price_cap} "
                f"for producer {b.producer_id!r}"
            )

    if not bids:
        short = load > 0.0
        return ClearingResult(
            mcp=price_cap if short else 0.0,
            dispatch={},
            marginal_producer_ids=frozenset(),
            shortage=short,
        )

    dispatch = {b.producer_id: 0.0 for b in bids}
    total = math.fsum(b.quantity for b in bids)
    if total < load:
        for b in bids:
            dispatch[b.producer_id] = b.quantity
        return ClearingResult(
            mcp=price_cap,
            dispatch=dispatch,
            marginal_producer_ids=frozenset(),
            shortage=True,
        )

    tiers: dict[float, list[Bid]] = {}
    for b in bids:
        tiers.setdefault(b.price, []).append(b)
    prices = sorted(tiers)

    cum = 0.0
    for idx, price in enumerate(prices):
        tier = tiers[price]
        tier_quantity = math.fsum(b.quantity for b in tier)
        # the last tier must absorb the residual: total >= load guarantees it
        if cum + tier_quantity >= load or idx == len(prices) - 1:
            remaining = max(0.0, load - cum)
            if tier_quantity > 0.0:
                frac = min(1.0, remaining / tier_quantity)
            else:
                frac = 0.0
            for b in tier:
                dispatch[b.producer_id] = b.quantity * frac
            return ClearingResult(
                mcp=price,
                dispatch=dispatch,
                marginal_producer_ids=frozenset(b.producer_id for b in tier),
                shortage=False,
            )
        for b in tier:
            dispatch[b.producer_id] = b.quantity
        cum += tier_quantity
    raise AssertionError("unreachable: no marginal tier found")


def producer_surplus(
    r: ClearingResult, producer_id: str, marginal_cost: float
) -> float:
    """Hourly surplus (mcp - marginal cost) * dispatched, 0 when not dispatched."""
    q = r.dispatch.get(producer_id, 0.0)
    return (r.mcp - marginal_cost) * q
