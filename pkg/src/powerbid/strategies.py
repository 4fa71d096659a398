"""The four bidding behaviors.

Random bidding seeds the market with history; marginal-cost bidding is the
no-information fallback; the price-forecast strategy turns a price forecast
and its error distribution into the highest bid still accepted with chosen
probability; the surplus-forecast strategy grid-searches a learned surplus
model over the producer's historical bid range and occasionally probes just
outside it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .forecasting import ForecastErrorStats
from .svr import SvrModel, predict_batch

# rationale tags carried on every decision
RANDOM = "random"
MARGINAL_COST = "marginal_cost"
ALPHA_QUANTILE = "alpha_quantile"
COST_FLOOR = "cost_floor"
GRID_ARGMAX = "grid_argmax"
EXPLORE_DOWN = "explore_down"
EXPLORE_UP = "explore_up"
HOLD_BOUNDARY = "hold_boundary"


@dataclass(frozen=True)
class RandomBidding:
    """Uniform price draws on [low, high]."""

    low: float
    high: float

    def __post_init__(self):
        if not self.low <= self.high:
            raise ValueError(
                f"need low <= high, got [{self.low}, {self.high}]"
            )


@dataclass(frozen=True)
class MarginalCostBidding:
    pass


@dataclass(frozen=True)
class PriceForecastBidding:
    """Bid the price accepted with probability alpha under the forecast."""

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha}")


@dataclass(frozen=True)
class SurplusForecastBidding:
    """Grid-maximize a learned surplus model with boundary exploration.

    When the grid argmax lands on a boundary of the searched interval the
    producer holds it with probability gamma% and otherwise probes beta%
    beyond it (down at the lower boundary, up at the upper).
    """

    beta1_pct: float = 5.0
    beta2_pct: float = 5.0
    gamma1_pct: float = 80.0
    gamma2_pct: float = 80.0
    grid_points: int = 200

    def __post_init__(self):
        if self.beta1_pct < 0.0 or self.beta2_pct < 0.0:
            raise ValueError("beta percentages must be >= 0")
        for g in (self.gamma1_pct, self.gamma2_pct):
            if not 0.0 <= g <= 100.0:
                raise ValueError(f"gamma must be in [0, 100], got {g}")
        if self.grid_points < 2:
            raise ValueError(
                f"grid_points must be >= 2, got {self.grid_points}"
            )


@dataclass(frozen=True)
class BidDecision:
    price: float
    quantity: float
    rationale: str


def normal_quantile(p: float) -> float:
    """Inverse standard normal CDF."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    return float(ndtri(p))


def bid_random(producer, params: RandomBidding, rng: np.random.Generator) -> BidDecision:
    """Uniform price on [low, high] from the producer's own stream."""
    if params.low < producer.marginal_cost:
        raise ValueError(
            f"random interval low {params.low} below marginal cost "
            f"{producer.marginal_cost}"
        )
    price = float(rng.uniform(params.low, params.high))
    return BidDecision(price=price, quantity=producer.capacity, rationale=RANDOM)


def bid_marginal_cost(producer) -> BidDecision:
    return BidDecision(
        price=producer.marginal_cost,
        quantity=producer.capacity,
        rationale=MARGINAL_COST,
    )


def bid_price_forecast(
    producer,
    p_forecast: float,
    stats: ForecastErrorStats,
    hour: int,
    alpha: float,
    price_cap: float = 200.0,
) -> BidDecision:
    """Highest price accepted with probability alpha, floored at cost.

    The market price is modeled as forecast + error with the error normal
    per hour of day, so the target bid is
    p_forecast + mu + sigma * quantile(1 - alpha).  With unusable stats the
    spread term is dropped; the marginal-cost floor and the price cap always
    apply.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must be in (0, 1), got {alpha}")
    mu = float(stats.mu[hour])
    sigma = float(stats.sigma[hour])
    price = p_forecast + mu
    rationale = ALPHA_QUANTILE
    if stats.usable(hour) and sigma > 0.0:
        price += sigma * normal_quantile(1.0 - alpha)
    if price < producer.marginal_cost:
        price = producer.marginal_cost
        rationale = COST_FLOOR
    price = min(price, price_cap)
    return BidDecision(price=price, quantity=producer.capacity, rationale=rationale)


def bid_surplus_forecast(
    producer,
    model: SvrModel | None,
    load: float,
    day_type: int,
    hour: int,
    params: SurplusForecastBidding,
    bid_range: tuple[float, float] | None,
    rng: np.random.Generator,
    price_cap: float = 200.0,
) -> BidDecision:
    """Bid the grid argmax of the surplus model, probing past boundaries.

    The model is evaluated at grid_points prices evenly spanning the
    producer's own recent bid range; ties go to the lowest price.  An interior
    argmax is bid as is.  A boundary argmax is held with probability gamma%
    or moved beta% beyond the boundary.  Without a model or with a degenerate
    range the producer falls back to its marginal cost.
    """
    if model is None or bid_range is None:
        return bid_marginal_cost(producer)
    p_min, p_max = bid_range
    if not p_min < p_max:
        return bid_marginal_cost(producer)

    grid = np.linspace(p_min, p_max, params.grid_points)
    features = np.column_stack([
        np.full(params.grid_points, load),
        np.full(params.grid_points, day_type),
        np.full(params.grid_points, hour),
        grid,
    ])
    idx = int(np.argmax(predict_batch(model, features)))
    price = float(grid[idx])
    rationale = GRID_ARGMAX
    if idx == 0:
        if rng.random() * 100.0 < params.gamma1_pct:
            rationale = HOLD_BOUNDARY
        else:
            price = p_min * (1.0 - params.beta1_pct / 100.0)
            rationale = EXPLORE_DOWN
    elif idx == params.grid_points - 1:
        if rng.random() * 100.0 < params.gamma2_pct:
            rationale = HOLD_BOUNDARY
        else:
            price = p_max * (1.0 + params.beta2_pct / 100.0)
            rationale = EXPLORE_UP
    price = min(max(price, producer.marginal_cost), price_cap)
    return BidDecision(price=price, quantity=producer.capacity, rationale=rationale)
