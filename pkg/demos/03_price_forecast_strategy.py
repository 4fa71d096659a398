#!/usr/bin/env python3
"""How the risk parameter shapes a price-forecast bid.

With forecast error modeled as N(mu, sigma) per hour, the strategy bids the
highest price still accepted with probability alpha.  Low alpha gambles on
scarcity and often sits out; high alpha shaves the bid to almost always run.
"""

import numpy as np

from powerbid.forecasting import ForecastErrorStats
from powerbid.simulation import Producer
from powerbid.strategies import MarginalCostBidding, bid_price_forecast


def main():
    producer = Producer("gas_unit", marginal_cost=30.0, capacity=60.0,
                        strategy=MarginalCostBidding())
    forecast = 48.0
    stats = ForecastErrorStats(
        mu=np.full(24, 1.2),
        sigma=np.full(24, 4.5),
        sample_count=np.full(24, 30, dtype=int),
    )

    print(f"forecast {forecast} EUR/MWh, error N(+1.2, 4.5^2), "
          f"marginal cost {producer.marginal_cost}\n")
    print("alpha    bid      accepted when price >= bid")
    for alpha in (0.50, 0.80, 0.90, 0.95, 0.98, 0.995):
        d = bid_price_forecast(producer, forecast, stats, hour=18,
                               alpha=alpha)
        print(f"{alpha:5.3f}  {d.price:7.2f}   {d.rationale}")

    print("\nwith a bearish forecast the cost floor takes over:")
    d = bid_price_forecast(producer, 31.0, stats, hour=18, alpha=0.95)
    print(f"forecast 31.0, alpha 0.95 -> bid {d.price:.2f} ({d.rationale})")


if __name__ == "__main__":
    main()
