#!/usr/bin/env python3
"""Walk a small bid stack through the uniform-price auction.

Shows the merit order, the clearing price moving with load, a pro-rata
split at a tied marginal price, and what a shortage looks like.
"""

from powerbid.clearing import Bid, clear, producer_surplus

FLEET = [
    Bid("hydro", 12.0, 30.0),
    Bid("coal_a", 28.0, 40.0),
    Bid("coal_b", 28.0, 20.0),
    Bid("gas", 55.0, 35.0),
    Bid("peaker", 110.0, 15.0),
]

COSTS = {"hydro": 5.0, "coal_a": 25.0, "coal_b": 25.0, "gas": 50.0,
         "peaker": 95.0}


def show(load):
    res = clear(FLEET, load, price_cap=200.0)
    tag = "SHORTAGE" if res.shortage else f"mcp {res.mcp:6.2f}"
    print(f"\nload {load:6.1f} MWh  ->  {tag}")
    for b in sorted(FLEET, key=lambda b: (b.price, b.producer_id)):
        d = res.dispatch[b.producer_id]
        s = producer_surplus(res, b.producer_id, COSTS[b.producer_id])
        marker = " *" if b.producer_id in res.marginal_producer_ids else ""
        print(f"  {b.producer_id:8} bid {b.price:6.2f}  q {b.quantity:5.1f}"
              f"  dispatched {d:6.2f}  surplus {s:8.2f}{marker}")


def main():
    print("merit order (price, quantity):")
    for b in sorted(FLEET, key=lambda b: b.price):
        print(f"  {b.price:6.2f}  {b.quantity:5.1f}  {b.producer_id}")

    # the tied 28.0 tier splits 40:20 when load lands inside it
    for load in (25.0, 75.0, 120.0, 150.0):
        show(load)

    print("\n* marks the marginal producers at the clearing price")


if __name__ == "__main__":
    main()
