"""Auction clearing: hand cases, then property tests against the scan oracle.

Quantities and loads in the random cases are drawn on a 0.25 MWh lattice so
cumulative sums are exact in floating point and the marginal tier is
unambiguous; only the pro-rata division itself can round.
"""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from powerbid.clearing import Bid, ClearingResult, clear, producer_surplus

from oracles import clear_by_scan

CAP = 200.0


def test_single_bid_partially_accepted():
    r = clear([Bid("A", 30.0, 100.0)], load=50.0, price_cap=CAP)
    assert r.mcp == 30.0
    assert r.dispatch == {"A": 50.0}
    assert not r.shortage
    assert r.marginal_producer_ids == {"A"}


def test_merit_order_forced():
    r = clear(
        [Bid("A", 30.0, 100.0), Bid("B", 40.0, 100.0)], load=150.0,
        price_cap=CAP,
    )
    assert r.mcp == 40.0
    assert r.dispatch == {"A": 100.0, "B": 50.0}
    assert r.marginal_producer_ids == {"B"}


def test_pro_rata_symmetry_at_tie():
    r = clear(
        [Bid("A", 30.0, 100.0), Bid("B", 30.0, 100.0)], load=100.0,
        price_cap=CAP,
    )
    assert r.mcp == 30.0
    assert r.dispatch == {"A": 50.0, "B": 50.0}
    assert r.marginal_producer_ids == {"A", "B"}


def test_shortage_hits_cap():
    r = clear(
        [Bid("A", 30.0, 100.0), Bid("B", 40.0, 100.0)], load=250.0,
        price_cap=CAP,
    )
    assert r.mcp == CAP
    assert r.dispatch == {"A": 100.0, "B": 100.0}
    assert r.shortage


def test_empty_bids_with_load_is_shortage():
    r = clear([], load=10.0, price_cap=CAP)
    assert r.shortage
    assert r.mcp == CAP
    assert r.dispatch == {}


def test_empty_bids_zero_load():
    r = clear([], load=0.0, price_cap=CAP)
    assert not r.shortage
    assert r.mcp == 0.0


def test_zero_load_with_bids_prices_at_cheapest_tier():
    r = clear(
        [Bid("A", 45.0, 10.0), Bid("B", 31.0, 10.0)], load=0.0, price_cap=CAP
    )
    assert r.mcp == 31.0
    assert r.dispatch == {"A": 0.0, "B": 0.0}
    assert not r.shortage


def test_negative_load_rejected():
    with pytest.raises(ValueError):
        clear([], load=-1.0, price_cap=CAP)


def test_duplicate_producer_rejected():
    with pytest.raises(ValueError):
        clear([Bid("A", 30.0, 10.0), Bid("A", 40.0, 10.0)], 5.0, CAP)


def test_bid_above_cap_rejected():
    with pytest.raises(ValueError):
        clear([Bid("A", 300.0, 10.0)], 5.0, CAP)


def test_bid_validation():
    with pytest.raises(ValueError):
        Bid("A", -1.0, 10.0)
    with pytest.raises(ValueError):
        Bid("A", 30.0, -10.0)
    with pytest.raises(ValueError):
        Bid("A", float("nan"), 10.0)


def test_surplus_arithmetic():
    r = ClearingResult(40.0, {"A": 50.0}, frozenset(), False)
    assert producer_surplus(r, "A", 30.0) == 500.0


def test_surplus_zero_without_dispatch():
    r = ClearingResult(40.0, {}, frozenset(), False)
    assert producer_surplus(r, "A", 30.0) == 0.0


def test_surplus_marginal_unit_earns_zero():
    r = ClearingResult(30.0, {"A": 100.0}, frozenset({"A"}), False)
    assert producer_surplus(r, "A", 30.0) == 0.0


# lattice-valued random bid sets (0.25 steps keep all sums exact)
def _lattice(lo, hi):
    return st.integers(int(lo * 4), int(hi * 4)).map(lambda k: k / 4.0)


@st.composite
def bid_sets(draw, max_bids=6):
    n = draw(st.integers(0, max_bids))
    return [
        Bid(f"p{i}", draw(_lattice(0, CAP)), draw(_lattice(0, 400)))
        for i in range(n)
    ]


@given(bid_sets(), _lattice(0, 2000))
def test_conservation(bids, load):
    r = clear(bids, load, CAP)
    offered = math.fsum(b.quantity for b in bids)
    assert math.fsum(r.dispatch.values()) == pytest.approx(
        min(load, offered), abs=1e-9
    )


@given(bid_sets(), _lattice(0, 2000))
def test_dispatch_bounds_and_price_consistency(bids, load):
    r = clear(bids, load, CAP)
    by_id = {b.producer_id: b for b in bids}
    for pid, d in r.dispatch.items():
        b = by_id[pid]
        assert 0.0 <= d <= b.quantity
        if d == b.quantity and b.quantity > 0.0 and not r.shortage:
            assert b.price <= r.mcp
        # a zero-quantity bid is undispatched at any price
        if d == 0.0 and b.quantity > 0.0 and not r.shortage and load > 0.0:
            assert b.price >= r.mcp


@given(bid_sets(max_bids=5), _lattice(0, 1500), st.integers(0, 4),
       _lattice(0, CAP))
def test_merit_order_dominance(bids, load, which, new_price):
    if not bids:
        return
    b = bids[which % len(bids)]
    if new_price > b.price:
        return
    before = clear(bids, load, CAP).dispatch[b.producer_id]
    cheaper = [
        Bid(x.producer_id, new_price, x.quantity) if x is b else x
        for x in bids
    ]
    after = clear(cheaper, load, CAP).dispatch[b.producer_id]
    assert after >= before - 1e-9


@given(bid_sets(), _lattice(0, 1500), _lattice(0, 1500))
def test_mcp_monotone_in_load(bids, load_a, load_b):
    lo, hi = sorted([load_a, load_b])
    assert clear(bids, lo, CAP).mcp <= clear(bids, hi, CAP).mcp


@given(bid_sets(), _lattice(0, 2000))
def test_pro_rata_shares_proportional(bids, load):
    r = clear(bids, load, CAP)
    if r.shortage:
        return
    tied = sorted(r.marginal_producer_ids)
    by_id = {b.producer_id: b for b in bids}
    for i in range(len(tied)):
        for j in range(i + 1, len(tied)):
            qi, qj = by_id[tied[i]].quantity, by_id[tied[j]].quantity
            di, dj = r.dispatch[tied[i]], r.dispatch[tied[j]]
            assert abs(di * qj - dj * qi) <= 1e-9 * max(1.0, qi * qj)


@settings(max_examples=300)
@given(bid_sets(max_bids=6), _lattice(0, 2000))
def test_matches_scan_oracle(bids, load):
    r = clear(bids, load, CAP)
    mcp, dispatch, shortage = clear_by_scan(
        [(b.producer_id, b.price, b.quantity) for b in bids], load, CAP
    )
    assert r.mcp == mcp
    assert r.shortage == shortage
    assert set(r.dispatch) == set(dispatch)
    for pid in dispatch:
        assert r.dispatch[pid] == pytest.approx(dispatch[pid], abs=1e-9)
