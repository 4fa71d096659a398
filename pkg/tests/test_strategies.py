"""Bid construction for each strategy, checked against closed forms."""

import numpy as np
import pytest

from powerbid import strategies as S
from powerbid.forecasting import ForecastErrorStats, TrainingSet
from powerbid.simulation import Producer
from powerbid.svr import KernelSpec, SvrHyperparams, train

from oracles import normal_cdf, normal_quantile_bisect


def _producer(mc=30.0, cap=100.0):
    return Producer(
        id="P", marginal_cost=mc, capacity=cap,
        strategy=S.MarginalCostBidding(),
    )


def _stats(mu=0.0, sigma=0.0, count=10):
    return ForecastErrorStats(
        mu=np.full(24, float(mu)),
        sigma=np.full(24, float(sigma)),
        sample_count=np.full(24, count, dtype=int),
    )


# parameter validation

def test_param_validation():
    with pytest.raises(ValueError):
        S.RandomBidding(low=50.0, high=40.0)
    with pytest.raises(ValueError):
        S.PriceForecastBidding(alpha=0.0)
    with pytest.raises(ValueError):
        S.PriceForecastBidding(alpha=1.0)
    with pytest.raises(ValueError):
        S.SurplusForecastBidding(beta1_pct=-1.0)
    with pytest.raises(ValueError):
        S.SurplusForecastBidding(gamma1_pct=101.0)
    with pytest.raises(ValueError):
        S.SurplusForecastBidding(grid_points=1)


# normal quantile

def test_quantile_known_values():
    assert S.normal_quantile(0.5) == 0.0
    assert S.normal_quantile(0.95) == pytest.approx(1.6449, abs=1e-4)
    assert S.normal_quantile(0.975) == pytest.approx(1.9600, abs=1e-4)


def test_quantile_antisymmetric():
    for p in (0.01, 0.2, 0.37, 0.5, 0.8, 0.99):
        assert S.normal_quantile(p) == pytest.approx(
            -S.normal_quantile(1.0 - p), abs=1e-12
        )


def test_quantile_against_bisection_oracle():
    rng = np.random.default_rng(7)
    for p in rng.uniform(0.001, 0.999, size=200):
        assert abs(S.normal_quantile(p) - normal_quantile_bisect(p)) < 1e-7


def test_quantile_domain():
    for p in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            S.normal_quantile(p)


# random bidding

def test_random_degenerate_interval():
    d = S.bid_random(_producer(), S.RandomBidding(30.0, 30.0),
                     np.random.default_rng(0))
    assert d.price == 30.0
    assert d.quantity == 100.0
    assert d.rationale == S.RANDOM


def test_random_reproducible_and_uniform():
    p = _producer()
    params = S.RandomBidding(30.0, 200.0)
    a = [S.bid_random(p, params, np.random.default_rng(5)).price
         for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng = np.random.default_rng(11)
    draws = np.array([
        S.bid_random(p, params, rng).price for _ in range(10_000)
    ])
    assert np.all((draws >= 30.0) & (draws <= 200.0))
    assert abs(draws.mean() - 115.0) < 2.0


def test_random_interval_below_cost_rejected():
    with pytest.raises(ValueError):
        S.bid_random(_producer(mc=35.0), S.RandomBidding(30.0, 200.0),
                     np.random.default_rng(0))


def test_marginal_cost_bid():
    d = S.bid_marginal_cost(_producer(mc=42.0, cap=380.0))
    assert (d.price, d.quantity, d.rationale) == (42.0, 380.0, S.MARGINAL_COST)


# price-forecast bidding

def test_price_forecast_plain_offset():
    d = S.bid_price_forecast(_producer(), 50.0, _stats(mu=2.0), 0, alpha=0.5)
    assert d.price == pytest.approx(52.0, abs=1e-12)
    assert d.rationale == S.ALPHA_QUANTILE


def test_price_forecast_alpha_quantile_value():
    # 50 + 0 + 2 * quantile(0.05) = 50 - 2 * 1.6449
    d = S.bid_price_forecast(_producer(), 50.0, _stats(sigma=2.0), 0,
                             alpha=0.95)
    assert d.price == pytest.approx(46.7102, abs=1e-3)


def test_price_forecast_cost_floor():
    d = S.bid_price_forecast(_producer(mc=30.0), 31.0, _stats(sigma=2.0), 0,
                             alpha=0.95)
    assert d.price == 30.0
    assert d.rationale == S.COST_FLOOR


def test_price_forecast_unusable_stats_drop_spread():
    st = ForecastErrorStats(
        mu=np.full(24, 1.0), sigma=np.full(24, 5.0),
        sample_count=np.ones(24, dtype=int),
    )
    d = S.bid_price_forecast(_producer(), 50.0, st, 0, alpha=0.95)
    assert d.price == pytest.approx(51.0, abs=1e-12)


def test_price_forecast_cap_clamp():
    d = S.bid_price_forecast(_producer(), 260.0, _stats(), 0, alpha=0.5)
    assert d.price == 200.0
    d = S.bid_price_forecast(_producer(), 260.0, _stats(), 0, alpha=0.5,
                             price_cap=300.0)
    assert d.price == 260.0


def test_price_forecast_monotone_in_alpha():
    st = _stats(sigma=3.0)
    prices = [
        S.bid_price_forecast(_producer(), 80.0, st, 0, alpha=a).price
        for a in (0.5, 0.8, 0.9, 0.95, 0.99)
    ]
    assert all(a > b for a, b in zip(prices, prices[1:]))


def test_price_forecast_round_trip():
    # acceptance probability of the constructed bid equals alpha
    st = _stats(mu=1.5, sigma=4.0)
    rng = np.random.default_rng(3)
    for alpha in rng.uniform(0.01, 0.99, size=100):
        d = S.bid_price_forecast(_producer(mc=0.0), 80.0, st, 0, alpha=alpha)
        accept = 1.0 - normal_cdf((d.price - 80.0 - 1.5) / 4.0)
        assert abs(accept - alpha) < 1e-6


# surplus-forecast bidding

def _trained_on_prices(prices, targets, sigma=0.5):
    n = len(prices)
    feats = np.column_stack([
        np.full(n, 500.0), np.zeros(n), np.full(n, 12.0),
        np.asarray(prices, dtype=float),
    ])
    ts = TrainingSet(features=feats, targets=np.asarray(targets, dtype=float))
    spread = float(np.max(ts.targets) - np.min(ts.targets))
    spread = max(spread, 1.0)
    hp = SvrHyperparams(
        epsilon=0.01 * spread,
        kernel=KernelSpec(sigma=sigma),
        kkt_tolerance=0.001 * spread,
    )
    return train(ts, hp)


def _sf(**kw):
    return S.SurplusForecastBidding(**kw)


def test_surplus_interior_argmax():
    prices = np.linspace(40.0, 80.0, 120)
    model = _trained_on_prices(prices, 100.0 - (prices - 60.0) ** 2)
    d = S.bid_surplus_forecast(
        _producer(), model, 500.0, 0, 12, _sf(), (40.0, 80.0),
        np.random.default_rng(0),
    )
    step = 40.0 / 199
    assert d.rationale == S.GRID_ARGMAX
    assert abs(d.price - 60.0) <= step + 1e-9


def test_surplus_lower_boundary_hold_and_explore():
    prices = np.linspace(40.0, 80.0, 60)
    model = _trained_on_prices(prices, -prices)  # decreasing: argmax at p_min
    p = _producer()
    held = S.bid_surplus_forecast(
        p, model, 500.0, 0, 12, _sf(gamma1_pct=100.0), (40.0, 80.0),
        np.random.default_rng(0),
    )
    assert held.rationale == S.HOLD_BOUNDARY
    assert held.price == 40.0
    probed = S.bid_surplus_forecast(
        p, model, 500.0, 0, 12, _sf(gamma1_pct=0.0, beta1_pct=5.0),
        (40.0, 80.0), np.random.default_rng(0),
    )
    assert probed.rationale == S.EXPLORE_DOWN
    assert probed.price == 40.0 * (1.0 - 5.0 / 100.0)
    assert probed.price == 38.0


def test_surplus_upper_boundary_hold_and_explore():
    prices = np.linspace(40.0, 100.0, 60)
    model = _trained_on_prices(prices, prices.copy())  # increasing
    p = _producer()
    held = S.bid_surplus_forecast(
        p, model, 500.0, 0, 12, _sf(gamma2_pct=100.0), (40.0, 100.0),
        np.random.default_rng(0),
    )
    assert held.rationale == S.HOLD_BOUNDARY
    assert held.price == 100.0
    probed = S.bid_surplus_forecast(
        p, model, 500.0, 0, 12, _sf(gamma2_pct=0.0, beta2_pct=5.0),
        (40.0, 100.0), np.random.default_rng(0),
    )
    assert probed.rationale == S.EXPLORE_UP
    assert probed.price == 100.0 * (1.0 + 5.0 / 100.0)
    assert probed.price == 105.0


def test_surplus_boundary_hold_frequency():
    prices = np.linspace(40.0, 80.0, 60)
    model = _trained_on_prices(prices, -prices)
    p = _producer()
    rng = np.random.default_rng(42)
    params = _sf(gamma1_pct=80.0)
    n = 10_000
    held = sum(
        S.bid_surplus_forecast(
            p, model, 500.0, 0, 12, params, (40.0, 80.0), rng
        ).rationale == S.HOLD_BOUNDARY
        for _ in range(n)
    )
    assert abs(held / n * 100.0 - 80.0) < 1.5


def test_surplus_constant_model_ties_to_lowest():
    prices = np.linspace(40.0, 80.0, 60)
    model = _trained_on_prices(prices, np.full(60, 500.0))
    d = S.bid_surplus_forecast(
        _producer(), model, 500.0, 0, 12, _sf(gamma1_pct=100.0),
        (40.0, 80.0), np.random.default_rng(0),
    )
    assert d.price == 40.0
    assert d.rationale == S.HOLD_BOUNDARY


def test_surplus_fallbacks_to_marginal_cost():
    prices = np.linspace(40.0, 80.0, 30)
    model = _trained_on_prices(prices, -prices)
    p = _producer(mc=33.0)
    rng = np.random.default_rng(0)
    for model_, rng_range in ((None, (40.0, 80.0)), (model, None),
                              (model, (50.0, 50.0))):
        d = S.bid_surplus_forecast(
            p, model_, 500.0, 0, 12, _sf(), rng_range, rng
        )
        assert d.rationale == S.MARGINAL_COST
        assert d.price == 33.0


def test_surplus_explore_down_clamps_to_cost():
    prices = np.linspace(31.0, 80.0, 30)
    model = _trained_on_prices(prices, -prices)
    d = S.bid_surplus_forecast(
        _producer(mc=30.0), model, 500.0, 0, 12,
        _sf(gamma1_pct=0.0, beta1_pct=50.0), (31.0, 80.0),
        np.random.default_rng(0),
    )
    assert d.rationale == S.EXPLORE_DOWN
    assert d.price == 30.0


def test_surplus_explore_up_clamps_to_cap():
    prices = np.linspace(150.0, 199.0, 30)
    model = _trained_on_prices(prices, prices.copy())
    d = S.bid_surplus_forecast(
        _producer(), model, 500.0, 0, 12,
        _sf(gamma2_pct=0.0, beta2_pct=50.0), (150.0, 199.0),
        np.random.default_rng(0),
    )
    assert d.rationale == S.EXPLORE_UP
    assert d.price == 200.0


def test_surplus_output_always_within_bounds():
    prices = np.linspace(40.0, 80.0, 40)
    rng = np.random.default_rng(1)
    model = _trained_on_prices(prices, rng.uniform(-500.0, 500.0, 40))
    p = _producer(mc=45.0)
    for _ in range(200):
        d = S.bid_surplus_forecast(
            p, model, 500.0, 0, 12, _sf(beta1_pct=30.0, beta2_pct=30.0),
            (40.0, 80.0), rng,
        )
        assert 45.0 <= d.price <= 200.0
        assert d.quantity == 100.0
