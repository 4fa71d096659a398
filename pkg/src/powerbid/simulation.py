"""Scenario engine: synthetic load, the two-stage bidding protocol, metrics.

A scenario runs preliminary days in which every producer bids uniformly at
random between its marginal cost and the price cap, building the history the
learned strategies need, then strategic days in which each producer follows
its configured strategy.  Learning producers retrain at day boundaries on a
trailing window: one shared price model serves every price forecaster, and
each surplus forecaster fits a private surplus model to its own bids.
"""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .clearing import Bid, clear, producer_surplus
from .forecasting import (
    ForecastErrorStats,
    HourRecord,
    MarketHistory,
    PriceFeature,
    build_price_dataset,
    build_surplus_dataset,
    forecast_price,
    own_bid_price_range,
    update_error_stats,
)
from .strategies import (
    MarginalCostBidding,
    PriceForecastBidding,
    RandomBidding,
    SurplusForecastBidding,
    bid_marginal_cost,
    bid_price_forecast,
    bid_random,
    bid_surplus_forecast,
)
from .svr import (
    KernelSpec,
    SvrConvergenceError,
    SvrHyperparams,
    SvrModel,
    predict_batch,
    train,
)

Strategy = (
    RandomBidding
    | MarginalCostBidding
    | PriceForecastBidding
    | SurplusForecastBidding
)

# forecaster id under which the shared price model's pairs are recorded
PRICE_FORECASTER = "price_model"


@dataclass(frozen=True)
class Producer:
    """One market participant: cost, size, behavior, and its own RNG stream.

    ``rng_seed`` left as None derives the stream from the scenario master
    seed and the producer id, so adding or removing a producer never
    perturbs anyone else's draws.
    """

    id: str
    marginal_cost: float
    capacity: float
    strategy: Strategy
    rng_seed: int | None = None

    def __post_init__(self):
        if not self.id:
            raise ValueError("producer id must be nonempty")
        if not self.capacity > 0.0:
            raise ValueError(f"capacity must be > 0, got {self.capacity}")
        if self.marginal_cost < 0.0:
            raise ValueError(
                f"marginal_cost must be >= 0, got {self.marginal_cost}"
            )


@dataclass(frozen=True)
class LoadProfileSpec:
    """Parametric diurnal/weekly load: cosine day shape, weekend scaling,
    seeded Gaussian noise."""

    base: float = 900.0
    daily_amplitude: float = 350.0
    weekly_weekend_factor: float = 0.85
    noise_sigma: float = 25.0
    peak_hour: int = 18
    seed: int | None = None

    def __post_init__(self):
        if not self.base > 0.0:
            raise ValueError(f"base load must be > 0, got {self.base}")
        if self.daily_amplitude < 0.0:
            raise ValueError("daily_amplitude must be >= 0")
        if not 0.0 < self.weekly_weekend_factor <= 1.0:
            raise ValueError(
                "weekly_weekend_factor must be in (0, 1], got "
                f"{self.weekly_weekend_factor}"
            )
        if self.noise_sigma < 0.0:
            raise ValueError("noise_sigma must be >= 0")
        if not 0 <= self.peak_hour < 24:
            raise ValueError(
                f"peak_hour must be in [0, 24), got {self.peak_hour}"
            )


@dataclass(frozen=True)
class TrainingConfig:
    """Retraining schedule and SVR settings for the two model kinds.

    The price model uses absolute tolerances in EUR/MWh.  Surplus targets
    span arbitrary magnitudes, so the surplus tube width and KKT tolerance
    are fractions of the observed target range, resolved per training call.
    """

    window_days: int = 30
    retrain_every_days: int = 1
    price_hyperparams: SvrHyperparams = field(
        default_factory=lambda: SvrHyperparams(
            c=100.0,
            epsilon=1.0,
            kernel=KernelSpec(sigma=0.5),
            kkt_tolerance=1e-3,
            max_passes=10_000,
        )
    )
    surplus_c: float = 100.0
    surplus_sigma: float = 0.5
    surplus_epsilon_fraction: float = 0.01
    surplus_kkt_fraction: float = 0.001

    def __post_init__(self):
        if self.window_days < 1:
            raise ValueError("window_days must be >= 1")
        if self.retrain_every_days < 1:
            raise ValueError("retrain_every_days must be >= 1")
        if not self.surplus_c > 0.0:
            raise ValueError("surplus_c must be > 0")
        if not self.surplus_sigma > 0.0:
            raise ValueError("surplus_sigma must be > 0")
        if not 0.0 < self.surplus_epsilon_fraction < 1.0:
            raise ValueError("surplus_epsilon_fraction must be in (0, 1)")
        if not 0.0 < self.surplus_kkt_fraction < 1.0:
            raise ValueError("surplus_kkt_fraction must be in (0, 1)")


@dataclass(frozen=True)
class ScenarioConfig:
    producers: list[Producer]
    load: LoadProfileSpec = field(default_factory=LoadProfileSpec)
    preliminary_days: int = 30
    strategic_days: int = 90
    price_cap: float = 200.0
    training: TrainingConfig = field(default_factory=TrainingConfig)
    master_seed: int = 0

    def __post_init__(self):
        if not self.producers:
            raise ValueError("scenario needs at least one producer")
        ids = [p.id for p in self.producers]
        if len(set(ids)) != len(ids):
            raise ValueError(f"producer ids must be unique, got {ids}")
        if self.preliminary_days < 1:
            raise ValueError("preliminary_days must be >= 1")
        if self.strategic_days < 0:
            raise ValueError("strategic_days must be >= 0")
        if not self.price_cap > 0.0:
            raise ValueError("price_cap must be > 0")
        for p in self.producers:
            if p.marginal_cost > self.price_cap:
                raise ValueError(
                    f"producer {p.id!r} marginal cost {p.marginal_cost} "
                    f"exceeds price cap {self.price_cap}"
                )
        if self.master_seed < 0:
            raise ValueError("master_seed must be >= 0")
        lo = 0.1 * self.load.base
        hi = 0.98 * math.fsum(p.capacity for p in self.producers)
        if hi <= lo:
            raise ValueError(
                f"fleet too small for the load profile: load floor {lo:.1f} "
                f"MWh reaches the {hi:.1f} MWh dispatchable ceiling"
            )

    @property
    def total_days(self) -> int:
        return self.preliminary_days + self.strategic_days

    @property
    def total_capacity(self) -> float:
        return math.fsum(p.capacity for p in self.producers)


@dataclass(frozen=True)
class ScenarioReport:
    """Aggregates of one completed run, split by stage."""

    preliminary_surplus: dict[str, float]
    strategic_surplus: dict[str, float]
    total_surplus: dict[str, float]
    hourly_prices: list[float]
    daily_average_prices: list[tuple[int, float]]
    hhi: float
    shortage_hours: int
    non_converged_trainings: int


def _stream_key(name: str) -> int:
    digest = hashlib.sha256(name.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _derived_seed(master_seed: int, name: str) -> int:
    ss = np.random.SeedSequence([master_seed, _stream_key(name)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def day_type_of(day: int) -> int:
    """0 for the first five days of each 7-day cycle, 1 for the last two."""
    if day < 1:
        raise ValueError(f"day must be >= 1, got {day}")
    return 0 if (day - 1) % 7 < 5 else 1


def generate_load(
    spec: LoadProfileSpec, day: int, hour: int, max_load: float | None = None
) -> float:
    """Synthetic hourly load for (day, hour), clamped to [0.1 base, max_load].

    The noise draw depends only on (seed, day, hour), so any hour can be
    generated independently and reproducibly.
    """
    if spec.seed is None:
        raise ValueError("load spec has no seed; resolve it before generating")
    if not 0 <= hour < 24:
        raise ValueError(f"hour must be in [0, 24), got {hour}")
    shape = math.cos(2.0 * math.pi * (hour - spec.peak_hour) / 24.0)
    load = spec.base + spec.daily_amplitude * shape
    if day_type_of(day) == 1:
        load *= spec.weekly_weekend_factor
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(
            np.random.SeedSequence([spec.seed, day, hour])
        )
        load += rng.normal(0.0, spec.noise_sigma)
    load = max(load, 0.1 * spec.base)
    if max_load is not None:
        load = min(load, max_load)
    return load


def hhi(producers: list[Producer]) -> float:
    """Sum of squared percentage capacity shares."""
    if not producers:
        raise ValueError("hhi needs at least one producer")
    total = math.fsum(p.capacity for p in producers)
    return math.fsum((100.0 * p.capacity / total) ** 2 for p in producers)


def aggregate_surplus(
    h: MarketHistory, day_range: tuple[int, int]
) -> dict[str, float]:
    """Per-producer total surplus over the inclusive day range."""
    first, last = day_range
    recs = [r for r in h.records if first <= r.day <= last]
    if not recs:
        raise ValueError(f"no records in day range [{first}, {last}]")
    totals: dict[str, float] = {}
    for r in recs:
        for pid, s in r.surplus.items():
            totals[pid] = totals.get(pid, 0.0) + s
    return totals


def daily_average_price(h: MarketHistory) -> list[tuple[int, float]]:
    """Mean of the 24 hourly mcp values per complete day, in day order."""
    by_day: dict[int, list[float]] = {}
    for r in h.records:
        by_day.setdefault(r.day, []).append(r.result.mcp)
    return [
        (day, math.fsum(prices) / 24.0)
        for day, prices in sorted(by_day.items())
        if len(prices) == 24
    ]


def _surplus_hyperparams(cfg: TrainingConfig, targets: np.ndarray) -> SvrHyperparams:
    # tube and tolerance scale with the observed target spread
    spread = float(np.max(targets) - np.min(targets))
    return SvrHyperparams(
        c=cfg.surplus_c,
        epsilon=max(1e-9, cfg.surplus_epsilon_fraction * spread),
        kernel=KernelSpec(sigma=cfg.surplus_sigma),
        kkt_tolerance=max(1e-9, cfg.surplus_kkt_fraction * spread),
        max_passes=cfg.price_hyperparams.max_passes,
    )


class _Learning:
    """Mutable per-run state of the learned models."""

    def __init__(self):
        self.price_model: SvrModel | None = None
        self.error_stats: ForecastErrorStats = ForecastErrorStats.empty()
        self.surplus_models: dict[str, SvrModel | None] = {}
        self.bid_ranges: dict[str, tuple[float, float]] = {}
        self.non_converged = 0

    def _fit(self, ts, hp) -> SvrModel:
        try:
            return train(ts, hp)
        except SvrConvergenceError as e:
            # an imperfect model is still a usable forecast mid-simulation
            self.non_converged += 1
            return e.model

    def retrain(self, cfg: ScenarioConfig, history: MarketHistory) -> None:
        tc = cfg.training
        needs_price = any(
            isinstance(p.strategy, PriceForecastBidding) for p in cfg.producers
        )
        if needs_price:
            ts = build_price_dataset(history, tc.window_days)
            self.price_model = self._fit(ts, tc.price_hyperparams)
            # error stats come from backtesting the fresh model over the
            # window, not from live forecasts: live pairs would collapse to
            # zero error as soon as every forecaster bids its own forecast
            recs = history.window_records(tc.window_days)
            preds = predict_batch(self.price_model, ts.features)
            preds = np.clip(preds, 0.0, cfg.price_cap)
            pairs = [
                (r.day, r.hour, float(pred), r.result.mcp)
                for r, pred in zip(recs, preds)
            ]
            self.error_stats = update_error_stats(pairs, tc.window_days)
        for p in cfg.producers:
            if not isinstance(p.strategy, SurplusForecastBidding):
                continue
            ts = build_surplus_dataset(history, p.id, tc.window_days)
            hp = _surplus_hyperparams(tc, ts.targets)
            self.surplus_models[p.id] = self._fit(ts, hp)
            self.bid_ranges[p.id] = own_bid_price_range(
                history, p.id, tc.window_days
            )


def run_scenario(cfg: ScenarioConfig) -> tuple[MarketHistory, ScenarioReport]:
    """Run the full preliminary + strategic protocol.

    Deterministic for a given config: every random draw comes from a stream
    derived from the master seed and a stable name.
    """
    load_spec = cfg.load
    if load_spec.seed is None:
        load_spec = dataclasses.replace(
            load_spec, seed=_derived_seed(cfg.master_seed, "load")
        )
    rngs = {
        p.id: np.random.default_rng(
            np.random.SeedSequence(
                [cfg.master_seed, _stream_key(p.id)]
                if p.rng_seed is None
                else [p.rng_seed]
            )
        )
        for p in cfg.producers
    }
    max_load = 0.98 * cfg.total_capacity
    history = MarketHistory()
    learning = _Learning()
    shortage_hours = 0

    for day in range(1, cfg.total_days + 1):
        strategic = day > cfg.preliminary_days
        dtype = day_type_of(day)
        if strategic:
            offset = day - cfg.preliminary_days - 1
            if offset % cfg.training.retrain_every_days == 0:
                learning.retrain(cfg, history)
        for hour in range(24):
            load = generate_load(load_spec, day, hour, max_load=max_load)
            feature = PriceFeature(load=load, day_type=dtype, hour=hour)
            p_forecast = None
            if learning.price_model is not None:
                p_forecast = forecast_price(
                    learning.price_model, feature, cfg.price_cap
                )
            bids, rationales = [], {}
            for p in cfg.producers:
                d = _decide(p, cfg, strategic, p_forecast, learning,
                            load, dtype, hour, rngs[p.id])
                bids.append(Bid(p.id, d.price, d.quantity))
                rationales[p.id] = d.rationale
            result = clear(bids, load, cfg.price_cap)
            if result.shortage:
                shortage_hours += 1
            surplus = {
                p.id: producer_surplus(result, p.id, p.marginal_cost)
                for p in cfg.producers
            }
            forecasts = {}
            if p_forecast is not None:
                forecasts[PRICE_FORECASTER] = (p_forecast, result.mcp)
            history.append(HourRecord(
                day=day,
                hour=hour,
                day_type=dtype,
                load=load,
                bids=tuple(bids),
                result=result,
                surplus=surplus,
                price_forecasts=forecasts,
                rationales=rationales,
            ))

    report = _build_report(cfg, history, shortage_hours, learning.non_converged)
    return history, report


def _decide(p, cfg, strategic, p_forecast, learning, load, dtype, hour, rng):
    if not strategic:
        return bid_random(
            p, RandomBidding(low=p.marginal_cost, high=cfg.price_cap), rng
        )
    s = p.strategy
    if isinstance(s, RandomBidding):
        return bid_random(p, s, rng)
    if isinstance(s, MarginalCostBidding):
        return bid_marginal_cost(p)
    if isinstance(s, PriceForecastBidding):
        if p_forecast is None:
            return bid_marginal_cost(p)
        return bid_price_forecast(
            p, p_forecast, learning.error_stats, hour, s.alpha, cfg.price_cap
        )
    if isinstance(s, SurplusForecastBidding):
        return bid_surplus_forecast(
            p,
            learning.surplus_models.get(p.id),
            load,
            dtype,
            hour,
            s,
            learning.bid_ranges.get(p.id),
            rng,
            cfg.price_cap,
        )
    raise TypeError(f"unknown strategy {type(s).__name__} for {p.id!r}")


def _build_report(cfg, history, shortage_hours, non_converged):
    prelim_range = (1, cfg.preliminary_days)
    prelim = aggregate_surplus(history, prelim_range)
    if cfg.strategic_days > 0:
        strat = aggregate_surplus(
            history, (cfg.preliminary_days + 1, cfg.total_days)
        )
    else:
        strat = {p.id: 0.0 for p in cfg.producers}
    total = {
        p.id: prelim.get(p.id, 0.0) + strat.get(p.id, 0.0)
        for p in cfg.producers
    }
    return ScenarioReport(
        preliminary_surplus={p.id: prelim.get(p.id, 0.0) for p in cfg.producers},
        strategic_surplus={p.id: strat.get(p.id, 0.0) for p in cfg.producers},
        total_surplus=total,
        hourly_prices=[r.result.mcp for r in history.records],
        daily_average_prices=daily_average_price(history),
        hhi=hhi(cfg.producers),
        shortage_hours=shortage_hours,
        non_converged_trainings=non_converged,
    )
