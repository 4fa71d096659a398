"""Market history storage and the two SVR training-set builders.

The price model learns mcp as a function of (load, day type, hour); the
surplus model learns one producer's hourly surplus as a function of the same
features plus that producer's own bid price.  Forecast-error statistics are
kept per hour of day over a sliding window and feed the risk adjustment of
the price-forecast strategy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clearing import Bid, ClearingResult
from .svr import SvrModel, TrainingSet, predict

WEEKDAY = 0
WEEKEND = 1


def _check_hour(hour: int) -> None:
    if not 0 <= hour < 24:
        raise ValueError(f"hour must be in [0, 24), got {hour}")


def _check_day_type(day_type: int) -> None:
    if day_type not in (WEEKDAY, WEEKEND):
        raise ValueError(f"day_type must be 0 or 1, got {day_type}")


@dataclass(frozen=True)
class PriceFeature:
    """Price-model input: hourly load, weekday/weekend flag, hour of day."""

    load: float
    day_type: int
    hour: int

    def __post_init__(self):
        if self.load < 0.0:
            raise ValueError(f"load must be >= 0, got {self.load}")
        _check_day_type(self.day_type)
        _check_hour(self.hour)

    def as_vector(self) -> np.ndarray:
        return np.array([self.load, self.day_type, self.hour], dtype=float)


@dataclass(frozen=True)
class SurplusFeature:
    """Surplus-model input: price features plus the producer's own bid price."""

    load: float
    day_type: int
    hour: int
    bid_price: float

    def __post_init__(self):
        if self.load < 0.0:
            raise ValueError(f"load must be >= 0, got {self.load}")
        _check_day_type(self.day_type)
        _check_hour(self.hour)
        if self.bid_price < 0.0:
            raise ValueError(f"bid_price must be >= 0, got {self.bid_price}")

    def as_vector(self) -> np.ndarray:
        return np.array(
            [self.load, self.day_type, self.hour, self.bid_price], dtype=float
        )


@dataclass(frozen=True)
class ForecastErrorStats:
    """Per-hour-of-day forecast error moments over a trailing window.

    ``mu[h]`` and ``sigma[h]`` are the sample mean and n-1 standard deviation
    of (actual - forecast) at hour h; an hour with fewer than two samples has
    no meaningful spread and is flagged unusable.
    """

    mu: np.ndarray
    sigma: np.ndarray
    sample_count: np.ndarray

    def __post_init__(self):
        for name in ("mu", "sigma", "sample_count"):
            if getattr(self, name).shape != (24,):
                raise ValueError(f"{name} must have shape (24,)")
        if np.any(self.sigma < 0.0):
            raise ValueError("sigma must be >= 0")
        if np.any(self.sample_count < 0):
            raise ValueError("sample_count must be >= 0")

    @classmethod
    def empty(cls) -> "ForecastErrorStats":
        return cls(
            mu=np.zeros(24),
            sigma=np.zeros(24),
            sample_count=np.zeros(24, dtype=int),
        )

    def usable(self, hour: int) -> bool:
        _check_hour(hour)
        return int(self.sample_count[hour]) >= 2


@dataclass(frozen=True)
class HourRecord:
    """Everything the market produced in one simulated hour.

    ``price_forecasts`` maps forecaster id to its (forecast, actual) pair for
    the hour; empty while no model exists yet.  ``rationales`` keeps each
    producer's decision tag so stage boundaries stay auditable.
    """

    day: int
    hour: int
    day_type: int
    load: float
    bids: tuple[Bid, ...]
    result: ClearingResult
    surplus: dict[str, float]
    price_forecasts: dict[str, tuple[float, float]] = field(
        default_factory=dict
    )
    rationales: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.day < 1:
            raise ValueError(f"day must be >= 1, got {self.day}")
        _check_hour(self.hour)
        _check_day_type(self.day_type)
        if self.load < 0.0:
            raise ValueError(f"load must be >= 0, got {self.load}")


class MarketHistory:
    """Append-only record of simulated hours, strictly ordered by (day, hour)."""

    def __init__(self, records: list[HourRecord] | None = None):
        self._records: list[HourRecord] = []
        for r in records or []:
            self.append(r)

    def append(self, record: HourRecord) -> None:
        if self._records:
            last = self._records[-1]
            if (record.day, record.hour) <= (last.day, last.hour):
                raise ValueError(
                    f"records must be strictly ordered by (day, hour): "
                    f"({record.day}, {record.hour}) after "
                    f"({last.day}, {last.hour})"
                )
        self._records.append(record)

    @property
    def records(self) -> tuple[HourRecord, ...]:
        return tuple(self._records)

    def __len__(self) -> int:
        return len(self._records)

    @property
    def latest_day(self) -> int:
        if not self._records:
            raise ValueError("history is empty")
        return self._records[-1].day

    def window_records(self, window_days: int) -> list[HourRecord]:
        """Records from the trailing window, newest day included.

        A window longer than the available history quietly returns all of it.
        """
        if window_days < 1:
            raise ValueError(f"window_days must be >= 1, got {window_days}")
        first_day = self.latest_day - window_days + 1
        return [r for r in self._records if r.day >= first_day]


def build_price_dataset(h: MarketHistory, window_days: int) -> TrainingSet:
    """One sample per windowed hour: (load, day_type, hour) -> realized mcp."""
    recs = h.window_records(window_days)
    X = np.array([[r.load, r.day_type, r.hour] for r in recs], dtype=float)
    y = np.array([r.result.mcp for r in recs], dtype=float)
    return TrainingSet(X, y)


def build_surplus_dataset(
    h: MarketHistory, producer_id: str, window_days: int
) -> TrainingSet:
    """One sample per windowed hour: price features plus the producer's own
    bid price, targeting the surplus it realized that hour."""
    recs = h.window_records(window_days)
    rows, targets = [], []
    for r in recs:
        own = next(
            (b for b in r.bids if b.producer_id == producer_id), None
        )
        if own is None or producer_id not in r.surplus:
            raise ValueError(
                f"producer {producer_id!r} missing from history at "
                f"day {r.day} hour {r.hour}"
            )
        rows.append([r.load, r.day_type, r.hour, own.price])
        targets.append(r.surplus[producer_id])
    return TrainingSet(np.array(rows, dtype=float), np.array(targets, dtype=float))


def own_bid_price_range(
    h: MarketHistory, producer_id: str, window_days: int
) -> tuple[float, float]:
    """Min and max of the producer's own bid prices over the window.

    This is the search interval the surplus strategy may optimize over; the
    surplus model has seen no prices outside it.
    """
    recs = h.window_records(window_days)
    prices = [
        b.price for r in recs for b in r.bids if b.producer_id == producer_id
    ]
    if not prices:
        raise ValueError(
            f"producer {producer_id!r} has no bids in the window"
        )
    return min(prices), max(prices)


def forecast_price(
    m: SvrModel, f: PriceFeature, price_cap: float = 200.0
) -> float:
    """Price-model prediction clamped to the legal [0, price_cap] range."""
    return min(max(predict(m, f.as_vector()), 0.0), price_cap)


def update_error_stats(
    pairs: list[tuple[int, int, float, float]], window_days: int
) -> ForecastErrorStats:
    """Per-hour error moments from (day, hour, forecast, actual) tuples.

    The window is anchored at the newest day present; mean and n-1 standard
    deviation of (actual - forecast) are computed per hour of day.
    """
    if window_days < 1:
        raise ValueError(f"window_days must be >= 1, got {window_days}")
    stats = ForecastErrorStats.empty()
    if not pairs:
        return stats
    first_day = max(day for day, _, _, _ in pairs) - window_days + 1
    buckets: list[list[float]] = [[] for _ in range(24)]
    for day, hour, forecast, actual in pairs:
        _check_hour(hour)
        if day >= first_day:
            buckets[hour].append(actual - forecast)
    mu = np.zeros(24)
    sigma = np.zeros(24)
    count = np.zeros(24, dtype=int)
    for hr, errs in enumerate(buckets):
        count[hr] = len(errs)
        if errs:
            mu[hr] = math.fsum(errs) / len(errs)
        if len(errs) >= 2:
            sigma[hr] = float(np.std(errs, ddof=1))
    return ForecastErrorStats(mu=mu, sigma=sigma, sample_count=count)
