"""YAML scenario configs: include resolution, schema validation, hashing.

A config file may name an ``include`` (path relative to itself) whose content
is loaded first and deep-merged under the including file: mappings merge
recursively, producer lists merge by id so a scenario can restate only the
fields it changes for one producer, and any other value is replaced outright.
Validation collects every problem with its field path before failing.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from pathlib import Path

import yaml

from .simulation import (
    LoadProfileSpec,
    Producer,
    ScenarioConfig,
    TrainingConfig,
)
from .strategies import (
    MarginalCostBidding,
    PriceForecastBidding,
    RandomBidding,
    SurplusForecastBidding,
)
from .svr import KernelSpec, SvrHyperparams

_TOP_KEYS = {
    "include", "name", "description", "master_seed", "preliminary_days",
    "strategic_days", "price_cap", "load", "training", "producers",
}
_LOAD_KEYS = {
    "base", "daily_amplitude", "weekly_weekend_factor", "noise_sigma",
    "peak_hour", "seed",
}
_TRAINING_KEYS = {
    "window_days", "retrain_every_days", "price_svr", "surplus_svr",
}
_PRICE_SVR_KEYS = {"c", "epsilon", "sigma", "kkt_tolerance", "max_passes"}
_SURPLUS_SVR_KEYS = {"c", "sigma", "epsilon_fraction", "kkt_fraction"}
_PRODUCER_KEYS = {"id", "marginal_cost", "capacity", "strategy", "rng_seed"}
_STRATEGY_KINDS = {
    "random", "marginal_cost", "price_forecast", "surplus_forecast",
}


class ConfigError(Exception):
    """Carries every field-path diagnostic found in one validation pass."""

    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("\n".join(errors))


def _merge(base, override, path=""):
    """Deep merge: mappings recurse, producer lists merge by id, rest replace.

    A strategy is atomic: overriding it replaces the whole mapping, so no
    parameter of the old kind can leak into the new one.
    """
    if path.endswith(".strategy"):
        return override
    if isinstance(base, dict) and isinstance(override, dict):
        out = dict(base)
        for key, value in override.items():
            if key in base:
                out[key] = _merge(base[key], value, f"{path}.{key}")
            else:
                out[key] = value
        return out
    if (
        path.endswith(".producers")
        and isinstance(base, list)
        and isinstance(override, list)
    ):
        by_id = {
            p.get("id"): dict(p) for p in base if isinstance(p, dict)
        }
        order = [p.get("id") for p in base if isinstance(p, dict)]
        for entry in override:
            pid = entry.get("id") if isinstance(entry, dict) else None
            if pid in by_id:
                by_id[pid] = _merge(by_id[pid], entry)
            else:
                by_id[pid] = entry
                order.append(pid)
        return [by_id[pid] for pid in order]
    return override


def load_raw(path: str | Path) -> dict:
    """Read one YAML file, resolving its include chain."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError([f"{path}: cannot read config: {e}"]) from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError([f"{path}: invalid YAML: {e}"]) from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: top level must be a mapping"])

    includes = data.pop("include", None)
    if includes is None:
        return data
    if isinstance(includes, str):
        includes = [includes]
    if not isinstance(includes, list) or not all(
        isinstance(i, str) for i in includes
    ):
        raise ConfigError([f"{path}: include must be a path or list of paths"])
    merged: dict = {}
    for inc in includes:
        merged = _merge(merged, load_raw(path.parent / inc), path="")
    return _merge(merged, data, path="")


class _Checker:
    """Accumulates `field: problem` messages while pulling typed values."""

    def __init__(self):
        self.errors: list[str] = []

    def fail(self, field: str, problem: str) -> None:
        self.errors.append(f"{field}: {problem}")

    def number(self, mapping, key, field, lo=None, hi=None, default=None):
        if key not in mapping:
            if default is None:
                self.fail(field, "required")
                return None
            return default
        v = mapping[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(field, f"must be a number, got {v!r}")
            return None
        if lo is not None and v < lo:
            self.fail(field, f"must be >= {lo}, got {v}")
            return None
        if hi is not None and v > hi:
            self.fail(field, f"must be <= {hi}, got {v}")
            return None
        return float(v)

    def integer(self, mapping, key, field, lo=None, default=None):
        if key not in mapping:
            if default is None:
                self.fail(field, "required")
                return None
            return default
        v = mapping[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(field, f"must be an integer, got {v!r}")
            return None
        if lo is not None and v < lo:
            self.fail(field, f"must be >= {lo}, got {v}")
            return None
        return v

    def mapping(self, parent, key, field):
        v = parent.get(key, {})
        if not isinstance(v, dict):
            self.fail(field, f"must be a mapping, got {type(v).__name__}")
            return {}
        return v

    def unknown(self, mapping, allowed, prefix):
        for key in mapping:
            if key not in allowed:
                self.fail(f"{prefix}{key}", "unknown field")


def _parse_strategy(raw, field, ck: _Checker):
    if not isinstance(raw, dict):
        ck.fail(field, f"must be a mapping with a 'kind', got {raw!r}")
        return None
    kind = raw.get("kind")
    if kind not in _STRATEGY_KINDS:
        ck.fail(
            f"{field}.kind",
            f"must be one of {sorted(_STRATEGY_KINDS)}, got {kind!r}",
        )
        return None
    if kind == "random":
        ck.unknown(raw, {"kind", "low", "high"}, f"{field}.")
        low = ck.number(raw, "low", f"{field}.low", lo=0.0)
        high = ck.number(raw, "high", f"{field}.high", lo=0.0)
        if low is None or high is None:
            return None
        if low > high:
            ck.fail(field, f"low {low} exceeds high {high}")
            return None
        return RandomBidding(low=low, high=high)
    if kind == "marginal_cost":
        ck.unknown(raw, {"kind"}, f"{field}.")
        return MarginalCostBidding()
    if kind == "price_forecast":
        ck.unknown(raw, {"kind", "alpha"}, f"{field}.")
        alpha = ck.number(raw, "alpha", f"{field}.alpha")
        if alpha is None:
            return None
        if not 0.0 < alpha < 1.0:
            ck.fail(f"{field}.alpha", f"must be in (0, 1), got {alpha}")
            return None
        return PriceForecastBidding(alpha=alpha)
    ck.unknown(
        raw,
        {"kind", "beta1_pct", "beta2_pct", "gamma1_pct", "gamma2_pct",
         "grid_points"},
        f"{field}.",
    )
    kwargs = {}
    for key, lo, hi in (
        ("beta1_pct", 0.0, None), ("beta2_pct", 0.0, None),
        ("gamma1_pct", 0.0, 100.0), ("gamma2_pct", 0.0, 100.0),
    ):
        if key in raw:
            v = ck.number(raw, key, f"{field}.{key}", lo=lo, hi=hi)
            if v is not None:
                kwargs[key] = v
    if "grid_points" in raw:
        v = ck.integer(raw, "grid_points", f"{field}.grid_points", lo=2)
        if v is not None:
            kwargs["grid_points"] = v
    return SurplusForecastBidding(**kwargs)


def resolve(raw: dict) -> tuple[str, str, ScenarioConfig]:
    """Validate a merged raw mapping into (name, description, config)."""
    ck = _Checker()
    ck.unknown(raw, _TOP_KEYS, "")

    name = raw.get("name", "unnamed")
    if not isinstance(name, str) or not name:
        ck.fail("name", f"must be a nonempty string, got {name!r}")
        name = "unnamed"
    description = raw.get("description", "")
    if not isinstance(description, str):
        ck.fail("description", "must be a string")
        description = ""

    master_seed = ck.integer(raw, "master_seed", "master_seed", lo=0, default=0)
    preliminary_days = ck.integer(
        raw, "preliminary_days", "preliminary_days", lo=1, default=30
    )
    strategic_days = ck.integer(
        raw, "strategic_days", "strategic_days", lo=0, default=90
    )
    price_cap = ck.number(raw, "price_cap", "price_cap", lo=0.0, default=200.0)

    load_raw_map = ck.mapping(raw, "load", "load")
    ck.unknown(load_raw_map, _LOAD_KEYS, "load.")
    load_kwargs = {}
    for key, lo in (
        ("base", 0.0), ("daily_amplitude", 0.0), ("noise_sigma", 0.0),
    ):
        v = ck.number(load_raw_map, key, f"load.{key}", lo=lo, default=-1.0)
        if v is not None and v >= 0.0:
            load_kwargs[key] = v
    v = ck.number(
        load_raw_map, "weekly_weekend_factor", "load.weekly_weekend_factor",
        lo=0.0, hi=1.0, default=-1.0,
    )
    if v is not None and v >= 0.0:
        load_kwargs["weekly_weekend_factor"] = v
    v = ck.integer(load_raw_map, "peak_hour", "load.peak_hour", lo=0, default=-1)
    if v is not None and v >= 0:
        if v > 23:
            ck.fail("load.peak_hour", f"must be <= 23, got {v}")
        else:
            load_kwargs["peak_hour"] = v
    # an explicit null means the same as absent: derive from the master seed
    if load_raw_map.get("seed") is not None:
        v = ck.integer(load_raw_map, "seed", "load.seed", lo=0)
        if v is not None:
            load_kwargs["seed"] = v

    training_raw = ck.mapping(raw, "training", "training")
    ck.unknown(training_raw, _TRAINING_KEYS, "training.")
    training_kwargs = {}
    v = ck.integer(training_raw, "window_days", "training.window_days",
                   lo=1, default=-1)
    if v is not None and v >= 1:
        training_kwargs["window_days"] = v
    v = ck.integer(training_raw, "retrain_every_days",
                   "training.retrain_every_days", lo=1, default=-1)
    if v is not None and v >= 1:
        training_kwargs["retrain_every_days"] = v

    price_svr = ck.mapping(training_raw, "price_svr", "training.price_svr")
    ck.unknown(price_svr, _PRICE_SVR_KEYS, "training.price_svr.")
    hp_defaults = TrainingConfig().price_hyperparams
    c = ck.number(price_svr, "c", "training.price_svr.c",
                  lo=1e-12, default=hp_defaults.c)
    epsilon = ck.number(price_svr, "epsilon", "training.price_svr.epsilon",
                        lo=0.0, default=hp_defaults.epsilon)
    sigma = ck.number(price_svr, "sigma", "training.price_svr.sigma",
                      lo=1e-12, default=hp_defaults.kernel.sigma)
    kkt = ck.number(price_svr, "kkt_tolerance",
                    "training.price_svr.kkt_tolerance",
                    lo=1e-15, default=hp_defaults.kkt_tolerance)
    passes = ck.integer(price_svr, "max_passes",
                        "training.price_svr.max_passes",
                        lo=1, default=hp_defaults.max_passes)
    if None not in (c, epsilon, sigma, kkt, passes):
        training_kwargs["price_hyperparams"] = SvrHyperparams(
            c=c, epsilon=epsilon, kernel=KernelSpec(sigma=sigma),
            kkt_tolerance=kkt, max_passes=passes,
        )

    surplus_svr = ck.mapping(training_raw, "surplus_svr", "training.surplus_svr")
    ck.unknown(surplus_svr, _SURPLUS_SVR_KEYS, "training.surplus_svr.")
    pairs = (
        ("c", "surplus_c", 1e-12), ("sigma", "surplus_sigma", 1e-12),
        ("epsilon_fraction", "surplus_epsilon_fraction", 1e-12),
        ("kkt_fraction", "surplus_kkt_fraction", 1e-12),
    )
    for key, attr, lo in pairs:
        if key in surplus_svr:
            v = ck.number(surplus_svr, key, f"training.surplus_svr.{key}", lo=lo)
            if v is not None:
                training_kwargs[attr] = v

    producers_raw = raw.get("producers")
    producers: list[Producer] = []
    seen_ids: set[str] = set()
    if not isinstance(producers_raw, list) or not producers_raw:
        ck.fail("producers", "must be a nonempty list")
    else:
        for i, entry in enumerate(producers_raw):
            field = f"producers[{i}]"
            if not isinstance(entry, dict):
                ck.fail(field, f"must be a mapping, got {entry!r}")
                continue
            ck.unknown(entry, _PRODUCER_KEYS, f"{field}.")
            pid = entry.get("id")
            if not isinstance(pid, str) or not pid:
                ck.fail(f"{field}.id", f"must be a nonempty string, got {pid!r}")
                continue
            if pid in seen_ids:
                ck.fail(f"{field}.id", f"duplicate producer id {pid!r}")
                continue
            seen_ids.add(pid)
            mc = ck.number(entry, "marginal_cost", f"{field}.marginal_cost",
                           lo=0.0)
            cap = ck.number(entry, "capacity", f"{field}.capacity", lo=1e-12)
            rng_seed = None
            if entry.get("rng_seed") is not None:
                rng_seed = ck.integer(entry, "rng_seed", f"{field}.rng_seed",
                                      lo=0)
            if "strategy" not in entry:
                ck.fail(f"{field}.strategy", "required")
                continue
            strategy = _parse_strategy(
                entry["strategy"], f"{field}.strategy", ck
            )
            if None in (mc, cap) or strategy is None:
                continue
            producers.append(Producer(
                id=pid, marginal_cost=mc, capacity=cap,
                strategy=strategy, rng_seed=rng_seed,
            ))

    if ck.errors:
        raise ConfigError(ck.errors)
    try:
        cfg = ScenarioConfig(
            producers=producers,
            load=LoadProfileSpec(**load_kwargs),
            preliminary_days=preliminary_days,
            strategic_days=strategic_days,
            price_cap=price_cap,
            training=TrainingConfig(**training_kwargs),
            master_seed=master_seed,
        )
    except ValueError as e:
        raise ConfigError([str(e)]) from e
    return name, description, cfg


def load_config(path: str | Path) -> tuple[str, str, ScenarioConfig]:
    return resolve(load_raw(path))


def _strategy_dict(s) -> dict:
    if isinstance(s, RandomBidding):
        return {"kind": "random", "low": s.low, "high": s.high}
    if isinstance(s, MarginalCostBidding):
        return {"kind": "marginal_cost"}
    if isinstance(s, PriceForecastBidding):
        return {"kind": "price_forecast", "alpha": s.alpha}
    return {
        "kind": "surplus_forecast",
        "beta1_pct": s.beta1_pct,
        "beta2_pct": s.beta2_pct,
        "gamma1_pct": s.gamma1_pct,
        "gamma2_pct": s.gamma2_pct,
        "grid_points": s.grid_points,
    }


def config_to_dict(name: str, cfg: ScenarioConfig) -> dict:
    """Fully resolved config as plain data, defaults filled in."""
    hp = cfg.training.price_hyperparams
    return {
        "name": name,
        "master_seed": cfg.master_seed,
        "preliminary_days": cfg.preliminary_days,
        "strategic_days": cfg.strategic_days,
        "price_cap": cfg.price_cap,
        "load": dataclasses.asdict(cfg.load),
        "training": {
            "window_days": cfg.training.window_days,
            "retrain_every_days": cfg.training.retrain_every_days,
            "price_svr": {
                "c": hp.c,
                "epsilon": hp.epsilon,
                "sigma": hp.kernel.sigma,
                "kkt_tolerance": hp.kkt_tolerance,
                "max_passes": hp.max_passes,
            },
            "surplus_svr": {
                "c": cfg.training.surplus_c,
                "sigma": cfg.training.surplus_sigma,
                "epsilon_fraction": cfg.training.surplus_epsilon_fraction,
                "kkt_fraction": cfg.training.surplus_kkt_fraction,
            },
        },
        "producers": [
            {
                "id": p.id,
                "marginal_cost": p.marginal_cost,
                "capacity": p.capacity,
                "rng_seed": p.rng_seed,
                "strategy": _strategy_dict(p.strategy),
            }
            for p in cfg.producers
        ],
    }


def config_hash(name: str, cfg: ScenarioConfig) -> str:
    """Stable hex digest of the resolved config."""
    canonical = json.dumps(
        config_to_dict(name, cfg), sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
