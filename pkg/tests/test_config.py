"""YAML resolution: includes, merging, diagnostics, hashing."""

import dataclasses
from importlib import resources

import pytest
import yaml

from powerbid.config import (
    ConfigError,
    config_hash,
    config_to_dict,
    load_config,
    load_raw,
    resolve,
)
from powerbid.simulation import hhi
from powerbid.strategies import (
    MarginalCostBidding,
    PriceForecastBidding,
    RandomBidding,
    SurplusForecastBidding,
)


def _write(tmp_path, name, payload):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(payload), encoding="utf-8")
    return p


MINIMAL = {
    "name": "tiny",
    "producers": [
        {"id": "a", "marginal_cost": 30.0, "capacity": 400.0,
         "strategy": {"kind": "random", "low": 30.0, "high": 200.0}},
        {"id": "b", "marginal_cost": 25.0, "capacity": 400.0,
         "strategy": {"kind": "marginal_cost"}},
    ],
}


def test_minimal_config_gets_defaults(tmp_path):
    name, desc, cfg = load_config(_write(tmp_path, "t.yaml", MINIMAL))
    assert name == "tiny"
    assert desc == ""
    assert cfg.preliminary_days == 30
    assert cfg.strategic_days == 90
    assert cfg.price_cap == 200.0
    assert cfg.master_seed == 0
    assert cfg.load.base == 900.0
    assert cfg.training.window_days == 30
    assert cfg.producers[0].strategy == RandomBidding(30.0, 200.0)
    assert cfg.producers[1].strategy == MarginalCostBidding()


def test_include_merges_producers_by_id(tmp_path):
    _write(tmp_path, "base.yaml", MINIMAL)
    child = {
        "include": "base.yaml",
        "name": "child",
        "master_seed": 5,
        "producers": [
            {"id": "b", "strategy": {"kind": "price_forecast", "alpha": 0.9}},
            {"id": "c", "marginal_cost": 40.0, "capacity": 100.0,
             "strategy": {"kind": "marginal_cost"}},
        ],
    }
    name, _, cfg = load_config(_write(tmp_path, "child.yaml", child))
    assert name == "child"
    assert cfg.master_seed == 5
    by_id = {p.id: p for p in cfg.producers}
    assert set(by_id) == {"a", "b", "c"}
    # b keeps its cost and capacity, only the strategy changed
    assert by_id["b"].marginal_cost == 25.0
    assert by_id["b"].capacity == 400.0
    assert by_id["b"].strategy == PriceForecastBidding(alpha=0.9)
    assert by_id["c"].marginal_cost == 40.0


def test_strategy_override_replaces_not_merges(tmp_path):
    _write(tmp_path, "base.yaml", MINIMAL)
    child = {
        "include": "base.yaml",
        "producers": [
            {"id": "a", "strategy": {"kind": "price_forecast", "alpha": 0.8}},
        ],
    }
    # a random {low, high} leaking into the override would fail validation
    _, _, cfg = load_config(_write(tmp_path, "child.yaml", child))
    by_id = {p.id: p for p in cfg.producers}
    assert by_id["a"].strategy == PriceForecastBidding(alpha=0.8)


def test_include_chain(tmp_path):
    _write(tmp_path, "a.yaml", MINIMAL)
    _write(tmp_path, "b.yaml", {"include": "a.yaml", "master_seed": 2})
    _write(tmp_path, "c.yaml", {"include": "b.yaml", "strategic_days": 10})
    _, _, cfg = load_config(tmp_path / "c.yaml")
    assert cfg.master_seed == 2
    assert cfg.strategic_days == 10
    assert len(cfg.producers) == 2


def test_missing_include_reports_path(tmp_path):
    p = _write(tmp_path, "t.yaml", {"include": "nope.yaml", **MINIMAL})
    with pytest.raises(ConfigError) as e:
        load_config(p)
    assert "nope.yaml" in str(e.value)


def test_unknown_keys_reported_with_paths(tmp_path):
    bad = {
        "name": "bad",
        "pric_cap": 100.0,
        "producers": [
            {"id": "a", "marginal_cost": 30.0, "capacity": 400.0,
             "strategy": {"kind": "marginal_cost"}, "capasity": 1.0},
        ],
    }
    with pytest.raises(ConfigError) as e:
        load_config(_write(tmp_path, "t.yaml", bad))
    msg = str(e.value)
    assert "pric_cap" in msg
    assert "producers[0].capasity" in msg


def test_field_diagnostics_collect_everything(tmp_path):
    bad = {
        "name": "bad",
        "price_cap": -5,
        "producers": [
            {"id": "a", "marginal_cost": 30.0, "capacity": -1.0,
             "strategy": {"kind": "price_forecast", "alpha": 1.5}},
            {"id": "b", "marginal_cost": "soon", "capacity": 10.0,
             "strategy": {"kind": "teleport"}},
        ],
    }
    with pytest.raises(ConfigError) as e:
        load_config(_write(tmp_path, "t.yaml", bad))
    msg = str(e.value)
    assert "price_cap" in msg
    assert "producers[0].capacity" in msg
    assert "producers[0].strategy.alpha" in msg
    assert "producers[1].marginal_cost" in msg
    assert "producers[1].strategy.kind" in msg
    assert len(e.value.errors) >= 5


def test_duplicate_producer_id_diagnosed_in_place(tmp_path):
    bad = {
        "name": "bad",
        "producers": MINIMAL["producers"] + [
            {"id": "a", "marginal_cost": 30.0, "capacity": 10.0,
             "strategy": {"kind": "marginal_cost"}},
        ],
    }
    with pytest.raises(ConfigError) as e:
        load_config(_write(tmp_path, "t.yaml", bad))
    assert "producers[2].id: duplicate producer id 'a'" in str(e.value)


def test_missing_producers_rejected(tmp_path):
    with pytest.raises(ConfigError) as e:
        load_config(_write(tmp_path, "t.yaml", {"name": "x"}))
    assert "producers" in str(e.value)


def test_surplus_strategy_fields(tmp_path):
    cfgd = {
        **MINIMAL,
        "producers": MINIMAL["producers"] + [
            {"id": "c", "marginal_cost": 30.0, "capacity": 100.0,
             "strategy": {"kind": "surplus_forecast", "beta1_pct": 3.0,
                          "gamma2_pct": 15.0, "grid_points": 50}},
        ],
    }
    _, _, cfg = load_config(_write(tmp_path, "t.yaml", cfgd))
    s = {p.id: p for p in cfg.producers}["c"].strategy
    assert s == SurplusForecastBidding(
        beta1_pct=3.0, beta2_pct=5.0, gamma1_pct=80.0, gamma2_pct=15.0,
        grid_points=50,
    )


def test_training_and_load_sections(tmp_path):
    cfgd = {
        **MINIMAL,
        "load": {"base": 300.0, "noise_sigma": 0.0, "daily_amplitude": 50.0},
        "training": {
            "window_days": 10,
            "price_svr": {"c": 50.0, "epsilon": 0.5},
            "surplus_svr": {"epsilon_fraction": 0.02},
        },
    }
    _, _, cfg = load_config(_write(tmp_path, "t.yaml", cfgd))
    assert cfg.load.base == 300.0
    assert cfg.load.peak_hour == 18
    assert cfg.training.window_days == 10
    assert cfg.training.price_hyperparams.c == 50.0
    assert cfg.training.price_hyperparams.epsilon == 0.5
    assert cfg.training.price_hyperparams.kkt_tolerance == 1e-3
    assert cfg.training.surplus_epsilon_fraction == 0.02
    assert cfg.training.surplus_kkt_fraction == 0.001


def test_config_hash_stability_and_sensitivity(tmp_path):
    p = _write(tmp_path, "t.yaml", MINIMAL)
    name, _, cfg = load_config(p)
    h1 = config_hash(name, cfg)
    h2 = config_hash(*(lambda n, d, c: (n, c))(*load_config(p)))
    assert h1 == h2
    assert len(h1) == 64
    bumped = dataclasses.replace(cfg, master_seed=cfg.master_seed + 1)
    assert config_hash(name, bumped) != h1
    renamed = config_hash("other", cfg)
    assert renamed != h1


def test_config_to_dict_round_trips_through_resolve(tmp_path):
    _, _, cfg = load_config(_write(tmp_path, "t.yaml", MINIMAL))
    d = config_to_dict("tiny", cfg)
    assert d["producers"][0]["strategy"] == {
        "kind": "random", "low": 30.0, "high": 200.0,
    }
    name2, _, cfg2 = resolve(d)
    assert name2 == "tiny"
    assert config_hash("tiny", cfg) == config_hash("tiny", cfg2)


def test_all_bundled_presets_resolve():
    root = resources.files("powerbid") / "presets"
    names = sorted(
        f.name for f in root.iterdir() if f.name.endswith(".yaml")
    )
    assert len(names) == 11
    for fname in names:
        name, desc, cfg = load_config(root / fname)
        assert name == fname[:-5]
        assert cfg.producers
        if fname != "fleet.yaml":
            assert len(cfg.producers) == 16
            assert hhi(cfg.producers) == pytest.approx(1702.2, abs=0.1)
            assert desc
