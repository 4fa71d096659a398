"""Operator surface: run scenarios, sweep a parameter, validate configs.

The config argument of every subcommand is either a path to a YAML file or
the name of a bundled preset.  Exit codes: 0 success, 1 config problem,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import yaml

from .config import (
    ConfigError,
    config_hash,
    config_to_dict,
    load_raw,
    resolve,
)
from .reporting import (
    write_daily_average_svg,
    write_daily_csv,
    write_hourly_csv,
    write_manifest,
    write_price_evolution_svg,
    write_report_txt,
    write_surplus_summary_csv,
)
from .simulation import ScenarioReport, _derived_seed, run_scenario

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _preset_dir():
    return resources.files("powerbid") / "presets"


def available_presets() -> list[str]:
    return sorted(
        p.name[: -len(".yaml")]
        for p in _preset_dir().iterdir()
        if p.name.endswith(".yaml")
    )


def _resolve_config_source(source: str) -> Path:
    p = Path(source)
    if p.is_file():
        return p
    candidate = _preset_dir() / f"{source}.yaml"
    if candidate.is_file():
        return Path(str(candidate))
    raise ConfigError([
        f"config {source!r}: not a file or bundled preset "
        f"(presets: {', '.join(available_presets())})"
    ])


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _execute_run(name: str, cfg, out_dir: Path, quiet: bool) -> ScenarioReport:
    """Run one scenario and write the full output set into out_dir."""
    digest = config_hash(name, cfg)
    started = _now()
    out_dir.mkdir(parents=True, exist_ok=True)
    history, report = run_scenario(cfg)
    ids = [p.id for p in cfg.producers]
    write_hourly_csv(out_dir / "hourly.csv", history, ids)
    write_daily_csv(out_dir / "daily.csv", report.daily_average_prices)
    write_surplus_summary_csv(out_dir / "surplus_summary.csv", report)
    write_report_txt(out_dir / "report.txt", name, cfg, report, digest)
    write_price_evolution_svg(
        out_dir / "price_evolution.svg", history, cfg.preliminary_days
    )
    write_daily_average_svg(
        out_dir / "daily_average.svg", report.daily_average_prices
    )
    write_manifest(
        out_dir / "manifest.json",
        name=name,
        config_digest=digest,
        master_seed=cfg.master_seed,
        output_dir=str(out_dir),
        started_at=started,
        finished_at=_now(),
    )
    if not quiet:
        total = math.fsum(report.total_surplus.values())
        print(f"{name}: {cfg.total_days} days, HHI {report.hhi:.1f}, "
              f"total surplus {total:,.0f} EUR, "
              f"{report.shortage_hours} shortage hours -> {out_dir}")
    return report


def cmd_run(args) -> int:
    name, _, cfg = resolve(load_raw(_resolve_config_source(args.config)))
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, master_seed=args.seed)
    out_dir = Path(args.out) if args.out else Path("runs") / name
    _execute_run(name, cfg, out_dir, args.quiet)
    return EXIT_OK


def cmd_validate(args) -> int:
    name, _, cfg = resolve(load_raw(_resolve_config_source(args.config)))
    from .simulation import hhi

    print(yaml.safe_dump(config_to_dict(name, cfg), sort_keys=False), end="")
    print(f"fleet_hhi: {hhi(cfg.producers):.1f}")
    return EXIT_OK


def _parse_values(text: str) -> list:
    try:
        parsed = json.loads(text)
        if isinstance(parsed, list):
            return parsed
        return [parsed]
    except json.JSONDecodeError:
        pass
    out = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            out.append(json.loads(chunk))
        except json.JSONDecodeError:
            out.append(chunk)
    return out


def _apply_param(raw: dict, dotted: str, value) -> dict:
    """Set one dotted-path field in a raw config mapping.

    List-of-mapping levels (producers) are addressed by the id field, e.g.
    producers.C6.strategy.alpha.
    """
    parts = dotted.split(".")
    node = raw
    trail = []
    for part in parts[:-1]:
        trail.append(part)
        if isinstance(node, dict):
            if part not in node:
                raise ConfigError([
                    f"{'.'.join(trail)}: no such config section"
                ])
            node = node[part]
        elif isinstance(node, list):
            match = next(
                (e for e in node
                 if isinstance(e, dict) and e.get("id") == part),
                None,
            )
            if match is None:
                raise ConfigError([
                    f"{'.'.join(trail)}: no entry with id {part!r}"
                ])
            node = match
        else:
            raise ConfigError([
                f"{'.'.join(trail)}: cannot descend into {type(node).__name__}"
            ])
    last = parts[-1]
    if isinstance(node, list):
        raise ConfigError([f"{dotted}: cannot assign a whole list entry"])
    if not isinstance(node, dict):
        raise ConfigError([f"{dotted}: parent is not a mapping"])
    node[last] = value
    return raw


def _slug(value) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", str(value)) or "value"


def _sweep_case(task):
    name, cfg, out_dir, quiet = task
    report = _execute_run(name, cfg, Path(out_dir), quiet)
    tail = report.daily_average_prices[-15:]
    mean_tail = (
        math.fsum(p for _, p in tail) / len(tail) if tail else float("nan")
    )
    return {
        "strategic_surplus_eur": math.fsum(report.strategic_surplus.values()),
        "total_surplus_eur": math.fsum(report.total_surplus.values()),
        "mean_daily_price_final_15_eur_mwh": mean_tail,
        "shortage_hours": report.shortage_hours,
    }


def cmd_sweep(args) -> int:
    values = _parse_values(args.values)
    if not values:
        raise ConfigError(["--values: empty value list"])
    base_raw = load_raw(_resolve_config_source(args.config))
    base_name = base_raw.get("name", "unnamed")
    out_root = Path(args.out) if args.out else Path("runs") / f"{base_name}_sweep"

    tasks = []
    for value in values:
        raw = _apply_param(json.loads(json.dumps(base_raw)), args.param, value)
        name, _, cfg = resolve(raw)
        if args.seed is not None:
            cfg = dataclasses.replace(cfg, master_seed=args.seed)
        # each sub-run gets its own derived seed so cases are independent
        cfg = dataclasses.replace(
            cfg,
            master_seed=_derived_seed(
                cfg.master_seed, f"sweep:{args.param}={value!r}"
            ),
        )
        sub_dir = out_root / f"{_slug(args.param)}_{_slug(value)}"
        tasks.append((f"{name}[{args.param}={value}]", cfg, str(sub_dir),
                      args.quiet))

    out_root.mkdir(parents=True, exist_ok=True)
    workers = min(len(tasks), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_case, tasks))
    else:
        results = [_sweep_case(t) for t in tasks]

    comparison = out_root / "comparison.csv"
    with open(comparison, "w", newline="", encoding="utf-8") as f:
        import csv

        w = csv.writer(f, lineterminator="\n")
        w.writerow([
            "value", "strategic_surplus_eur", "total_surplus_eur",
            "mean_daily_price_final_15_eur_mwh", "shortage_hours",
        ])
        for value, metrics in zip(values, results):
            w.writerow([
                value,
                f"{metrics['strategic_surplus_eur']:.6f}",
                f"{metrics['total_surplus_eur']:.6f}",
                f"{metrics['mean_daily_price_final_15_eur_mwh']:.6f}",
                metrics["shortage_hours"],
            ])
    if not args.quiet:
        print(f"sweep over {args.param}: {len(values)} runs -> {comparison}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="powerbid",
        description="Agent-based electricity market simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config",
                       help="config file path or bundled preset name")
        p.add_argument("--seed", type=int, default=None,
                       help="override the master seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--quiet", action="store_true",
                       help="suppress progress output")

    p_run = sub.add_parser("run", help="run one scenario and write outputs")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser(
        "sweep", help="run a scenario once per parameter value"
    )
    common(p_sweep)
    p_sweep.add_argument(
        "--param", required=True,
        help="dotted config path, e.g. producers.C6.strategy.alpha",
    )
    p_sweep.add_argument(
        "--values", required=True,
        help="JSON list or comma-separated values",
    )
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser(
        "validate", help="check a config and print it fully resolved"
    )
    p_val.add_argument("config",
                       help="config file path or bundled preset name")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        for line in e.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:  # runtime guard for the CLI boundary
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
