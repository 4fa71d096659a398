"""Flat-file outputs of a run: CSV time series, SVG charts, text summary.

hourly.csv column order is a stable contract: day, hour, day_type, load_mwh,
mcp_eur_mwh, shortage, then one bid_price/dispatched_mwh/surplus_eur triple
per producer in ascending producer-id order.  Floats carry six decimals, flags
are 0/1 integers, and the files are written byte-identically for identical
runs (no timestamps inside the CSVs or charts).
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .clearing import Bid, ClearingResult
from .forecasting import HourRecord, MarketHistory
from .simulation import ScenarioConfig, ScenarioReport

_SVG_SALT = "powerbid"


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def producer_id_order(ids) -> list[str]:
    return sorted(ids)


def write_hourly_csv(path: str | Path, history: MarketHistory,
                     producer_ids) -> None:
    ids = producer_id_order(producer_ids)
    header = ["day", "hour", "day_type", "load_mwh", "mcp_eur_mwh", "shortage"]
    for pid in ids:
        header += [
            f"{pid}_bid_price", f"{pid}_dispatched_mwh", f"{pid}_surplus_eur"
        ]
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in history.records:
            prices = {b.producer_id: b.price for b in r.bids}
            row = [
                str(r.day), str(r.hour), str(r.day_type),
                _fmt(r.load), _fmt(r.result.mcp),
                str(int(r.result.shortage)),
            ]
            for pid in ids:
                row += [
                    _fmt(prices.get(pid, 0.0)),
                    _fmt(r.result.dispatch.get(pid, 0.0)),
                    _fmt(r.surplus.get(pid, 0.0)),
                ]
            w.writerow(row)


def read_hourly_csv(path: str | Path,
                    capacities: dict[str, float] | None = None) -> MarketHistory:
    """Rebuild a MarketHistory from hourly.csv.

    The file does not store offered quantities, forecaster pairs, or decision
    tags: bid quantity is taken from ``capacities`` when given and otherwise
    falls back to the dispatched amount, forecasts and rationales come back
    empty, and marginal producers are inferred as those whose bid price
    equals the mcp.
    """
    history = MarketHistory()
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        ids = [
            col[: -len("_bid_price")]
            for col in header
            if col.endswith("_bid_price")
        ]
        for row in reader:
            vals = dict(zip(header, row))
            mcp = float(vals["mcp_eur_mwh"])
            shortage = bool(int(vals["shortage"]))
            bids, dispatch, surplus = [], {}, {}
            for pid in ids:
                price = float(vals[f"{pid}_bid_price"])
                dispatched = float(vals[f"{pid}_dispatched_mwh"])
                quantity = (
                    capacities.get(pid, dispatched)
                    if capacities
                    else dispatched
                )
                bids.append(Bid(pid, price, quantity))
                dispatch[pid] = dispatched
                surplus[pid] = float(vals[f"{pid}_surplus_eur"])
            marginal = frozenset(
                b.producer_id
                for b in bids
                if not shortage and b.price == mcp
            )
            history.append(HourRecord(
                day=int(vals["day"]),
                hour=int(vals["hour"]),
                day_type=int(vals["day_type"]),
                load=float(vals["load_mwh"]),
                bids=tuple(bids),
                result=ClearingResult(
                    mcp=mcp, dispatch=dispatch,
                    marginal_producer_ids=marginal, shortage=shortage,
                ),
                surplus=surplus,
            ))
    return history


def write_daily_csv(path: str | Path,
                    daily: list[tuple[int, float]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["day", "avg_price_eur_mwh"])
        for day, price in daily:
            w.writerow([str(day), _fmt(price)])


def write_surplus_summary_csv(path: str | Path,
                              report: ScenarioReport) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow([
            "producer_id", "preliminary_surplus_eur", "strategic_surplus_eur",
            "total_eur",
        ])
        for pid in producer_id_order(report.total_surplus):
            w.writerow([
                pid,
                _fmt(report.preliminary_surplus.get(pid, 0.0)),
                _fmt(report.strategic_surplus.get(pid, 0.0)),
                _fmt(report.total_surplus.get(pid, 0.0)),
            ])


def write_report_txt(path: str | Path, name: str, cfg: ScenarioConfig,
                     report: ScenarioReport, config_digest: str) -> None:
    lines = [
        f"scenario: {name}",
        f"config hash: {config_digest}",
        f"master seed: {cfg.master_seed}",
        f"days: {cfg.preliminary_days} preliminary + "
        f"{cfg.strategic_days} strategic",
        f"price cap: {cfg.price_cap:g} EUR/MWh",
        f"fleet HHI: {report.hhi:.1f}",
        f"shortage hours: {report.shortage_hours}",
        f"non-converged trainings: {report.non_converged_trainings}",
        "",
        f"{'producer':<12}{'preliminary EUR':>18}{'strategic EUR':>18}"
        f"{'total EUR':>18}",
    ]
    for pid in producer_id_order(report.total_surplus):
        lines.append(
            f"{pid:<12}{report.preliminary_surplus.get(pid, 0.0):>18.2f}"
            f"{report.strategic_surplus.get(pid, 0.0):>18.2f}"
            f"{report.total_surplus.get(pid, 0.0):>18.2f}"
        )
    lines.append(
        f"{'TOTAL':<12}"
        f"{math.fsum(report.preliminary_surplus.values()):>18.2f}"
        f"{math.fsum(report.strategic_surplus.values()):>18.2f}"
        f"{math.fsum(report.total_surplus.values()):>18.2f}"
    )
    if report.daily_average_prices:
        tail = report.daily_average_prices[-15:]
        mean_tail = math.fsum(p for _, p in tail) / len(tail)
        lines += [
            "",
            f"mean daily average price, final {len(tail)} days: "
            f"{mean_tail:.2f} EUR/MWh",
        ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _new_axes(width: float):
    fig, ax = plt.subplots(figsize=(width, 3.6))
    ax.grid(True, linewidth=0.3, alpha=0.5)
    return fig, ax


def _save_svg(fig, path):
    with plt.rc_context({"svg.hashsalt": _SVG_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def write_price_evolution_svg(path: str | Path, history: MarketHistory,
                              preliminary_days: int) -> None:
    hours = range(1, len(history) + 1)
    prices = [r.result.mcp for r in history.records]
    fig, ax = _new_axes(9.0)
    ax.plot(hours, prices, linewidth=0.6)
    boundary = preliminary_days * 24
    if 0 < boundary < len(history):
        ax.axvline(boundary, color="tab:red", linewidth=0.8,
                   linestyle="--", label="strategic stage begins")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("hour")
    ax.set_ylabel("market price EUR/MWh")
    ax.set_title("hourly market clearing price")
    fig.tight_layout()
    _save_svg(fig, path)


def write_daily_average_svg(path: str | Path,
                            daily: list[tuple[int, float]]) -> None:
    fig, ax = _new_axes(7.0)
    if daily:
        days = [d for d, _ in daily]
        prices = [p for _, p in daily]
        ax.plot(days, prices, marker="o", markersize=2.5, linewidth=0.9)
    ax.set_xlabel("day")
    ax.set_ylabel("daily average price EUR/MWh")
    ax.set_title("daily average market price")
    fig.tight_layout()
    _save_svg(fig, path)


def write_manifest(path: str | Path, *, name: str, config_digest: str,
                   master_seed: int, output_dir: str,
                   started_at: str, finished_at: str) -> None:
    payload = {
        "scenario": name,
        "config_hash": config_digest,
        "master_seed": master_seed,
        "output_dir": output_dir,
        "started_at": started_at,
        "finished_at": finished_at,
    }
    Path(path).write_text(
        json.dumps(payload, indent=2) + "\n", encoding="utf-8"
    )
