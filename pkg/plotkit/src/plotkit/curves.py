"""Threshold figures from gkp-sweep CSV files.

The CSV is the only interface to the simulator: required columns are
variant, weighting, gate_noise, p_fail, distance, squeezing_db, samples,
logical_x_rate, logical_z_rate, combined_rate, combined_std, seed.
Crossings are recomputed here from the rates so the plots are
self-contained.
"""

from __future__ import annotations

import csv
import math
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

REQUIRED_COLUMNS = [
    "variant",
    "weighting",
    "gate_noise",
    "p_fail",
    "distance",
    "squeezing_db",
    "samples",
    "logical_x_rate",
    "logical_z_rate",
    "combined_rate",
    "combined_std",
    "seed",
]


class SchemaError(ValueError):
    """The CSV does not conform to the sweep output schema."""


def load_rows(csv_path: str) -> list[dict]:
    with open(csv_path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(REQUIRED_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise SchemaError(f"missing columns: {sorted(missing)}")
        rows = []
        for raw in reader:
            try:
                rows.append(
                    {
                        "variant": raw["variant"],
                        "weighting": raw["weighting"],
                        "gate_noise": raw["gate_noise"],
                        "p_fail": float(raw["p_fail"]),
                        "distance": int(raw["distance"]),
                        "squeezing_db": float(raw["squeezing_db"]),
                        "samples": int(raw["samples"]),
                        "combined_rate": float(raw["combined_rate"]),
                        "combined_std": float(raw["combined_std"]),
                    }
                )
            except (KeyError, ValueError) as err:
                raise SchemaError(f"bad row {raw}: {err}") from None
    if not rows:
        raise SchemaError("no data rows")
    return rows


def _single_group(rows: list[dict]) -> list[dict]:
    keys = {(r["variant"], r["weighting"], r["gate_noise"], r["p_fail"]) for r in rows}
    if len(keys) > 1:
        raise SchemaError(
            f"CSV mixes {len(keys)} configurations; filter to one "
            "(variant, weighting, gate_noise, p_fail) group first"
        )
    return rows


def _curves_by_distance(rows: list[dict]) -> dict[int, list[tuple[float, float, float]]]:
    curves: dict[int, list[tuple[float, float, float]]] = defaultdict(list)
    for row in rows:
        curves[row["distance"]].append(
            (row["squeezing_db"], row["combined_rate"], row["combined_std"])
        )
    for dist, pts in curves.items():
        pts.sort()
        dbs = [p[0] for p in pts]
        if len(set(dbs)) != len(dbs):
            raise SchemaError(f"duplicate squeezing points for distance {dist}")
    return dict(curves)


def estimate_crossing(rows: list[dict], rate_floor: float = 1e-9) -> float | None:
    """Crossing of the two largest distances present, interpolated piecewise
    linearly in log rate over their shared squeezing grid."""
    curves = _curves_by_distance(rows)
    if len(curves) < 2:
        raise SchemaError("need at least two distances for a crossing")
    d_low, d_high = sorted(curves)[-2:]
    low = {db: r for db, r, _ in curves[d_low]}
    high = {db: r for db, r, _ in curves[d_high]}
    shared = sorted(set(low) & set(high))
    if len(shared) < 2:
        raise SchemaError("curves share fewer than two squeezing points")
    diff = [
        math.log(max(high[db], rate_floor)) - math.log(max(low[db], rate_floor))
        for db in shared
    ]
    for k in range(len(shared) - 1):
        d0, d1 = diff[k], diff[k + 1]
        if d0 > 0 >= d1:
            if d0 == d1:
                return shared[k]
            return shared[k] + (shared[k + 1] - shared[k]) * d0 / (d0 - d1)
    return None


def plot_threshold_curves(csv_path: str, out_path: str) -> float | None:
    """Logical error rate vs squeezing, one line per code distance with error
    bars on a log axis, plus a vertical marker at the estimated crossing.
    Returns the crossing (also embedded in the figure metadata)."""
    rows = _single_group(load_rows(csv_path))
    curves = _curves_by_distance(rows)
    crossing = estimate_crossing(rows) if len(curves) >= 2 else None
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for dist in sorted(curves):
        pts = curves[dist]
        dbs = [p[0] for p in pts]
        rates = [p[1] for p in pts]
        stds = [p[2] for p in pts]
        ax.errorbar(dbs, rates, yerr=stds, marker="o", capsize=2, label=f"d = {dist}")
    if crossing is not None:
        ax.axvline(crossing, color="gray", linestyle="--", linewidth=1)
        ax.annotate(
            f"{crossing:.2f} dB",
            xy=(crossing, ax.get_ylim()[0]),
            xytext=(4, 12),
            textcoords="offset points",
            fontsize=8,
            color="gray",
        )
    ax.set_yscale("log")
    ax.set_xlabel("squeezing (dB)")
    ax.set_ylabel("logical error rate")
    ax.legend()
    fig.tight_layout()
    metadata = None
    if out_path.endswith(".png"):
        metadata = {"Description": f"crossing_db={crossing}"}
    fig.savefig(out_path, dpi=150, metadata=metadata)
    plt.close(fig)
    return crossing


def plot_threshold_vs_pfail(csv_path: str, out_path: str) -> list[tuple[float, float]]:
    """Squeezing threshold as a function of the qunaught replacement
    probability; requires at least two p_fail values in the CSV."""
    rows = load_rows(csv_path)
    groups: dict[float, list[dict]] = defaultdict(list)
    for row in rows:
        groups[row["p_fail"]].append(row)
    if len(groups) < 2:
        raise SchemaError("need at least two p_fail values")
    points = []
    for p_fail in sorted(groups):
        crossing = estimate_crossing(groups[p_fail])
        if crossing is None:
            raise SchemaError(f"no threshold crossing for p_fail={p_fail}")
        points.append((p_fail, crossing))
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.plot([p for p, _ in points], [t for _, t in points], marker="s")
    ax.set_xlabel("qunaught replacement probability")
    ax.set_ylabel("squeezing threshold (dB)")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return points
