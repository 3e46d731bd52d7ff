"""Command-line front end: squeezing/distance sweeps with CSV or JSON output.

Exit codes: 0 success, 2 usage error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
import time

from . import __version__
from .experiment import PointResult, SimConfig, run_point
from .matchgraph import VARIANTS, build_graphs

CSV_COLUMNS = [
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


def _parse_float_list(text: str) -> list[float]:
    """Comma list ("11,12.5") or inclusive range ("start:stop:step")."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise argparse.ArgumentTypeError(f"malformed range {text!r}, want start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise argparse.ArgumentTypeError(f"malformed range {text!r}")
        out = []
        k = 0
        while start + k * step <= stop + 1e-9:
            out.append(round(start + k * step, 10))
            k += 1
        return out
    try:
        return [float(p) for p in text.split(",") if p]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError as err:
        raise argparse.ArgumentTypeError(str(err)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gkp-sweep",
        description="Monte Carlo logical-error-rate sweeps of GKP-encoded "
        "rotated surface codes under finite-squeezing noise.",
    )
    parser.add_argument("--config", help="JSON file with sweep settings (flags override)")
    parser.add_argument("--distance", type=_parse_int_list, help="code distances, e.g. 3,5")
    parser.add_argument("--db", type=_parse_float_list,
                        help="squeezing levels in dB: list 11,12.5 or range 11:15:0.5")
    parser.add_argument("--variant", choices=VARIANTS)
    parser.add_argument("--weighting", choices=("analog", "fixed"))
    parser.add_argument("--gate-noise", choices=("on", "off"))
    parser.add_argument("--p-fail", type=float, help="qunaught replacement probability")
    parser.add_argument("--samples", type=int, help="max samples per point")
    parser.add_argument("--stop-errors", type=int, help="stop after this many logical events")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--bootstrap", type=int, help="bootstrap resamples for error bars")
    parser.add_argument("--workers", type=int, help="parallel worker processes")
    parser.add_argument("--out", help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"), dest="fmt")
    parser.add_argument("--dump-graphs", metavar="PATH",
                        help="write the matching graphs of the first sweep point as text")
    return parser


_DEFAULTS = {
    "distance": [3],
    "db": [12.0],
    "variant": "surface-4-gkp",
    "weighting": "analog",
    "gate_noise": True,
    "p_fail": 0.0,
    "samples": 100_000,
    "stop_errors": 500,
    "seed": 0,
    "bootstrap": 1000,
    "workers": 1,
    "out": None,
    "fmt": "csv",
}


def parse_cli(argv: list[str]) -> dict:
    """Merged settings: defaults, then config file, then explicit flags."""
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = dict(_DEFAULTS)
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            parser.error(f"cannot read config file: {err}")
        unknown = set(file_cfg) - set(_DEFAULTS)
        if unknown:
            parser.error(f"unknown config keys: {sorted(unknown)}")
        settings.update(file_cfg)
    overrides = {
        "distance": args.distance,
        "db": args.db,
        "variant": args.variant,
        "weighting": args.weighting,
        "gate_noise": {"on": True, "off": False}.get(args.gate_noise),
        "p_fail": args.p_fail,
        "samples": args.samples,
        "stop_errors": args.stop_errors,
        "seed": args.seed,
        "bootstrap": args.bootstrap,
        "workers": args.workers,
        "out": args.out,
        "fmt": args.fmt,
    }
    settings.update({k: v for k, v in overrides.items() if v is not None})
    settings["dump_graphs"] = args.dump_graphs
    try:
        settings["points"] = [
            SimConfig(
                distance=int(d),
                squeezing_db=float(db),
                variant=settings["variant"],
                weighting=settings["weighting"],
                gate_noise=bool(settings["gate_noise"]),
                p_fail=float(settings["p_fail"]),
                max_samples=int(settings["samples"]),
                stop_errors=int(settings["stop_errors"]),
                seed=int(settings["seed"]),
                bootstrap_resamples=int(settings["bootstrap"]),
            )
            for d in settings["distance"]
            for db in settings["db"]
        ]
    except ValueError as err:
        parser.error(str(err))
    return settings


def result_row(config: SimConfig, result: PointResult) -> dict:
    return {
        "variant": config.variant,
        "weighting": config.weighting,
        "gate_noise": "on" if config.gate_noise else "off",
        "p_fail": repr(config.p_fail),
        "distance": config.distance,
        "squeezing_db": f"{config.squeezing_db:.4f}",
        "samples": result.samples,
        "logical_x_rate": repr(result.x_rate),
        "logical_z_rate": repr(result.z_rate),
        "combined_rate": repr(result.combined_rate),
        "combined_std": repr(result.combined_std),
        "seed": config.seed,
    }


def emit_results(rows: list[dict], fmt: str, out, manifest: dict | None = None) -> None:
    """Write completed sweep rows as CSV (fixed column order) or JSON."""
    if fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    else:
        json.dump(manifest, out, indent=2)
        out.write("\n")


def main(argv: list[str] | None = None) -> int:
    settings = parse_cli(sys.argv[1:] if argv is None else argv)
    started = time.strftime("%Y-%m-%dT%H:%M:%S")
    try:
        if settings["dump_graphs"]:
            first = settings["points"][0]
            graphs = build_graphs(first.distance, first.variant)
            with open(settings["dump_graphs"], "w", encoding="utf-8") as fh:
                fh.write(graphs.dump() + "\n")
        rows = []
        results = []
        for cfg in settings["points"]:
            res = run_point(cfg, workers=int(settings["workers"]))
            rows.append(result_row(cfg, res))
            results.append((cfg, res))
        manifest = {
            "tool": "gkp-sweep",
            "version": __version__,
            "started": started,
            "finished": time.strftime("%Y-%m-%dT%H:%M:%S"),
            "settings": {
                k: v for k, v in settings.items() if k not in ("points", "dump_graphs", "out")
            },
            "points": [
                {**dataclasses.asdict(cfg), **dataclasses.asdict(res)}
                for cfg, res in results
            ],
        }
        if settings["out"]:
            with open(settings["out"], "w", encoding="utf-8", newline="") as fh:
                emit_results(rows, settings["fmt"], fh, manifest)
        else:
            emit_results(rows, settings["fmt"], sys.stdout, manifest)
    except (OSError, RuntimeError) as err:
        print(f"gkp-sweep: error: {err}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
