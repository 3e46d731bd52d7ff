"""Command-line entry points for the two figure styles."""

from __future__ import annotations

import argparse
import sys

from .curves import SchemaError, plot_threshold_curves, plot_threshold_vs_pfail


def _run(render, description: str, argv: list[str] | None) -> int:
    parser = argparse.ArgumentParser(description=description)
    parser.add_argument("csv", help="gkp-sweep CSV results")
    parser.add_argument("out", help="output image path (png or svg)")
    args = parser.parse_args(argv)
    try:
        result = render(args.csv, args.out)
    except (SchemaError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(f"wrote {args.out} ({result})")
    return 0


def curves_main(argv: list[str] | None = None) -> int:
    return _run(
        plot_threshold_curves,
        "Logical-error-rate curves per code distance with the threshold marker.",
        argv,
    )


def pfail_main(argv: list[str] | None = None) -> int:
    return _run(
        plot_threshold_vs_pfail,
        "Squeezing threshold vs qunaught replacement probability.",
        argv,
    )


if __name__ == "__main__":
    sys.exit(curves_main())
