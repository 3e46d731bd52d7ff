"""Offline plotting for gkp-sweep CSV results."""

__version__ = "0.1.0"

from .curves import (  # noqa: F401
    SchemaError,
    estimate_crossing,
    load_rows,
    plot_threshold_curves,
    plot_threshold_vs_pfail,
)
