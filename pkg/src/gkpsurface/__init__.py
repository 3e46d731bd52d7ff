"""Squeezing-threshold simulator for GKP-encoded rotated surface codes under
measurement-based finite-squeezing noise."""

__version__ = "0.1.0"

from .experiment import (  # noqa: F401
    SimConfig,
    estimate_threshold,
    run_point,
    run_sample,
    run_sweep,
)
from .lattice import build_layout, fourier_byproduct_check  # noqa: F401
from .matchgraph import build_graphs  # noqa: F401
from .noise import NoiseParams, sigma2_from_db  # noqa: F401
