"""Stochastic quadrature-shift simulation: per-mode noise variables, two-mode
gate updates, homodyne readout, and independent marginal-variance tracking.

Units are hbar = 1, vacuum variance 1/2. A squeezing level of ``db`` decibels
relative to vacuum corresponds to a squeezed-quadrature variance
``sigma2 = 0.5 * 10**(-db/10)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

SQRT_PI = math.sqrt(math.pi)

Q, P = 0, 1  # quadrature row indices in ShiftRegister arrays


@dataclass
class NoiseParams:
    """Noise variances of the simulation.

    ``sigma2`` is the squeezed-quadrature variance e^{-2r}/2 of the resource
    squeezed states. By default the GKP spike variance equals ``sigma2`` and
    each teleportation step adds symmetric gate noise of variance
    ``2 * sigma2``; the gate-noise-free variant sets ``sigma2_gate = 0``.
    """

    sigma2: float
    sigma2_gkp: float = field(default=None)  # type: ignore[assignment]
    sigma2_gate: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.sigma2 <= 0:
            raise ValueError(f"sigma2 must be > 0, got {self.sigma2}")
        if self.sigma2_gkp is None:
            self.sigma2_gkp = self.sigma2
        if self.sigma2_gate is None:
            self.sigma2_gate = 2.0 * self.sigma2
        if self.sigma2_gkp < 0 or self.sigma2_gate < 0:
            raise ValueError("variances must be non-negative")

    @classmethod
    def from_db(cls, db: float, gate_noise: bool = True) -> "NoiseParams":
        s2 = sigma2_from_db(db)
        return cls(sigma2=s2, sigma2_gate=(2.0 * s2 if gate_noise else 0.0))


def sigma2_from_db(db: float) -> float:
    """Squeezed-quadrature variance for a squeezing level in dB below vacuum."""
    if db < 0:
        raise ValueError(f"squeezing level must be >= 0 dB, got {db}")
    return 0.5 * 10.0 ** (-db / 10.0)


@dataclass
class ModeNoise:
    """Quadrature shift pair of a single mode."""

    xi_q: float = 0.0
    xi_p: float = 0.0


@dataclass
class VarianceTracker:
    """Marginal shift variances of a single mode.

    Updated by the same linear rules as the shifts with all noise sources
    treated as independent; exact as long as no noise variable reaches the
    same quadrature along two interfering paths.
    """

    var_q: float = 0.0
    var_p: float = 0.0


class ShiftRegister:
    """Vectorised shift + variance state for a register of modes.

    ``xi`` and ``var`` have shape (2, n) with rows (q, p). All gate operations
    accept integer index arrays and act on disjoint mode pairs simultaneously.
    """

    def __init__(self, n: int):
        self.n = n
        self.xi = np.zeros((2, n))
        self.var = np.zeros((2, n))

    def init_gkp(self, idx, sigma2_gkp: float, rng: np.random.Generator) -> None:
        """(Re)initialise modes as approximate GKP states: shifts drawn from
        N(0, sigma_GKP) in both quadratures, tracked variance sigma2_GKP."""
        if sigma2_gkp > 0:
            self.xi[:, idx] = rng.normal(0.0, math.sqrt(sigma2_gkp), size=(2, np.size(idx)))
        else:
            self.xi[:, idx] = 0.0
        self.var[:, idx] = sigma2_gkp

    def apply_cz(self, i, j, sigma2_gate: float, rng: np.random.Generator) -> None:
        """C_Z(1) on mode pairs (i, j): p_i += q_j, p_j += q_i, then gate noise."""
        qi = self.xi[Q, i].copy()
        self.xi[P, i] += self.xi[Q, j]
        self.xi[P, j] += qi
        vqi = self.var[Q, i].copy()
        self.var[P, i] += self.var[Q, j]
        self.var[P, j] += vqi
        self._add_gate_noise((i, j), sigma2_gate, rng)

    def apply_cx(self, i, j, sign, sigma2_gate: float, rng: np.random.Generator) -> None:
        """C_X(sign) on mode pairs (i, j): q_i += sign*p_j, q_j += sign*p_i."""
        pi = self.xi[P, i].copy()
        self.xi[Q, i] += sign * self.xi[P, j]
        self.xi[Q, j] += sign * pi
        vpi = self.var[P, i].copy()
        self.var[Q, i] += self.var[P, j]
        self.var[Q, j] += vpi
        self._add_gate_noise((i, j), sigma2_gate, rng)

    def _add_gate_noise(self, idx_groups, sigma2_gate: float, rng) -> None:
        # noise is output-referred: added after the linear coupling
        for idx in idx_groups:
            if sigma2_gate > 0:
                self.xi[:, idx] += rng.normal(
                    0.0, math.sqrt(sigma2_gate), size=(2, np.size(idx))
                )
            self.var[:, idx] += sigma2_gate

    def add_idle_noise(self, idx, sigma2_gate: float, rng: np.random.Generator) -> None:
        """Teleportation noise for modes without a two-mode gate this step:
        idle modes still teleport and acquire the same symmetric gate noise."""
        self._add_gate_noise((idx,), sigma2_gate, rng)

    def measure(self, idx, quad: int):
        """Homodyne readout of one quadrature: outcome is the raw shift, the
        bit is the parity of the nearest sqrt(pi) multiple. No readout noise."""
        outcome = self.xi[quad, idx]
        bit = np.floor(outcome / SQRT_PI + 0.5).astype(np.int64) & 1
        return outcome, bit


def _pair_register(i: ModeNoise, j: ModeNoise, ti: VarianceTracker, tj: VarianceTracker) -> ShiftRegister:
    reg = ShiftRegister(2)
    reg.xi[:, 0] = (i.xi_q, i.xi_p)
    reg.xi[:, 1] = (j.xi_q, j.xi_p)
    reg.var[:, 0] = (ti.var_q, ti.var_p)
    reg.var[:, 1] = (tj.var_q, tj.var_p)
    return reg


def _writeback(reg: ShiftRegister, i: ModeNoise, j: ModeNoise, ti: VarianceTracker, tj: VarianceTracker) -> None:
    i.xi_q, i.xi_p = reg.xi[:, 0]
    j.xi_q, j.xi_p = reg.xi[:, 1]
    ti.var_q, ti.var_p = reg.var[:, 0]
    tj.var_q, tj.var_p = reg.var[:, 1]


def init_gkp_mode(
    params: NoiseParams, rng: np.random.Generator, ideal: bool = False
) -> tuple[ModeNoise, VarianceTracker]:
    """Fresh GKP mode; ``ideal`` gives exactly zero shifts and variances."""
    if ideal:
        return ModeNoise(0.0, 0.0), VarianceTracker(0.0, 0.0)
    reg = ShiftRegister(1)
    reg.init_gkp(np.array([0]), params.sigma2_gkp, rng)
    return ModeNoise(*reg.xi[:, 0]), VarianceTracker(*reg.var[:, 0])


def apply_cz(
    i: ModeNoise,
    j: ModeNoise,
    trackers: tuple[VarianceTracker, VarianceTracker],
    params: NoiseParams,
    rng: np.random.Generator,
) -> None:
    """In-place C_Z(1) update of a single mode pair."""
    if i is j:
        raise ValueError("apply_cz requires two distinct modes")
    reg = _pair_register(i, j, *trackers)
    reg.apply_cz(np.array([0]), np.array([1]), params.sigma2_gate, rng)
    _writeback(reg, i, j, *trackers)


def apply_cx(
    i: ModeNoise,
    j: ModeNoise,
    sign: int,
    trackers: tuple[VarianceTracker, VarianceTracker],
    params: NoiseParams,
    rng: np.random.Generator,
) -> None:
    """In-place C_X(sign) update of a single mode pair, sign in {+1, -1}."""
    if sign not in (+1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign}")
    reg = _pair_register(i, j, *trackers)
    reg.apply_cx(np.array([0]), np.array([1]), sign, params.sigma2_gate, rng)
    _writeback(reg, i, j, *trackers)


def measure_homodyne(mode: ModeNoise, quadrature: str) -> tuple[float, int]:
    """Read out one quadrature: returns (outcome, bit) with bit the parity of
    the nearest integer multiple of sqrt(pi)."""
    if quadrature not in ("q", "p"):
        raise ValueError(f"quadrature must be 'q' or 'p', got {quadrature!r}")
    outcome = mode.xi_q if quadrature == "q" else mode.xi_p
    bit = int(math.floor(outcome / SQRT_PI + 0.5)) & 1
    return outcome, bit
