"""Teleportation-based GKP quadrature correction and its soft information:
lattice rounding, misround probabilities, probability combination, and the
probabilistic-qunaught degradation model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .noise import SQRT_PI, ModeNoise, NoiseParams, ShiftRegister, VarianceTracker

Q, P = 0, 1


def nearest_lattice(x):
    """Nearest integer multiple of sqrt(pi); half-integers round up
    (floor(x/sqrt(pi) + 1/2) convention)."""
    return SQRT_PI * np.floor(np.asarray(x, dtype=float) / SQRT_PI + 0.5)


def residual(x):
    """Deviation from the nearest lattice multiple, in [-sqrt(pi)/2, sqrt(pi)/2).

    Satisfies nearest_lattice(x) + residual(x) == x exactly.
    """
    x = np.asarray(x, dtype=float)
    return x - nearest_lattice(x)


def _num_offset_pairs(sigma2_max: float) -> int:
    # smallest K with relative truncation error < 1e-12: terms at offset f
    # (units of sqrt(pi)) are down by exp(-pi (f^2 - 1/4) / (2 sigma2))
    f = math.sqrt(0.25 + 2.0 * sigma2_max * (12.0 * math.log(10.0)) / math.pi)
    return max(2, int(math.ceil((f + 0.5) / 2.0)) + 1)


def misround_probability(z, sigma2):
    """Probability that a rounding with residual ``z`` landed an odd number of
    lattice steps from the true value, for a zero-mean Gaussian shift of
    variance ``sigma2``: the odd-lattice Gaussian sum over the all-lattice sum.

    Even in z; exactly 1/2 at |z| = sqrt(pi)/2. Sums are truncated with
    relative error below 1e-12.
    """
    z = np.asarray(z, dtype=float)
    s2 = np.asarray(sigma2, dtype=float)
    if np.any(s2 <= 0):
        raise ValueError("sigma2 must be > 0")
    u = np.abs(z) / SQRT_PI  # folded: p is even in z
    if np.any(u > 0.5 + 1e-12):
        raise ValueError("residual out of range [-sqrt(pi)/2, sqrt(pi)/2)")
    k = np.arange(1, _num_offset_pairs(float(np.max(s2))) + 1)
    # offsets in units of sqrt(pi), traversed in the same increasing order for
    # both lattices; at u = 1/2 they coincide pairwise, making the result
    # exactly 1/2
    odd_off = _interleaved_offsets(u, k, odd=True)
    even_off = _interleaved_offsets(u, k, odd=False)
    scale = -math.pi / (2.0 * s2)
    if np.ndim(scale):
        scale = scale[..., None]
    shift = scale * (u**2)[..., None] if np.ndim(u) else scale * u**2
    odd_sum = np.exp(scale * odd_off**2 - shift).sum(axis=-1)
    even_sum = np.exp(scale * even_off**2 - shift).sum(axis=-1)
    out = odd_sum / (odd_sum + even_sum)
    if out.ndim == 0:
        return float(out)
    return out


def _interleaved_offsets(u, k, odd: bool):
    """Lattice offsets |u - n| in increasing order: odd n gives
    (1-u, 1+u, 3-u, 3+u, ...), even n gives (u, 2-u, 2+u, 4-u, ...)."""
    cols = []
    if not odd:
        cols.append(u)
    for kk in k:
        base = 2 * kk - 1 if odd else 2 * kk
        cols.append(base - u)
        cols.append(base + u)
    return np.stack(cols, axis=-1)


def misround_probability_fixed(sigma2):
    """Misround probability from the variance alone: total Gaussian mass in
    the odd-lattice bins [(2n+1/2)sqrt(pi), (2n+3/2)sqrt(pi)] (two-sided)."""
    s2 = np.asarray(sigma2, dtype=float)
    if np.any(s2 <= 0):
        raise ValueError("sigma2 must be > 0")
    sigma = np.sqrt(s2)[..., None]
    kmax = max(2, int(math.ceil(9.0 * math.sqrt(float(np.max(s2))) / SQRT_PI / 2.0)) + 1)
    n = np.arange(0, kmax)
    lo = (2 * n + 0.5) * SQRT_PI / sigma
    hi = (2 * n + 1.5) * SQRT_PI / sigma
    # ndtr(-x) is the upper-tail mass; factor 2 restores the mirrored bins
    p = 2.0 * (ndtr(-lo) - ndtr(-hi)).sum(axis=-1)
    if p.ndim == 0:
        return float(p)
    return p


def combine_error_probs(probs):
    """Combine error probabilities of independent events contributing to one
    edge: p_tot = (1 - prod(1 - 2 p_i)) / 2."""
    p = np.asarray(probs, dtype=float)
    if np.any((p < 0) | (p > 0.5)):
        raise ValueError("probabilities must lie in [0, 1/2]")
    return 0.5 * (1.0 - np.prod(1.0 - 2.0 * p))


@dataclass
class QunaughtSupply:
    """Probabilistic qunaught supply: each of the two ancillas of a correction
    is independently replaced by a squeezed vacuum state with probability
    ``p_fail``, in which case only one quadrature is corrected."""

    p_fail: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_fail <= 1.0:
            raise ValueError(f"p_fail must be in [0, 1], got {self.p_fail}")


@dataclass
class CorrectionOutcome:
    m_a: float
    m_b: float
    z_q: float
    z_p: float
    p_x: float
    p_z: float
    corrected_q: bool
    corrected_p: bool


def correct_register(
    reg: ShiftRegister,
    idx,
    params: NoiseParams,
    rng: np.random.Generator,
    weighting: str = "analog",
    p_fail: float = 0.0,
    ideal: bool = False,
):
    """Teleport the modes ``idx`` of ``reg`` through fresh qunaught Bell pairs,
    in place. Returns per-mode arrays (p_x, p_z, corrected_q, corrected_p,
    m_a, m_b).

    Bell preparation interferes two qunaughts on a balanced beam-splitter; the
    input is measured jointly with one half (outcomes m_a in q, m_b in p) and
    the other half, displaced back by the nearest lattice multiple of
    m*sqrt(2), becomes the output. Misround probabilities use the residual and
    the tracked input variance (analog) or the variance alone (fixed). A
    replaced qunaught on the measured (A) side leaves only q corrected, on the
    output (B) side only p; an uncorrected quadrature passes through and
    accumulates one step of gate noise.
    """
    idx = np.atleast_1d(np.asarray(idx))
    n = idx.size
    s2g = 0.0 if ideal else params.sigma2_gkp
    if s2g > 0:
        anc1 = rng.normal(0.0, math.sqrt(s2g), size=(2, n))
        anc2 = rng.normal(0.0, math.sqrt(s2g), size=(2, n))
    else:
        anc1 = np.zeros((2, n))
        anc2 = np.zeros((2, n))
    # balanced beam-splitter on the two qunaughts (simultaneous update)
    anc1_bs = (anc1 - anc2) / math.sqrt(2.0)
    anc2_bs = (anc1 + anc2) / math.sqrt(2.0)

    if p_fail > 0 and not ideal:
        fail_a = rng.random(n) < p_fail
        fail_b = rng.random(n) < p_fail
    else:
        fail_a = np.zeros(n, dtype=bool)
        fail_b = np.zeros(n, dtype=bool)
    corr_q = ~fail_a
    corr_p = ~fail_b

    m_a = (reg.xi[Q, idx] - anc1_bs[Q]) / math.sqrt(2.0)
    m_b = (reg.xi[P, idx] + anc1_bs[P]) / math.sqrt(2.0)

    var_in = reg.var[:, idx].copy()
    z_q = residual(m_a * math.sqrt(2.0))
    z_p = residual(m_b * math.sqrt(2.0))
    z2 = var_in + s2g  # variance of the residual per quadrature
    if weighting == "analog":
        p_x = misround_probability(z_q, z2[Q])
        p_z = misround_probability(z_p, z2[P])
    elif weighting == "fixed":
        p_x = misround_probability_fixed(z2[Q])
        p_z = misround_probability_fixed(z2[P])
    elif weighting == "none":  # noiseless fault campaigns: no soft information
        p_x = np.zeros(n)
        p_z = np.zeros(n)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")
    p_x = np.atleast_1d(np.asarray(p_x, dtype=float))
    p_z = np.atleast_1d(np.asarray(p_z, dtype=float))

    new_q = anc2_bs[Q] + nearest_lattice(m_a * math.sqrt(2.0))
    new_p = anc2_bs[P] + nearest_lattice(m_b * math.sqrt(2.0))

    # uncorrected quadratures keep their shift and gain one step of gate noise
    pass_noise = (
        rng.normal(0.0, math.sqrt(params.sigma2_gate), size=(2, n))
        if params.sigma2_gate > 0
        else np.zeros((2, n))
    )
    reg.xi[Q, idx] = np.where(corr_q, new_q, reg.xi[Q, idx] + pass_noise[Q])
    reg.xi[P, idx] = np.where(corr_p, new_p, reg.xi[P, idx] + pass_noise[P])
    reg.var[Q, idx] = np.where(corr_q, s2g, var_in[Q] + params.sigma2_gate)
    reg.var[P, idx] = np.where(corr_p, s2g, var_in[P] + params.sigma2_gate)
    # a skipped quadrature contributes no edge probability
    p_x = np.where(corr_q, p_x, 0.0)
    p_z = np.where(corr_p, p_z, 0.0)
    return p_x, p_z, corr_q, corr_p, m_a, m_b


def teleport_correct(
    mode: ModeNoise,
    tracker: VarianceTracker,
    params: NoiseParams,
    supply: QunaughtSupply,
    rng: np.random.Generator,
    weighting: str = "analog",
    ideal: bool = False,
) -> CorrectionOutcome:
    """Single-mode GKP quadrature correction; mutates ``mode``/``tracker``."""
    reg = ShiftRegister(1)
    reg.xi[:, 0] = (mode.xi_q, mode.xi_p)
    reg.var[:, 0] = (tracker.var_q, tracker.var_p)
    p_x, p_z, cq, cp, m_a, m_b = correct_register(
        reg, np.array([0]), params, rng, weighting, supply.p_fail, ideal
    )
    mode.xi_q, mode.xi_p = reg.xi[:, 0]
    tracker.var_q, tracker.var_p = reg.var[:, 0]
    return CorrectionOutcome(
        m_a=float(m_a[0]),
        m_b=float(m_b[0]),
        z_q=float(residual(m_a[0] * math.sqrt(2.0))),
        z_p=float(residual(m_b[0] * math.sqrt(2.0))),
        p_x=float(p_x[0]),
        p_z=float(p_z[0]),
        corrected_q=bool(cq[0]),
        corrected_p=bool(cp[0]),
    )
