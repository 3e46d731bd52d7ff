"""Monte Carlo driver: full memory samples (d noisy rounds + 1 ideal round),
sweeps over squeezing and distance, bootstrap error bars, and threshold
estimation from curve crossings.

Each sample derives its random stream from (seed, sample_index), so results
are bit-identical for any worker count; the stopping condition is evaluated
on the deterministic sample order.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import gkp
from .decoder import GraphDecoder, detect_logical_error, edge_weights, highlights_from_bits
from .lattice import syndrome_matrix
from .matchgraph import MatchingGraphs, VARIANTS, X, Z, build_graphs
from .noise import SQRT_PI, NoiseParams, ShiftRegister, sigma2_from_db

Q, P = 0, 1
WEIGHTINGS = ("analog", "fixed")


@dataclass(frozen=True)
class SimConfig:
    distance: int
    squeezing_db: float
    variant: str = "surface-4-gkp"
    weighting: str = "analog"
    gate_noise: bool = True
    p_fail: float = 0.0
    max_samples: int = 100_000
    stop_errors: int = 500
    seed: int = 0
    bootstrap_resamples: int = 1000

    def __post_init__(self) -> None:
        if self.distance < 3 or self.distance % 2 == 0:
            raise ValueError("distance must be an odd integer >= 3")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(f"weighting must be one of {WEIGHTINGS}")
        if not 0.0 <= self.p_fail <= 1.0:
            raise ValueError("p_fail must be in [0, 1]")
        if self.max_samples < 1 or self.stop_errors < 1:
            raise ValueError("max_samples and stop_errors must be >= 1")
        sigma2_from_db(self.squeezing_db)  # validates the range

    def noise_params(self) -> NoiseParams:
        return NoiseParams.from_db(self.squeezing_db, gate_noise=self.gate_noise)


class SampleEngine:
    """Vectorised per-sample simulator bound to one (distance, variant)."""

    def __init__(self, graphs: MatchingGraphs):
        self.graphs = graphs
        lay = graphs.layout
        self.layout = lay
        self.rounds = graphs.rounds
        self.data_ids = np.arange(lay.n_data)
        self.mz = np.fromiter(lay.mz_ids, dtype=np.int64)
        self.mx = np.fromiter(lay.mx_ids, dtype=np.int64)
        self.measure_ids = np.concatenate([self.mz, self.mx])
        self.all_ids = np.arange(lay.n_qubits)
        self.cz_gates = {}
        self.cx_gates = {}
        self.idle = {}
        for step in (1, 2, 3, 4):
            gates = lay.schedule[step]
            czm = [g.measure for g in gates if g.variant.base == "cz"]
            czd = [g.data for g in gates if g.variant.base == "cz"]
            cxm = [g.measure for g in gates if g.variant.base == "cx"]
            cxd = [g.data for g in gates if g.variant.base == "cx"]
            signs = {g.variant.sign for g in gates if g.variant.base == "cx"}
            assert len(signs) == 1
            self.cz_gates[step] = (np.array(czm), np.array(czd))
            self.cx_gates[step] = (np.array(cxm), np.array(cxd), signs.pop())
            busy = set(czm) | set(czd) | set(cxm) | set(cxd)
            self.idle[step] = np.array(sorted(set(range(lay.n_qubits)) - busy), dtype=np.int64)
        self.zmat = syndrome_matrix(lay, "z")
        self.xmat = syndrome_matrix(lay, "x")
        self.decoders = {"z": GraphDecoder(graphs, "z"), "x": GraphDecoder(graphs, "x")}
        self._pow2 = 1 << self.data_ids

    # -- one sample --------------------------------------------------------

    def run(
        self,
        params: NoiseParams,
        rng: np.random.Generator,
        weighting: str = "analog",
        p_fail: float = 0.0,
        inject: tuple[tuple[int, int, int, int], ...] = (),
        collect: bool = True,
        weights_override: np.ndarray | None = None,
    ) -> tuple[bool, bool]:
        """Simulate one memory sample and decode. ``inject`` lists extra
        sqrt(pi) shifts (round, step, qubit, pauli) applied after that step's
        corrections; with ``collect=False`` no probabilities are routed and
        ``weights_override`` supplies the edge weights instead."""
        graphs = self.graphs
        lay = self.layout
        four_step = graphs.variant == "surface-4-gkp"
        reg = ShiftRegister(lay.n_qubits)
        acc = np.ones(graphs.n_edges)
        bits_z = np.zeros((lay.n_mz, self.rounds + 1), dtype=np.int64)
        bits_x = np.zeros((lay.n_mx, self.rounds + 1), dtype=np.int64)

        reg.init_gkp(self.data_ids, params.sigma2_gkp, rng)
        for rnd in range(1, self.rounds + 1):
            reg.init_gkp(self.measure_ids, params.sigma2_gkp, rng)
            if not four_step:
                self._correct(reg, rnd, 0, self.data_ids, params, rng, weighting, p_fail, acc, collect)
            self._inject(reg, inject, rnd, 0)
            for step in (1, 2, 3, 4):
                czm, czd = self.cz_gates[step]
                reg.apply_cz(czm, czd, params.sigma2_gate, rng)
                cxm, cxd, sign = self.cx_gates[step]
                reg.apply_cx(cxm, cxd, sign, params.sigma2_gate, rng)
                if self.idle[step].size:
                    reg.add_idle_noise(self.idle[step], params.sigma2_gate, rng)
                if four_step:
                    idx = self.data_ids if step == 4 else self.all_ids
                    self._correct(reg, rnd, step, idx, params, rng, weighting, p_fail, acc, collect)
                self._inject(reg, inject, rnd, step)
            self._readout(reg, rnd, bits_z, bits_x, params, weighting, acc, collect)

        # ideal round: perfect data corrections, then exact syndrome parities
        p_x, p_z, _, _, _, _ = gkp.correct_register(
            reg, self.data_ids, params, rng,
            weighting if collect else "none", p_fail=0.0, ideal=True,
        )
        if collect:
            self._accumulate(acc, graphs.route_final[self.data_ids, X], p_x)
            self._accumulate(acc, graphs.route_final[self.data_ids, Z], p_z)
        x_bits = (np.floor(reg.xi[Q, self.data_ids] / SQRT_PI + 0.5).astype(np.int64)) & 1
        z_bits = (np.floor(reg.xi[P, self.data_ids] / SQRT_PI + 0.5).astype(np.int64)) & 1
        bits_z[:, self.rounds] = (self.zmat @ x_bits) & 1
        bits_x[:, self.rounds] = (self.xmat @ z_bits) & 1

        weights = weights_override if weights_override is not None else edge_weights(graphs, acc)
        x_corr, _ = self.decoders["z"].decode(weights, highlights_from_bits(graphs, bits_z, "z"))
        z_corr, _ = self.decoders["x"].decode(weights, highlights_from_bits(graphs, bits_x, "x"))
        x_mask = int(np.sum(self._pow2[x_bits.astype(bool)]))
        z_mask = int(np.sum(self._pow2[z_bits.astype(bool)]))
        return detect_logical_error(lay, x_mask, z_mask, x_corr, z_corr)

    def _correct(self, reg, rnd, step, idx, params, rng, weighting, p_fail, acc, collect):
        p_x, p_z, _, _, _, _ = gkp.correct_register(
            reg, idx, params, rng, weighting if collect else "none", p_fail
        )
        if collect:
            self._accumulate(acc, self.graphs.route_corr[rnd, step, idx, X], p_x)
            self._accumulate(acc, self.graphs.route_corr[rnd, step, idx, Z], p_z)

    def _readout(self, reg, rnd, bits_z, bits_x, params, weighting, acc, collect):
        out_z, bit_z = reg.measure(self.mz, P)
        out_x, bit_x = reg.measure(self.mx, Q)
        bits_z[:, rnd - 1] = bit_z
        bits_x[:, rnd - 1] = bit_x
        if not collect:
            return
        for out, ids, quad in ((out_z, self.mz, P), (out_x, self.mx, Q)):
            var = reg.var[quad, ids]
            if weighting == "analog":
                p = gkp.misround_probability(gkp.residual(out), var)
            else:
                p = gkp.misround_probability_fixed(var)
            self._accumulate(acc, self.graphs.route_readout[rnd, ids], np.atleast_1d(p))

    @staticmethod
    def _accumulate(acc, eidx, p):
        valid = eidx >= 0
        if np.any(valid):
            np.multiply.at(acc, eidx[valid], 1.0 - 2.0 * p[valid])

    @staticmethod
    def _inject(reg, inject, rnd, step):
        for r, s, q, pauli in inject:
            if r == rnd and s == step:
                reg.xi[Q if pauli == X else P, q] += SQRT_PI


@lru_cache(maxsize=16)
def get_engine(distance: int, variant: str) -> SampleEngine:
    return SampleEngine(build_graphs(distance, variant))


def sample_rng(seed: int, sample_index: int) -> np.random.Generator:
    """Splittable per-sample stream: identical for any execution order."""
    return np.random.default_rng([seed, sample_index])


def run_sample(config: SimConfig, sample_index: int) -> tuple[bool, bool]:
    """One Monte Carlo sample of the configured memory experiment."""
    engine = get_engine(config.distance, config.variant)
    return engine.run(
        config.noise_params(),
        sample_rng(config.seed, sample_index),
        weighting=config.weighting,
        p_fail=config.p_fail,
    )


@dataclass(frozen=True)
class PointResult:
    samples: int
    x_events: int
    z_events: int
    combined_events: int
    x_rate: float
    z_rate: float
    combined_rate: float
    x_std: float
    z_std: float
    combined_std: float


def _run_chunk(config: SimConfig, start: int, count: int) -> np.ndarray:
    out = np.zeros((count, 2), dtype=np.uint8)
    for k in range(count):
        lx, lz = run_sample(config, start + k)
        out[k] = (lx, lz)
    return out


def run_point(config: SimConfig, workers: int = 1, chunk: int = 256) -> PointResult:
    """Run samples until max_samples or until stop_errors combined logical X
    and Z events have occurred (counted over the deterministic sample order);
    bootstrap standard deviations of the rates."""
    get_engine(config.distance, config.variant)  # built before forking workers
    flags = np.zeros((0, 2), dtype=np.uint8)
    start = 0
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while start < config.max_samples:
            counts = []
            while len(counts) < max(1, workers) and start < config.max_samples:
                n = min(chunk, config.max_samples - start)
                counts.append((start, n))
                start += n
            if pool is None:
                results = [_run_chunk(config, s, n) for s, n in counts]
            else:
                results = list(pool.map(_run_chunk, [config] * len(counts), *zip(*counts)))
            flags = np.vstack([flags] + results)
            cum = np.cumsum(flags.sum(axis=1))
            hit = np.nonzero(cum >= config.stop_errors)[0]
            if hit.size:
                flags = flags[: hit[0] + 1]
                break
    finally:
        if pool is not None:
            pool.shutdown()
    n = len(flags)
    x_events = int(flags[:, 0].sum())
    z_events = int(flags[:, 1].sum())
    combined_events = int(np.any(flags, axis=1).sum())
    boot = np.random.default_rng([config.seed, 0xB0_07])
    stds = []
    for events in (x_events, z_events, combined_events):
        draws = boot.binomial(n, events / n, size=config.bootstrap_resamples) / n
        stds.append(float(draws.std()))
    return PointResult(
        samples=n,
        x_events=x_events,
        z_events=z_events,
        combined_events=combined_events,
        x_rate=x_events / n,
        z_rate=z_events / n,
        combined_rate=combined_events / n,
        x_std=stds[0],
        z_std=stds[1],
        combined_std=stds[2],
    )


def run_sweep(
    base: SimConfig, distances, dbs, workers: int = 1
) -> list[tuple[SimConfig, PointResult]]:
    """Cartesian sweep over distances and squeezing levels."""
    out = []
    for d in distances:
        for db in dbs:
            cfg = replace(base, distance=int(d), squeezing_db=float(db))
            out.append((cfg, run_point(cfg, workers=workers)))
    return out


def estimate_threshold(
    curve_low_d: list[tuple[float, float]],
    curve_high_d: list[tuple[float, float]],
    rate_floor: float = 1e-9,
) -> float | None:
    """Crossing of two logical-rate curves (squeezing dB vs rate) on a shared
    grid, interpolated piecewise linearly in log rate. Returns None when the
    curves do not cross inside the window."""
    a = sorted(curve_low_d)
    b = sorted(curve_high_d)
    dbs = [p[0] for p in a]
    if dbs != [p[0] for p in b]:
        raise ValueError("curves must share their squeezing grid")
    diff = [
        math.log(max(rb, rate_floor)) - math.log(max(ra, rate_floor))
        for (_, ra), (_, rb) in zip(a, b)
    ]
    for k in range(len(dbs) - 1):
        d0, d1 = diff[k], diff[k + 1]
        if d0 > 0 >= d1:
            if d0 == d1:
                return dbs[k]
            return dbs[k] + (dbs[k + 1] - dbs[k]) * d0 / (d0 - d1)
    return None
