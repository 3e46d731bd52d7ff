"""Acceptance criteria, each at its stated tolerance.

Every test prints one `ACCEPTANCE <criterion>: PASS/FAIL` line (visible with
`pytest -s` or in the captured output of failures). The Monte Carlo criteria
use up to 2e4 samples per point with the 500-combined-error stopping rule and
take tens of minutes in total.
"""

import itertools
import math

import numpy as np
import pytest

from gkpsurface import algebra as alg
from gkpsurface import gkp
from gkpsurface.decoder import GraphDecoder, detect_logical_error
from gkpsurface.experiment import (
    SimConfig,
    estimate_threshold,
    get_engine,
    run_point,
    run_sweep,
)
from gkpsurface.matchgraph import X, Z, build_graphs
from gkpsurface.noise import SQRT_PI, NoiseParams, ShiftRegister

pytestmark = pytest.mark.acceptance

WORKERS = 2
SEED = 2026
MC = dict(max_samples=20_000, stop_errors=500, seed=SEED)


def report(name: str, ok: bool, detail: str = "") -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, f"{name}: {detail}"


def curves(rows, distance):
    return [
        (cfg.squeezing_db, res.combined_rate)
        for cfg, res in rows
        if cfg.distance == distance
    ]


def sweep_crossing(dbs, **kw):
    base = SimConfig(distance=3, squeezing_db=dbs[0], **MC, **kw)
    rows = run_sweep(base, [3, 5], dbs, workers=WORKERS)
    return rows, estimate_threshold(curves(rows, 3), curves(rows, 5))


@pytest.fixture(scope="module")
def analog_crossing():
    dbs = [11.0 + 0.5 * k for k in range(9)]  # 11 .. 15
    rows, crossing = sweep_crossing(dbs)
    return rows, crossing


class TestThresholds:
    def test_threshold_reproduction(self, analog_crossing):
        """surface-4-GKP, analog weighting, gate noise on: 12.7 +- 1.0 dB."""
        _, crossing = analog_crossing
        ok = crossing is not None and 11.7 <= crossing <= 13.7
        report("threshold-reproduction", ok, f"crossing = {crossing} dB (12.7 ± 1.0)")

    def test_rate_monotonicity_in_noise(self, analog_crossing):
        """For fixed distance the rates are non-increasing in squeezing
        within error bars (non-decreasing in noise)."""
        rows, _ = analog_crossing
        ok = True
        for d in (3, 5):
            pts = sorted(
                (cfg.squeezing_db, res.combined_rate, res.combined_std)
                for cfg, res in rows
                if cfg.distance == d
            )
            for (_, r0, s0), (_, r1, s1) in zip(pts, pts[1:]):
                ok &= r1 <= r0 + 4 * math.hypot(s0, s1)
        report("rate-monotonicity", ok, "rates non-increasing in squeezing")

    def test_variant_ordering(self):
        """surface-GKP is worse than surface-4-GKP at 15 dB by >= 3 sigma and
        its d3/d5 crossing lies above 15.5 dB."""
        res = {}
        for variant in ("surface-gkp", "surface-4-gkp"):
            cfg = SimConfig(distance=3, squeezing_db=15.0, variant=variant, **MC)
            res[variant] = run_point(cfg, workers=WORKERS)
        gap = res["surface-gkp"].combined_rate - res["surface-4-gkp"].combined_rate
        sigma = math.hypot(res["surface-gkp"].combined_std, res["surface-4-gkp"].combined_std)
        ordering_ok = gap >= 3 * sigma

        dbs = [14.0, 14.5, 15.0, 15.5]
        rows, crossing = sweep_crossing(dbs, variant="surface-gkp")
        c3, c5 = dict(curves(rows, 3)), dict(curves(rows, 5))
        below = all(c5[db] > c3[db] for db in dbs)
        crossing_ok = crossing is None and below
        report(
            "variant-ordering",
            ordering_ok and crossing_ok,
            f"gap at 15 dB = {gap:.4f} ({gap/max(sigma,1e-12):.1f} sigma); "
            f"surface-GKP crossing in [14, 15.5] = {crossing} (needs none)",
        )

    def test_gate_noise_free_threshold(self):
        """sigma_gate = 0 variant: 10.2 +- 1.0 dB."""
        dbs = [9.0, 9.5, 10.0, 10.5, 11.0, 11.5]
        _, crossing = sweep_crossing(dbs, gate_noise=False)
        ok = crossing is not None and 9.2 <= crossing <= 11.2
        report("gate-noise-free-threshold", ok, f"crossing = {crossing} dB (10.2 ± 1.0)")

    def test_fixed_weighting_threshold(self, analog_crossing):
        """Variance-only weighting: 13.6 +- 1.0 dB and above the analog
        crossing obtained from the same seeds."""
        _, analog = analog_crossing
        dbs = [12.5, 13.0, 13.5, 14.0, 14.5, 15.0]
        _, crossing = sweep_crossing(dbs, weighting="fixed")
        ok = crossing is not None and 12.6 <= crossing <= 14.6 and crossing > analog
        report(
            "fixed-weighting-threshold",
            ok,
            f"crossing = {crossing} dB (13.6 ± 1.0), analog = {analog} dB",
        )

    def test_qunaught_supply_monotone(self, analog_crossing):
        """Thresholds at p_fail in {0, 0.05, 0.1} increase monotonically."""
        _, th0 = analog_crossing
        dbs = [12.0, 12.5, 13.0, 13.5, 14.0, 14.5]
        ths = {0.0: th0}
        for p_fail in (0.05, 0.1):
            _, ths[p_fail] = sweep_crossing(dbs, p_fail=p_fail)
        ok = (
            all(t is not None for t in ths.values())
            and ths[0.0] < ths[0.05] < ths[0.1]
        )
        report(
            "qunaught-supply-monotone",
            ok,
            f"thresholds = {[(p, round(t, 3) if t else None) for p, t in sorted(ths.items())]}",
        )


class TestAlgebraSuite:
    def test_algebra_suite(self):
        """All four published two-mode gates and both displacement matrices
        entrywise to 1e-10; gate noise e^{-2r}; symplectic to 1e-10."""
        ok = True
        detail = []
        cases = [
            ("cz_post", 1.0), ("cz_pre", 1.0), ("cx_post", 1.0),
            ("cx_pre", 1.0), ("cx_post", -1.0), ("cx_pre", -1.0),
        ]
        for name, g in cases:
            gate = alg.induced_gate(alg.table_settings(name, g))
            if not np.allclose(gate.g, alg.dressed_gate(name, g), atol=1e-10):
                ok = False
                detail.append(f"gate {name}({g})")
            if not alg.is_symplectic(gate.g, tol=1e-10):
                ok = False
                detail.append(f"symplectic {name}({g})")
        for name, want in (("cz_post", alg.D_CZ_POST), ("cz_pre", alg.D_CZ_PRE)):
            gate = alg.induced_gate(alg.table_settings(name, 1.0))
            if not np.allclose(gate.d_mat, want, atol=1e-10):
                ok = False
                detail.append(f"D {name}")
        for r in (0.0, 0.35, 1.0):
            for name, g in cases:
                got = alg.gate_noise_variance(alg.table_settings(name, g), r)
                if abs(got - math.exp(-2 * r)) > 1e-10:
                    ok = False
                    detail.append(f"noise {name} r={r}")
            got = alg.gate_noise_variance(alg.BasisSetting((0.25, 0.95)), r)
            if abs(got - math.exp(-2 * r)) > 1e-10:
                ok = False
                detail.append(f"noise single-wire r={r}")
        report("algebra-suite", ok, "; ".join(detail) or "all matrices reproduced")


class TestSoftInformationSuite:
    def test_soft_information_suite(self):
        ok = True
        detail = []
        # exact 1/2 at the bin boundary
        for s2 in (0.02, 0.054, 0.2, 0.4):
            if gkp.misround_probability(SQRT_PI / 2, s2) != 0.5:
                ok = False
                detail.append(f"boundary s2={s2}")
            if gkp.misround_probability(-SQRT_PI / 2, s2) != 0.5:
                ok = False
                detail.append(f"-boundary s2={s2}")
        # brute-force grid at 1e-10
        zs = np.linspace(-SQRT_PI / 2, SQRT_PI / 2 * 0.999, 41)
        n = np.arange(-50, 51)
        for s2 in (0.02, 0.054, 0.1, 0.3, 0.5):
            got = gkp.misround_probability(zs, s2)
            want = np.array([
                np.exp(-((z - (2 * n + 1) * SQRT_PI) ** 2) / (2 * s2)).sum()
                / np.exp(-((z - n * SQRT_PI) ** 2) / (2 * s2)).sum()
                for z in zs
            ])
            if np.max(np.abs(got - want)) > 1e-10:
                ok = False
                detail.append(f"grid s2={s2}")
        # combination identity
        p = 0.2
        if not math.isclose(gkp.combine_error_probs([p, p]), 2 * p * (1 - p)):
            ok = False
            detail.append("combine pair")
        # empirical misround frequency vs mean reported p over 1e5 trials
        rng = np.random.default_rng(SEED)
        sin2 = 0.05
        params = NoiseParams(sigma2=0.05, sigma2_gkp=0.06)
        n_trials = 100_000
        reg = ShiftRegister(n_trials)
        reg.xi[:] = rng.normal(0, math.sqrt(sin2), (2, n_trials))
        reg.var[:] = sin2
        p_x, _, _, _, m_a, _ = gkp.correct_register(
            reg, np.arange(n_trials), params, rng
        )
        applied = np.round(gkp.nearest_lattice(m_a * math.sqrt(2)) / SQRT_PI)
        freq = (applied.astype(int) % 2 != 0).mean()
        se = math.sqrt(max(freq * (1 - freq), 1e-12) / n_trials)
        if abs(p_x.mean() - freq) > 3 * se:
            ok = False
            detail.append(f"calibration mean_p={p_x.mean():.5f} freq={freq:.5f}")
        report("soft-information-suite", ok, "; ".join(detail) or
               f"calibration {p_x.mean():.5f} vs {freq:.5f} (3se {3*se:.5f})")


def _all_faults(engine):
    g = engine.graphs
    return [
        (rnd, step, q, pauli)
        for rnd in range(1, g.rounds + 1)
        for q in range(engine.layout.n_qubits)
        for step in g._fault_steps(q)
        for pauli in (X, Z)
    ]


class TestDecoderSuite:
    def test_single_fault_exhaustive(self):
        """Every single fault at every (round, step, qubit, Pauli) is
        corrected for d = 3 and d = 5."""
        params = NoiseParams(sigma2=1.0, sigma2_gkp=0.0, sigma2_gate=0.0)
        failures = 0
        total = 0
        for d in (3, 5):
            engine = get_engine(d, "surface-4-gkp")
            weights = np.ones(engine.graphs.n_edges)
            rng = np.random.default_rng(0)
            for fault in _all_faults(engine):
                lx, lz = engine.run(
                    params, rng, inject=(fault,), collect=False,
                    weights_override=weights,
                )
                total += 1
                failures += lx or lz
        report(
            "decoder-single-fault", failures == 0,
            f"{total} injected faults, {failures} logical failures",
        )

    def test_double_fault_exhaustive(self):
        """No pair of single faults causes a logical error at d = 5.

        Faults compose linearly mod 2 and every fault equals its matching
        graph edge image (endpoints and correction support) up to a
        stabilizer, as asserted during graph construction; the exhaustive
        check therefore runs over all pairs of distinct fault edge images,
        decoding through the production decoder with uniform static weights.
        """
        engine = get_engine(5, "surface-4-gkp")
        g = engine.graphs
        lay = engine.layout
        images = set()
        for rnd, step, q, pauli in _all_faults(engine):
            e = g.route_corr[rnd, step, q, pauli]
            if e >= 0:
                images.add(int(e))
        for rnd in range(1, g.rounds + 1):
            for m in list(lay.mz_ids) + list(lay.mx_ids):
                images.add(int(g.route_readout[rnd, m]))
        weights = np.ones(g.n_edges)
        decoders = {"z": GraphDecoder(g, "z"), "x": GraphDecoder(g, "x")}
        for dec in decoders.values():
            dec.set_static_weights(weights)
        info = []
        for idx in sorted(images):
            e = g.edges[idx]
            info.append((e.graph, frozenset(v for v in (e.u, e.v) if v != g.boundary), e.support))
        failures = 0
        n_pairs = 0
        for a in range(len(info)):
            ga, va, sa = info[a]
            for b in range(a, len(info)):
                gb, vb, sb = info[b]
                n_pairs += 1
                hi = {"z": (), "x": ()}
                if ga == gb:
                    hi[ga] = va ^ vb
                else:
                    hi[ga], hi[gb] = va, vb
                x_res = (sa if ga == "z" else 0) ^ (sb if gb == "z" else 0)
                z_res = (sa if ga == "x" else 0) ^ (sb if gb == "x" else 0)
                x_corr = decoders["z"].decode(weights, hi["z"])[0] if hi["z"] else 0
                z_corr = decoders["x"].decode(weights, hi["x"])[0] if hi["x"] else 0
                lx, lz = detect_logical_error(lay, x_res, z_res, x_corr, z_corr)
                failures += lx or lz
        for dec in decoders.values():
            dec.clear_static_weights()
        report(
            "decoder-double-fault", failures == 0,
            f"{n_pairs} fault-image pairs, {failures} logical failures",
        )

    def test_matching_against_brute_force(self):
        """decode()'s matching weight equals exhaustive enumeration on 1000
        random instances with <= 8 highlights (plus larger blossom-path
        instances)."""
        from scipy.sparse.csgraph import dijkstra

        def brute_force_matching(pair_cost, bnd_cost):
            best = math.inf

            def rec(unmatched, acc):
                nonlocal best
                if acc >= best:
                    return
                if not unmatched:
                    best = acc
                    return
                i, rest = unmatched[0], unmatched[1:]
                rec(rest, acc + bnd_cost[i])
                for pos, j in enumerate(rest):
                    rec(rest[:pos] + rest[pos + 1 :], acc + pair_cost[i, j])

            rec(tuple(range(len(bnd_cost))), 0.0)
            return best

        g = build_graphs(3, "surface-4-gkp")
        dec = GraphDecoder(g, "z")
        rng = np.random.default_rng(SEED)
        mismatches = 0
        sizes = list(rng.integers(2, 9, size=1000)) + list(rng.integers(10, 15, size=200))
        for k in sizes:
            weights = rng.uniform(0.4, 9.0, g.n_edges)
            highlights = sorted(int(h) for h in rng.choice(g.n_vertices, size=int(k), replace=False))
            _, got = dec.decode(weights, highlights)
            w = dec._local_weights(weights)
            dec._csr.data[dec._data_slot] = np.tile(w, 2)
            dist = dijkstra(dec._csr, directed=False, indices=highlights)
            want = brute_force_matching(dist[:, highlights], dist[:, dec.boundary])
            mismatches += not math.isclose(got, want, rel_tol=1e-9)
        report(
            "decoder-brute-force-matching", mismatches == 0,
            f"{len(sizes)} instances, {mismatches} mismatches",
        )


class TestStatisticalIdentities:
    def test_x_z_rates_equal(self):
        """Logical X and Z rates agree (two-proportion z test, 3 sigma, 1e5
        samples)."""
        cfg = SimConfig(
            distance=3, squeezing_db=12.5, seed=SEED,
            max_samples=100_000, stop_errors=10**9,
        )
        res = run_point(cfg, workers=WORKERS)
        n = res.samples
        p1, p2 = res.x_rate, res.z_rate
        pooled = (res.x_events + res.z_events) / (2 * n)
        z_stat = abs(p1 - p2) / math.sqrt(max(pooled * (1 - pooled) * 2 / n, 1e-30))
        ok = n == 100_000 and z_stat < 3.0
        report(
            "statistical-x-z-symmetry", ok,
            f"x = {p1:.5f}, z = {p2:.5f}, z-statistic = {z_stat:.2f} (n = {n})",
        )

    def test_worker_count_invariance(self):
        """Bit-identical results under different worker counts and reruns."""
        cfg = SimConfig(distance=5, squeezing_db=12.5, seed=SEED,
                        max_samples=1500, stop_errors=200)
        serial = run_point(cfg, workers=1)
        parallel = run_point(cfg, workers=2)
        rerun = run_point(cfg, workers=2)
        ok = serial == parallel == rerun
        report("statistical-determinism", ok,
               f"serial == 2-worker == rerun: {ok} (samples = {serial.samples})")
