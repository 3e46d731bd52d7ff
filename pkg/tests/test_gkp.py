"""GKP correction soft information: rounding, misround probabilities, and the
teleportation mechanics."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from gkpsurface.gkp import (
    CorrectionOutcome,
    QunaughtSupply,
    combine_error_probs,
    correct_register,
    misround_probability,
    misround_probability_fixed,
    nearest_lattice,
    residual,
    teleport_correct,
)
from gkpsurface.noise import SQRT_PI, ModeNoise, NoiseParams, ShiftRegister, VarianceTracker


def brute_force_misround(z, sigma2, n_terms=50):
    n = np.arange(-n_terms, n_terms + 1)
    num = np.exp(-((z - (2 * n + 1) * SQRT_PI) ** 2) / (2 * sigma2)).sum()
    den = np.exp(-((z - n * SQRT_PI) ** 2) / (2 * sigma2)).sum()
    return num / den


class TestRounding:
    def test_lattice_point(self):
        assert residual(SQRT_PI) == 0.0

    def test_residual_examples(self):
        assert residual(0.6 * SQRT_PI) == pytest.approx(-0.4 * SQRT_PI)
        assert residual(0.6 * SQRT_PI) == pytest.approx(-0.70898, abs=1e-5)

    def test_half_integer_maps_to_lower_boundary(self):
        assert residual(-0.5 * SQRT_PI) == -0.5 * SQRT_PI

    def test_nearest_examples(self):
        assert nearest_lattice(1.4 * SQRT_PI) == pytest.approx(SQRT_PI)
        assert nearest_lattice(-0.2 * SQRT_PI) == 0.0

    @given(x=st.floats(-50, 50))
    @settings(max_examples=200, deadline=None)
    def test_decomposition_is_exact(self, x):
        assert nearest_lattice(x) + residual(x) == x
        assert -SQRT_PI / 2 <= residual(x) < SQRT_PI / 2


class TestMisroundProbability:
    @pytest.mark.parametrize("sigma2", [0.01, 0.054, 0.1, 0.36])
    def test_exactly_half_at_boundary(self, sigma2):
        assert misround_probability(SQRT_PI / 2, sigma2) == 0.5
        assert misround_probability(-SQRT_PI / 2, sigma2) == 0.5

    def test_tiny_at_zero_residual(self):
        assert misround_probability(0.0, 0.04) < 1e-16

    def test_matches_brute_force(self):
        zs = np.linspace(-SQRT_PI / 2, SQRT_PI / 2 * 0.999, 31)
        for sigma2 in (0.02, 0.054, 0.1, 0.25, 0.5):
            got = misround_probability(zs, sigma2)
            want = [brute_force_misround(z, sigma2) for z in zs]
            assert np.allclose(got, want, atol=1e-10)

    def test_specific_value_against_oracle(self):
        got = misround_probability(0.3, 0.054)
        assert got == pytest.approx(brute_force_misround(0.3, 0.054), abs=1e-10)

    def test_vectorised_sigma_matches_scalar(self, rng):
        z = rng.uniform(-SQRT_PI / 2, SQRT_PI / 2, 64)
        s2 = rng.uniform(0.02, 0.5, 64)
        vec = misround_probability(z, s2)
        sca = [misround_probability(float(a), float(b)) for a, b in zip(z, s2)]
        assert np.array_equal(vec, np.array(sca))

    @given(z=st.floats(0, SQRT_PI / 2 * 0.999), s2=st.floats(0.01, 0.6))
    @settings(max_examples=100, deadline=None)
    def test_even_and_bounded(self, z, s2):
        p = misround_probability(z, s2)
        assert misround_probability(-z, s2) == p
        assert 0.0 <= p <= 0.5

    def test_monotone_on_positive_residuals(self):
        zs = np.linspace(0, SQRT_PI / 2, 40)
        ps = misround_probability(zs, 0.07)
        assert np.all(np.diff(ps) >= 0)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            misround_probability(0.1, 0.0)


class TestFixedProbability:
    def test_limits(self):
        assert misround_probability_fixed(1e-4) < 1e-12
        assert misround_probability_fixed(400.0) == pytest.approx(0.5, abs=1e-3)

    def test_matches_quadrature(self):
        for s2 in (0.05, 0.12, 0.3):
            want = sum(
                quad(
                    lambda t: np.exp(-t * t / (2 * s2)) / np.sqrt(2 * np.pi * s2),
                    (2 * n + 0.5) * SQRT_PI,
                    (2 * n + 1.5) * SQRT_PI,
                )[0]
                for n in range(-25, 25)
            )
            assert misround_probability_fixed(s2) == pytest.approx(want, abs=1e-8)

    def test_rejects_bad_sigma(self):
        with pytest.raises(ValueError):
            misround_probability_fixed(-0.1)


class TestCombine:
    def test_single(self):
        assert combine_error_probs([0.17]) == pytest.approx(0.17)

    def test_pair(self):
        p = 0.12
        assert combine_error_probs([p, p]) == pytest.approx(2 * p * (1 - p))

    def test_absorbing_half(self):
        assert combine_error_probs([0.5, 0.01, 0.3]) == 0.5

    def test_domain(self):
        with pytest.raises(ValueError):
            combine_error_probs([0.6])


class TestTeleportCorrect:
    def test_certain_misround_with_ideal_ancillas(self, rng):
        params = NoiseParams(sigma2=0.05, sigma2_gkp=0.0, sigma2_gate=0.0)
        mode = ModeNoise(xi_q=0.6 * SQRT_PI, xi_p=0.0)
        tracker = VarianceTracker(var_q=0.05, var_p=0.05)
        out = teleport_correct(mode, tracker, params, QunaughtSupply(0.0), rng)
        assert mode.xi_q == pytest.approx(SQRT_PI)
        assert mode.xi_p == 0.0
        assert out.p_x == pytest.approx(
            misround_probability(residual(0.6 * SQRT_PI), 0.05)
        )
        assert out.z_q == pytest.approx(-0.4 * SQRT_PI)

    def test_small_noise_removed(self, rng):
        params = NoiseParams(sigma2=0.05, sigma2_gkp=0.0, sigma2_gate=0.0)
        mode = ModeNoise(xi_q=0.1, xi_p=0.1)
        tracker = VarianceTracker(0.05, 0.05)
        teleport_correct(mode, tracker, params, QunaughtSupply(0.0), rng)
        assert (mode.xi_q, mode.xi_p) == (0.0, 0.0)
        assert (tracker.var_q, tracker.var_p) == (0.0, 0.0)

    def test_all_generators_failed(self, rng):
        params = NoiseParams(sigma2=0.05)
        mode = ModeNoise(xi_q=0.2, xi_p=-0.3)
        tracker = VarianceTracker(0.07, 0.07)
        out = teleport_correct(mode, tracker, params, QunaughtSupply(1.0), rng)
        assert not out.corrected_q and not out.corrected_p
        assert out.p_x == 0.0 and out.p_z == 0.0
        assert tracker.var_q == pytest.approx(0.07 + params.sigma2_gate)
        assert tracker.var_p == pytest.approx(0.07 + params.sigma2_gate)

    def test_replacement_sides(self, rng):
        # force one failure at a time via p_fail extremes over many draws
        params = NoiseParams(sigma2=0.04)
        n = 4000
        reg = ShiftRegister(n)
        reg.var[:] = 0.04
        p_x, p_z, cq, cp, _, _ = correct_register(
            reg, np.arange(n), params, rng, "analog", p_fail=0.5
        )
        # a replaced measured-side ancilla leaves q corrected, p not
        frac_q = cq.mean()
        assert abs(frac_q - 0.5) < 0.05
        assert np.all(p_x[~cq] == 0.0)
        assert np.all(p_z[~cp] == 0.0)
        # tracked variance resets only on the corrected side
        assert np.allclose(reg.var[0, cq], params.sigma2_gkp)
        assert np.allclose(reg.var[0, ~cq], 0.04 + params.sigma2_gate)

    def test_output_variance_never_grows_with_good_supply(self, rng):
        params = NoiseParams(sigma2=0.03)
        reg = ShiftRegister(1000)
        reg.xi[:] = rng.normal(0, 0.3, (2, 1000))
        reg.var[:] = 0.09  # > sigma2_gkp
        correct_register(reg, np.arange(1000), params, rng)
        assert np.all(reg.var <= 0.09)

    def test_misround_calibration(self, rng):
        # realised odd-lattice shift frequency matches the mean reported p
        sin2, sgkp2 = 0.05, 0.06
        params = NoiseParams(sigma2=0.05, sigma2_gkp=sgkp2)
        n = 100_000
        reg = ShiftRegister(n)
        reg.xi[0] = rng.normal(0, math.sqrt(sin2), n)
        reg.xi[1] = rng.normal(0, math.sqrt(sin2), n)
        reg.var[:] = sin2
        p_x, _, _, _, m_a, _ = correct_register(reg, np.arange(n), params, rng)
        applied = np.round(nearest_lattice(m_a * math.sqrt(2)) / SQRT_PI).astype(int)
        freq = (applied % 2 != 0).mean()
        se = math.sqrt(freq * (1 - freq) / n)
        assert abs(p_x.mean() - freq) < 3 * se

    def test_posterior_average_matches_frequency(self, rng):
        # averaging p over the model's Gaussian reproduces the bin mass
        sigma2 = 0.11
        m = rng.normal(0, math.sqrt(sigma2), 100_000)
        p = misround_probability(residual(m), sigma2)
        freq = (np.round(nearest_lattice(m) / SQRT_PI).astype(int) % 2 != 0).mean()
        se = math.sqrt(freq * (1 - freq) / m.size)
        assert abs(p.mean() - freq) < 3 * se

    def test_outcome_structure(self, rng):
        params = NoiseParams(sigma2=0.04)
        out = teleport_correct(
            ModeNoise(0.3, -0.2), VarianceTracker(0.08, 0.08), params,
            QunaughtSupply(0.0), rng,
        )
        assert isinstance(out, CorrectionOutcome)
        assert -SQRT_PI / 2 <= out.z_q < SQRT_PI / 2
        assert -SQRT_PI / 2 <= out.z_p < SQRT_PI / 2
        assert 0 <= out.p_x <= 0.5 and 0 <= out.p_z <= 0.5

    def test_bad_supply_probability(self):
        with pytest.raises(ValueError):
            QunaughtSupply(1.5)
