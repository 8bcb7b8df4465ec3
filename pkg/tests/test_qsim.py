import numpy as np
import pytest

from qnspect import (
    NoiseRealization,
    PiecewiseConstantWaveform,
    SpectrumModel,
    bias_breakdown,
    dephasing_robust,
    error_vector_first_order,
    higher_order_ff,
    magnus_second_order_a1,
    modulated_dpss_waveform,
    overlap_amplitude,
    overlap_dephasing,
    propagate,
    sample_many,
    survival_probabilities,
    tomographic_estimator,
)
from qnspect.errors import ParameterError
from qnspect.qsim import SurvivalTriple

MHZ = 2 * np.pi * 1e6
FLAT_AMP = SpectrumModel.flat_cutoff(1.04e-11, 2 * MHZ)
NO_NOISE = SpectrumModel.dc_delta(0.0)


def zero_noise(n):
    return NoiseRealization(samples=np.zeros(n), mean=0.0, seed=0, index=0)


def const_noise(n, value):
    return NoiseRealization(samples=np.full(n, value), mean=value, seed=0, index=0)


class TestPropagate:
    def test_identity_gate_without_noise(self):
        wf = dephasing_robust(20e-6, 4, 1, 1000)
        u = propagate(wf, zero_noise(1000), zero_noise(1000))
        for axis in (1, 2, 3):
            assert abs(u.survival(axis) - 1.0) < 1e-12

    def test_unitarity(self):
        rng = np.random.default_rng(2)
        wf = PiecewiseConstantWaveform(rng.normal(0, 1e6, 300), 1e-8)
        amp = NoiseRealization(rng.normal(0, 0.01, 300), 0.0, 0, 0)
        deph = NoiseRealization(rng.normal(0, 1e5, 300), 0.0, 0, 1)
        u = propagate(wf, amp, deph).matrix
        assert np.abs(u.conj().T @ u - np.eye(2)).max() < 1e-10

    def test_pure_detuning_rotation(self):
        n = 200
        wf = PiecewiseConstantWaveform(np.zeros(n), 1e-8)
        delta = 0.05 * MHZ
        u = propagate(wf, zero_noise(n), const_noise(n, delta))
        t = wf.total_time
        assert abs(u.survival(3) - 1.0) < 1e-12
        assert abs(u.survival(1) - np.cos(delta * t) ** 2) < 1e-10

    def test_length_mismatch(self):
        wf = PiecewiseConstantWaveform(np.zeros(10), 1e-8)
        with pytest.raises(ParameterError):
            propagate(wf, zero_noise(9), zero_noise(10))


class TestSurvival:
    def test_noiseless_is_unity(self):
        wf = dephasing_robust(10e-6, 2, 1, 500)
        triple = survival_probabilities(wf, NO_NOISE, NO_NOISE, 4, seed=0)
        # unity up to roundoff accumulated over N quaternion products
        for p in (triple.p1, triple.p2, triple.p3):
            assert abs(p - 1.0) < 1e-12

    def test_estimator_algebra(self):
        triple = SurvivalTriple(1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1)
        assert tomographic_estimator(triple).value == 0.0
        triple = SurvivalTriple(1.0, 1.0 - 2 * 0.037, 1.0, 0.0, 0.0, 0.0, 1)
        assert abs(tomographic_estimator(triple).value - 0.037) < 1e-15

    def test_dephasing_only_matches_overlap(self):
        # 1 - p1 estimates I_Z for an identity-gate control
        wf = dephasing_robust(20e-6, 4, 2, 2000)
        deph = SpectrumModel.one_over_f(3.18, 1e8, 0.01 * MHZ, 2 * MHZ)
        triple = survival_probabilities(wf, NO_NOISE, deph, 1200, seed=5)
        i_z = overlap_dephasing(wf, deph)
        assert abs((1.0 - triple.p1) - i_z) < 3 * triple.err1 + 0.05 * i_z

    def test_variance_scales_with_realizations(self):
        wf = dephasing_robust(20e-6, 4, 2, 1000)
        small = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 200, seed=1)
        large = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 800, seed=1)
        assert large.err1 < small.err1
        assert abs(large.err1 * np.sqrt(800 / 200) / small.err1 - 1) < 0.5

    def test_shot_layer(self):
        wf = dephasing_robust(20e-6, 4, 2, 1000)
        shot = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 50, seed=2, shots=100)
        exact = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 50, seed=2)
        assert shot.p1 != exact.p1  # binomial layer engaged
        assert abs(shot.p1 - exact.p1) < 0.05

    def test_estimator_matches_amplitude_overlap(self):
        wf = dephasing_robust(20e-6, 20, 2, 2000)
        triple = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 2000, seed=7)
        est = tomographic_estimator(triple)
        i_om = overlap_amplitude(wf, FLAT_AMP)
        assert abs(est.value - i_om) < 3 * est.stderr + i_om**2


class TestErrorVector:
    def test_zero_noise(self):
        wf = dephasing_robust(10e-6, 2, 1, 400)
        a = error_vector_first_order(wf, zero_noise(400), zero_noise(400))
        assert np.all(a == 0.0)

    def test_static_detuning_free_evolution(self):
        n = 300
        wf = PiecewiseConstantWaveform(np.zeros(n), 1e-8)
        delta = 0.1 * MHZ
        a = error_vector_first_order(wf, zero_noise(n), const_noise(n, delta))
        assert abs(a[2] - delta * wf.total_time) < 1e-9
        assert a[1] == 0.0

    def test_first_component_variance_matches_overlap(self):
        wf = dephasing_robust(20e-6, 10, 2, 2000)
        reals = sample_many(FLAT_AMP, 2000, wf.dt, seed=3, indices=range(2000))
        zeros = zero_noise(2000)
        a1 = np.array([
            error_vector_first_order(
                wf, NoiseRealization(r, 0.0, 3, i), zeros)[0]
            for i, r in enumerate(reals)
        ])
        i_om = overlap_amplitude(wf, FLAT_AMP)
        assert abs(a1.var() / i_om - 1) < 0.05

    def test_segment_exact_quadrature(self):
        # compare against a 100x oversampled Riemann evaluation
        rng = np.random.default_rng(8)
        n = 40
        wf = PiecewiseConstantWaveform(rng.normal(0, 5e5, n), 1e-7)
        bz = rng.normal(0, 1e5, n)
        a = error_vector_first_order(wf, zero_noise(n), NoiseRealization(bz, 0.0, 0, 0))
        over = 100
        fine_omega = np.repeat(wf.samples, over)
        theta_fine = np.concatenate(([0.0], np.cumsum(fine_omega) * wf.dt / over))[:-1]
        bz_fine = np.repeat(bz, over)
        dt_f = wf.dt / over
        # midpoint evaluation of Theta within each fine slice
        theta_mid = theta_fine + fine_omega * dt_f / 2
        a2_ref = np.sum(np.sin(theta_mid) * bz_fine) * dt_f
        a3_ref = np.sum(np.cos(theta_mid) * bz_fine) * dt_f
        assert abs(a[1] - a2_ref) < 1e-6 * max(abs(a2_ref), 1e-12)
        assert abs(a[2] - a3_ref) < 1e-6 * max(abs(a3_ref), 1e-12)


class TestMagnusSecondOrder:
    def test_zero_for_free_evolution(self):
        n = 100
        wf = PiecewiseConstantWaveform(np.zeros(n), 1e-8)
        noise = NoiseRealization(np.random.default_rng(0).normal(0, 1e5, n), 0.0, 0, 0)
        assert magnus_second_order_a1(wf, noise) == 0.0

    def test_matches_double_loop(self):
        rng = np.random.default_rng(12)
        for _ in range(4):
            n = int(rng.integers(16, 65))
            wf = PiecewiseConstantWaveform(rng.normal(0, 4e5, n), 1e-8)
            bz = rng.normal(0, 2e5, n)
            noise = NoiseRealization(bz, 0.0, 0, 0)
            theta = np.concatenate(([0.0], np.cumsum(wf.samples) * wf.dt))[:-1]
            brute = sum(
                np.sin(theta[i] - theta[j]) * bz[i] * bz[j]
                for i in range(n) for j in range(i + 1)
            ) * wf.dt**2
            got = magnus_second_order_a1(wf, noise)
            assert abs(got - brute) < 1e-12 * max(abs(brute), 1e-12)

    def test_detuning_square_matches_gz(self):
        # <a1^(2)^2> for static detuning mu equals mu^4/3 * G_Z(0, 0)
        wf = dephasing_robust(20e-6, 4, 1, 600)
        mu = 0.07 * MHZ
        a12 = magnus_second_order_a1(wf, const_noise(600, mu))
        gz00 = higher_order_ff(wf, [0.0], [0.0]).values[0, 0].real
        assert abs(a12**2 - mu**4 * gz00 / 3.0) < 1e-9 * max(a12**2, 1e-30)


class TestBiasBreakdown:
    def test_no_dephasing_reduces_to_amplitude_terms(self):
        wf = dephasing_robust(20e-6, 10, 2, 1000)
        parts = bias_breakdown(wf, FLAT_AMP, NO_NOISE)
        assert parts.i_z == 0.0 and parts.a12_sq == 0.0
        assert abs(parts.predicted - (parts.i_omega - parts.i_omega**2)) < 1e-15

    def test_dephasing_robust_cancels_detuning_term(self):
        wf = dephasing_robust(20e-6, 20, 2, 2000)
        deph = SpectrumModel.dc_delta(0.19 * MHZ)
        parts = bias_breakdown(wf, FLAT_AMP, deph)
        # the DC null suppresses the multiplicative detuning bias to the
        # discretization floor, orders of magnitude below I_Omega
        assert parts.multiplicative_term < 1e-4 * parts.i_omega

    def test_slepian_keeps_detuning_term(self):
        wf = modulated_dpss_waveform(2000, 1.0 / 2000, 5 * MHZ, 1 * MHZ, 10e-9)
        deph = SpectrumModel.dc_delta(0.19 * MHZ)
        parts = bias_breakdown(wf, FLAT_AMP, deph)
        assert parts.multiplicative_term > 0.1 * parts.i_omega

    def test_prediction_tracks_monte_carlo_weak_noise(self):
        wf = dephasing_robust(20e-6, 20, 2, 2000)
        deph = SpectrumModel.dc_delta(0.05 * MHZ)
        parts = bias_breakdown(wf, FLAT_AMP, deph)
        triple = survival_probabilities(wf, FLAT_AMP, deph, 2000, seed=11)
        est = tomographic_estimator(triple)
        assert abs(est.value - parts.predicted) < 3 * est.stderr

    def test_prediction_with_stochastic_dephasing(self):
        # exercises the Monte-Carlo a1^(2) path (non-static spectrum)
        wf = dephasing_robust(20e-6, 20, 2, 2000)
        deph = SpectrumModel.one_over_f(3.18, 1e8, 0.01 * MHZ, 2 * MHZ)
        parts = bias_breakdown(wf, FLAT_AMP, deph, n_realizations=500, seed=2)
        assert parts.i_z > 0 and parts.a12_sq >= 0
        triple = survival_probabilities(wf, FLAT_AMP, deph, 2000, seed=12)
        est = tomographic_estimator(triple)
        assert abs(est.value - parts.predicted) < 3 * est.stderr + 0.05 * parts.i_omega

    def test_gaussian_fourth_moment(self):
        # <a1^4> = 3 I_Omega^2 for zero-mean Gaussian amplitude noise
        wf = dephasing_robust(20e-6, 10, 2, 1000)
        reals = sample_many(FLAT_AMP, 1000, wf.dt, seed=4, indices=range(2500))
        zeros = zero_noise(1000)
        a1 = np.array([
            error_vector_first_order(wf, NoiseRealization(r, 0.0, 4, i), zeros)[0]
            for i, r in enumerate(reals)
        ])
        i_om = overlap_amplitude(wf, FLAT_AMP)
        fourth = np.mean(a1**4)
        se = np.std(a1**4) / np.sqrt(a1.size)
        assert abs(fourth - 3 * i_om**2) < 3 * se + 0.01 * 3 * i_om**2

    def test_seed_exchangeability(self):
        wf = dephasing_robust(20e-6, 10, 2, 1000)
        t1 = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 600, seed=21)
        t2 = survival_probabilities(wf, FLAT_AMP, NO_NOISE, 600, seed=22)
        err = np.hypot(t1.err1, t2.err1)
        assert abs(t1.p1 - t2.p1) < 4 * err
