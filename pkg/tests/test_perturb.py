import numpy as np
import pytest

from codec_probe.audio import Waveform, rms
from codec_probe.errors import EmptyTail, FrequencyAboveNyquist, RateMismatch, SilentInput
from codec_probe.perturb import (
    Condition,
    RoomImpulseResponse,
    apply_reverb_at_drr,
    fit_noise_length,
    gen_sine,
    gen_white_noise,
    measure_drr,
    mix_at_snr,
    scale_rir_to_drr,
)


class TestCondition:
    def test_clean_rejects_level(self):
        with pytest.raises(ValueError):
            Condition("clean", level_db=0.0)

    def test_ambient_needs_source(self):
        with pytest.raises(ValueError):
            Condition("ambient", level_db=5.0)

    def test_labels(self):
        assert Condition("clean").label() == "clean"
        assert Condition("white", level_db=-5.0).label() == "white@-5dB"


class TestWhiteNoise:
    def test_deterministic(self):
        a = gen_white_noise(1.0, 16000, 7)
        b = gen_white_noise(1.0, 16000, 7)
        assert np.array_equal(a.samples, b.samples)

    def test_large_sample_statistics(self):
        w = gen_white_noise(10.0, 16000, 12345)
        assert abs(float(np.mean(w.samples))) < 0.003
        assert abs(rms(w) - 0.1) < 0.001

    def test_seed_independence_cross_correlation(self):
        # 20 seed pairs: normalized cross-correlation at lag 0 below 0.02
        for seed in range(20):
            a = gen_white_noise(10.0, 16000, seed).samples
            b = gen_white_noise(10.0, 16000, 1000 + seed).samples
            ncc = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
            assert abs(ncc) < 0.02


class TestSine:
    def test_peak_amplitude_one(self):
        w = gen_sine(1000.0, 1.0, 16000, 1.0, 0.0)
        assert abs(np.max(w.samples) - 1.0) < 1e-9

    def test_zero_amplitude(self):
        w = gen_sine(500.0, 0.5, 8000, 0.0, 0.0)
        assert np.all(w.samples == 0.0)

    def test_goertzel_magnitude_closed_form(self):
        # bin-aligned tone: single-bin DFT magnitude is amplitude * n_eff / 2,
        # where n_eff accounts for the raised-cosine ramps (each sums to half)
        from codec_probe.analysis import goertzel_magnitude
        for fade in (0.0, 0.05):
            w = gen_sine(440.0, 1.0, 48000, 0.7, fade)
            expected = 0.7 * (len(w) - fade * 48000) / 2
            assert goertzel_magnitude(w, 440.0) == pytest.approx(expected, rel=5e-3)

    def test_nyquist_rejected(self):
        with pytest.raises(FrequencyAboveNyquist):
            gen_sine(9000.0, 1.0, 16000)


class TestMixAtSnr:
    def test_gain_zero_db(self, rng):
        speech = Waveform(np.full(1000, 0.1), 16000)
        noise = Waveform(np.where(np.arange(1000) % 2 == 0, 0.2, -0.2), 16000)
        mixed = mix_at_snr(speech, noise, 0.0)
        # rms ratio 0.5 at 0 dB: noise scaled by exactly 0.5
        assert np.allclose(mixed.samples - speech.samples, 0.5 * noise.samples)

    def test_gain_twenty_db(self):
        speech = Waveform(np.full(1000, 0.1), 16000)
        noise = Waveform(np.where(np.arange(1000) % 2 == 0, 0.2, -0.2), 16000)
        mixed = mix_at_snr(speech, noise, 20.0)
        assert np.allclose(mixed.samples - speech.samples, 0.05 * noise.samples)

    @pytest.mark.parametrize("target", [-10.0, -5.0, 0.0, 5.0, 10.0, 20.0, 30.0])
    def test_remeasured_snr_exact(self, target, rng):
        speech = Waveform(rng.standard_normal(16000) * 0.05, 16000)
        noise = Waveform(rng.standard_normal(9000) * 0.3, 16000)
        mixed = mix_at_snr(speech, noise, target)
        noise_part = mixed.samples - speech.samples
        measured = 10 * np.log10(np.mean(speech.samples ** 2) / np.mean(noise_part ** 2))
        assert measured == pytest.approx(target, abs=1e-6)

    def test_noise_looping(self):
        noise = np.array([0.5, -0.25, 0.125])
        assert fit_noise_length(noise, 7).tolist() == [0.5, -0.25, 0.125, 0.5, -0.25, 0.125, 0.5]
        assert fit_noise_length(noise, 2).tolist() == [0.5, -0.25]

    def test_scale_covariance(self, rng):
        # pre-scaling speech never changes the re-measured SNR
        speech = rng.standard_normal(5000) * 0.1
        noise = Waveform(rng.standard_normal(5000), 16000)
        for alpha in (0.1, 3.0):
            mixed = mix_at_snr(Waveform(alpha * speech, 16000), noise, 12.0)
            noise_part = mixed.samples - alpha * speech
            measured = 10 * np.log10(np.mean((alpha * speech) ** 2) / np.mean(noise_part ** 2))
            assert measured == pytest.approx(12.0, abs=1e-6)

    def test_errors(self):
        silent = Waveform(np.zeros(100), 16000)
        live = Waveform(np.ones(100), 16000)
        with pytest.raises(SilentInput):
            mix_at_snr(silent, live, 0.0)
        with pytest.raises(SilentInput):
            mix_at_snr(live, silent, 0.0)
        with pytest.raises(RateMismatch):
            mix_at_snr(live, Waveform(np.ones(100), 8000), 0.0)


def make_rir(direct_energy, tail_energy, rate=16000):
    """Delta at t=0 plus a flat tail with exactly the requested energies."""
    taps = np.zeros(400)
    taps[0] = np.sqrt(direct_energy)
    tail = np.full(300, np.sqrt(tail_energy / 300))
    taps[100:] = tail
    return RoomImpulseResponse(taps, rate)


class TestDrr:
    def test_pure_delta_empty_tail(self):
        with pytest.raises(EmptyTail):
            measure_drr(RoomImpulseResponse(np.array([1.0]), 16000))

    def test_equal_energy_zero_db(self):
        assert measure_drr(make_rir(1.0, 1.0)) == pytest.approx(0.0, abs=1e-12)

    def test_ten_db(self):
        assert measure_drr(make_rir(1.0, 0.1)) == pytest.approx(10.0, abs=1e-12)

    def test_direct_index_ties_earliest(self):
        rir = RoomImpulseResponse(np.array([0.0, 0.7, 0.2, -0.7, 0.1]), 16000)
        assert rir.direct_index == 1

    @pytest.mark.parametrize("target", [-20.0, -15.0, -10.0, -5.0, 0.0, 5.0, 10.0])
    def test_rescale_exact(self, target):
        rir = make_rir(1.0, 0.35)
        scaled = scale_rir_to_drr(rir, target)
        assert measure_drr(scaled) == pytest.approx(target, abs=1e-6)

    def test_known_beta(self):
        # measured 0 dB, target +10 dB: tail scaled by 10^(-1/2)
        rir = make_rir(1.0, 1.0)
        scaled = scale_rir_to_drr(rir, 10.0)
        ratio = scaled.taps[150] / rir.taps[150]
        assert ratio == pytest.approx(10 ** -0.5, rel=1e-12)


class TestApplyReverb:
    def test_identity_scaling_is_plain_convolution(self, rng):
        speech = Waveform(rng.standard_normal(4000) * 0.1, 16000)
        rir = make_rir(1.0, 0.2)
        target = measure_drr(rir)
        out = apply_reverb_at_drr(speech, rir, target, normalize=False)
        oracle = np.convolve(speech.samples, rir.taps)[:len(speech)]
        assert np.max(np.abs(out.samples - oracle)) < 1e-12

    def test_output_rms_matches_input(self, rng):
        speech = Waveform(rng.standard_normal(4000) * 0.1, 16000)
        out = apply_reverb_at_drr(speech, make_rir(1.0, 0.5), -10.0)
        assert rms(out) == pytest.approx(rms(speech), rel=1e-12)

    def test_deterministic(self, rng):
        speech = Waveform(rng.standard_normal(2000) * 0.1, 16000)
        rir = make_rir(1.0, 0.5)
        a = apply_reverb_at_drr(speech, rir, 3.0)
        b = apply_reverb_at_drr(speech, rir, 3.0)
        assert np.array_equal(a.samples, b.samples)

    def test_rate_mismatch(self):
        with pytest.raises(RateMismatch):
            apply_reverb_at_drr(Waveform(np.ones(100), 8000), make_rir(1.0, 1.0), 0.0)
