import numpy as np
import pytest

from glottalkit.signals import Waveform
from glottalkit.synth import make_preset, synthesize_vowel
from glottalkit.zff import (GciSequence, UnvoicedError, ZffSignal, detect_gcis,
                            estimate_mean_pitch_period, zero_frequency_filter,
                            zfr_cascade, zff_analyze)

FS = 16000


def impulse_train(period, n, fs=FS, sign=1.0):
    samples = np.zeros(n)
    samples[::period] = sign
    return Waveform(samples=samples, fs=fs)


def oracle_zff(samples, period, trend_passes):
    """Literal recursion z_o[n] = sum a_k z_o[n-k] + x[n] plus explicit local means."""
    x = np.empty_like(samples)
    x[0] = samples[0]
    x[1:] = samples[1:] - samples[:-1]
    a = (4.0, -6.0, 4.0, -1.0)
    z = np.zeros_like(x)
    for n in range(x.size):
        acc = x[n]
        for k, ak in enumerate(a, start=1):
            if n - k >= 0:
                acc += ak * z[n - k]
        z[n] = acc
    m = max(int(period / 2 + 0.5), 1)
    for _ in range(trend_passes):
        out = np.empty_like(z)
        for n in range(z.size):
            lo, hi = max(n - m, 0), min(n + m, z.size - 1)
            out[n] = z[n] - np.mean(z[lo:hi + 1])
        z = out
    return z


def npzc(z):
    return np.flatnonzero((z[:-1] < 0) & (z[1:] >= 0)) + 1


class TestMeanPitchPeriod:
    def test_pure_200hz_sine(self):
        t = np.arange(FS) / FS
        w = Waveform(samples=np.sin(2 * np.pi * 200.0 * t), fs=FS)
        assert estimate_mean_pitch_period(w) == 80

    def test_white_noise_is_unvoiced(self):
        rng = np.random.default_rng(11)
        samples = rng.standard_normal(FS)
        # independent check that the normalized autocorrelation peak really is
        # below the 0.1 voicing floor in the searched lag range
        x = np.empty_like(samples)
        x[0] = samples[0]
        x[1:] = np.diff(samples)
        full = np.correlate(x, x, mode="full")[x.size - 1:]
        lags = full / full[0]
        lo, hi = round(FS / 500), round(FS / 60)
        assert lags[lo:hi + 1].max() < 0.1
        with pytest.raises(UnvoicedError, match="unvoiced/aperiodic"):
            estimate_mean_pitch_period(Waveform(samples=samples, fs=FS))

    def test_impulse_train_period_100(self):
        assert estimate_mean_pitch_period(impulse_train(100, FS)) == 100

    def test_too_short_signal(self):
        w = Waveform(samples=np.zeros(100), fs=FS)
        with pytest.raises(ValueError, match="too short"):
            estimate_mean_pitch_period(w)

    def test_bad_bounds(self):
        w = Waveform(samples=np.zeros(FS), fs=FS)
        with pytest.raises(ValueError):
            estimate_mean_pitch_period(w, f0_min=500, f0_max=60)


class TestResonatorCascade:
    def test_impulse_gives_binomial_coefficients(self):
        x = np.zeros(8)
        x[0] = 1.0
        z = zfr_cascade(x)
        # C(n+3, 3): four cumulative sums of a unit impulse
        expected = [1, 4, 10, 20, 35, 56, 84, 120]
        assert np.array_equal(z, expected)

    def test_matches_recursion_form(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(300)
        z = np.zeros(300)
        for n in range(300):
            acc = x[n]
            for k, ak in enumerate((4.0, -6.0, 4.0, -1.0), start=1):
                if n - k >= 0:
                    acc += ak * z[n - k]
            z[n] = acc
        assert np.allclose(zfr_cascade(x), z, rtol=1e-9, atol=1e-6)


class TestZeroFrequencyFilter:
    def test_all_zero_input(self):
        w = Waveform(samples=np.zeros(2000), fs=FS)
        z = zero_frequency_filter(w, period=100)
        assert np.all(z.samples == 0.0)

    def test_impulse_train_npzc_against_oracle(self):
        # glottal closures are negative-going excitation spikes at positive
        # signal polarity, so the ground-truth train points downward
        period, n = 100, 8000
        w = impulse_train(period, n, sign=-1.0)
        z = zero_frequency_filter(w, period=period, trend_passes=2)
        expected = oracle_zff(w.samples, period, trend_passes=2)
        scale = np.max(np.abs(expected))
        assert np.max(np.abs(z.samples - expected)) <= 1e-9 * scale

        crossings = npzc(z.samples)
        assert np.array_equal(crossings, npzc(expected))
        truth = np.arange(0, n, period)
        interior = truth[(truth > 2 * period) & (truth < n - 2 * period)]
        hits = sum(np.min(np.abs(crossings - t)) <= 1 for t in interior)
        assert hits / interior.size >= 0.99

    def test_rejects_bad_arguments(self):
        w = Waveform(samples=np.zeros(100), fs=FS)
        with pytest.raises(ValueError):
            zero_frequency_filter(w, period=1)
        with pytest.raises(ValueError):
            zero_frequency_filter(w, period=100, trend_passes=0)

    def test_linearity(self):
        rng = np.random.default_rng(2)
        n = 3000
        xa = Waveform(samples=rng.standard_normal(n), fs=FS)
        xb = Waveform(samples=rng.standard_normal(n), fs=FS)
        a, b = 1.7, -0.6
        mixed = Waveform(samples=a * xa.samples + b * xb.samples, fs=FS)
        za = zero_frequency_filter(xa, 80).samples
        zb = zero_frequency_filter(xb, 80).samples
        zm = zero_frequency_filter(mixed, 80).samples
        combo = a * za + b * zb
        rel = np.max(np.abs(zm - combo)) / np.max(np.abs(combo))
        assert rel <= 1e-9

    def test_two_passes_annihilate_polynomial_drift(self):
        # the resonator cascade turns an impulse into cubic growth; two
        # local-mean passes must wipe that drift out in the interior
        from glottalkit.zff import remove_local_mean

        drift = zfr_cascade(np.concatenate(([1.0], np.zeros(3999))))
        residual = remove_local_mean(remove_local_mean(drift, 80), 80)
        margin = 2 * (2 * 40 + 1)
        rms = np.sqrt(np.mean(drift ** 2))
        assert np.max(np.abs(residual[margin:-margin])) <= 1e-6 * rms


class TestDetectGcis:
    def test_positive_signal_empty(self):
        z = ZffSignal(samples=np.ones(50), fs=FS, mean_pitch_period=10)
        assert len(detect_gcis(z)) == 0

    def test_alternating_signs(self):
        z = ZffSignal(samples=np.array([-1.0, 1.0, -1.0, 1.0]), fs=FS,
                      mean_pitch_period=2)
        assert detect_gcis(z).instants.tolist() == [1, 3]

    def test_polarity_flip(self):
        z = ZffSignal(samples=np.array([1.0, -1.0, 1.0, -1.0]), fs=FS,
                      mean_pitch_period=2)
        assert detect_gcis(z).instants.tolist() == [2]
        assert detect_gcis(z, polarity="negative").instants.tolist() == [1, 3]

    def test_margin_excludes_edges(self):
        z = ZffSignal(samples=np.array([-1.0, 1.0, -1.0, 1.0]), fs=FS,
                      mean_pitch_period=2)
        assert detect_gcis(z, margin=1).instants.tolist() == [1]

    def test_strictly_increasing_invariant(self):
        with pytest.raises(ValueError):
            GciSequence(instants=np.array([5, 5]), fs=FS)


class TestOnSyntheticVowel:
    def test_gci_gaps_match_f0(self):
        preset = make_preset("modal", f0=200.0, jitter_percent=0.0,
                             shimmer_percent=0.0, noise_level=0.0)
        w, _ = synthesize_vowel(preset, fs=FS, seed=0)
        _, gcis = zff_analyze(w)
        # the outermost gaps touch the truncated trend-removal windows, so the
        # period contract applies to the interior
        gaps = np.diff(gcis.instants)[1:-1]
        assert gaps.size >= 80
        assert np.all(np.abs(gaps - 80) <= 2)

    def test_gci_rate_matches_f0(self):
        preset = make_preset("modal", f0=125.0, jitter_percent=0.0,
                             shimmer_percent=0.0, noise_level=0.0, duration=1.0)
        w, _ = synthesize_vowel(preset, fs=FS, seed=1)
        _, gcis = zff_analyze(w)
        # 125 pulses expected in 1 s; edge exclusion costs at most one
        assert abs(len(gcis) - 125) <= 2
