import numpy as np
import pytest

from glottalkit.features import (LOG_FLOOR, FeatureVector, delta_coefficients,
                                 frame_amplitude_spectra, mel_center_frequencies,
                                 mel_filterbank, mel_spectrogram_feature,
                                 mfcc_feature, spectrogram_feature)
from glottalkit.signals import FrameSpec, Waveform, hamming_window

FS = 16000.0


def tone(freq, duration=0.5, amp=0.3, fs=FS):
    t = np.arange(int(duration * fs)) / fs
    return Waveform(samples=amp * np.sin(2 * np.pi * freq * t), fs=fs)


def hop_periodic_signal(n_hops=40, fs=FS):
    """Every 25 ms frame is identical: period equals the 5 ms hop."""
    rng = np.random.default_rng(12)
    hop = rng.uniform(-0.5, 0.5, 80)
    return Waveform(samples=np.tile(hop, n_hops), fs=fs)


def naive_dft_amplitude(frame, n_fft=1024):
    padded = np.zeros(n_fft)
    padded[:frame.size] = frame
    n = np.arange(n_fft)
    bins = np.arange(n_fft // 2 + 1)
    basis = np.exp(-2j * np.pi * np.outer(bins, n) / n_fft)
    return np.abs(basis @ padded)


class TestSpectrogram:
    def test_dimension_is_513(self):
        assert spectrogram_feature(tone(440)).dim == 513

    def test_all_zero_signal_hits_floor(self):
        w = Waveform(samples=np.zeros(8000), fs=FS)
        f = spectrogram_feature(w)
        assert np.allclose(f.values, np.log(LOG_FLOOR))

    def test_sine_peak_bin(self):
        f = spectrogram_feature(tone(1000.0))
        assert int(np.argmax(f.values)) == 64  # 1000 * 1024 / 16000

        # independent direct-DFT check on a single frame
        w = tone(1000.0)
        frame = w.samples[:400] * hamming_window(400)
        oracle = naive_dft_amplitude(frame)
        assert int(np.argmax(oracle)) == 64

    def test_fft_matches_naive_dft(self):
        rng = np.random.default_rng(3)
        w = Waveform(samples=rng.uniform(-1, 1, 600), fs=FS)
        spectra = frame_amplitude_spectra(w)
        frame0 = w.samples[:400] * hamming_window(400)
        oracle = naive_dft_amplitude(frame0)
        assert np.max(np.abs(spectra[0] - oracle)) <= 1e-8 * np.max(oracle)

    def test_too_short_signal(self):
        with pytest.raises(ValueError, match="shorter than one frame"):
            spectrogram_feature(Waveform(samples=np.zeros(100), fs=FS))

    def test_log_shift_under_scaling(self):
        w = hop_periodic_signal()
        base = spectrogram_feature(w).values
        scaled = spectrogram_feature(
            Waveform(samples=7.0 * w.samples, fs=FS)).values
        assert np.allclose(scaled - base, np.log(7.0), atol=1e-9)


class TestMelFilterbank:
    def test_shape(self):
        assert mel_filterbank(80, 1024, FS).shape == (80, 513)

    def test_rows_positive(self):
        fb = mel_filterbank(80, 1024, FS)
        assert np.all(fb.sum(axis=1) > 0)
        assert np.all(fb >= 0)
        assert np.allclose(fb.max(axis=1), 1.0)  # peak normalization

    def test_centers_strictly_increasing(self):
        centers = mel_center_frequencies(80, FS)
        assert np.all(np.diff(centers) > 0)

    def test_too_many_filters(self):
        with pytest.raises(ValueError, match="too large"):
            mel_filterbank(2000, 1024, FS)


class TestMelSpectrogram:
    def test_dimension_is_80(self):
        assert mel_spectrogram_feature(tone(500)).dim == 80

    def test_all_zero_signal_floor(self):
        w = Waveform(samples=np.zeros(8000), fs=FS)
        f = mel_spectrogram_feature(w)
        assert np.allclose(f.values, 20.0 * np.log10(LOG_FLOOR))

    def test_tone_at_center_dominates_non_adjacent(self):
        centers = mel_center_frequencies(80, FS)
        idx = 40
        f = mel_spectrogram_feature(tone(float(centers[idx]), duration=1.0))
        others = [k for k in range(80) if abs(k - idx) > 1]
        assert np.all(f.values[idx] >= f.values[others])

    def test_db_shift_under_scaling(self):
        w = hop_periodic_signal()
        base = mel_spectrogram_feature(w).values
        scaled = mel_spectrogram_feature(
            Waveform(samples=5.0 * w.samples, fs=FS)).values
        assert np.allclose(scaled - base, 20.0 * np.log10(5.0), atol=1e-8)


class TestMfcc:
    def test_dimension_is_39(self):
        assert mfcc_feature(tone(300)).dim == 39

    def test_stationary_signal_zero_deltas(self):
        f = mfcc_feature(hop_periodic_signal())
        assert np.allclose(f.values[13:], 0.0, atol=1e-9)

    def test_statics_match_bruteforce_dct(self):
        w = hop_periodic_signal()
        f = mfcc_feature(w)
        spectra = frame_amplitude_spectra(w)
        fb = mel_filterbank(80, 1024, w.fs)
        mel_db = 20.0 * np.log10(spectra @ fb.T + LOG_FLOOR)
        avg = mel_db.mean(axis=0)
        n = avg.size
        oracle = np.empty(13)
        for k in range(13):
            total = sum(avg[j] * np.cos(np.pi * k * (2 * j + 1) / (2 * n))
                        for j in range(n))
            scale = np.sqrt(1.0 / n) if k == 0 else np.sqrt(2.0 / n)
            oracle[k] = scale * total
        assert np.allclose(f.values[:13], oracle, rtol=1e-10, atol=1e-10)

    def test_c0_shifts_rest_invariant_under_scaling(self):
        w = hop_periodic_signal()
        base = mfcc_feature(w).values
        scaled = mfcc_feature(Waveform(samples=3.0 * w.samples, fs=FS)).values
        assert abs((scaled[0] - base[0])) > 1e-3  # c0 moves
        assert np.allclose(scaled[1:13], base[1:13], atol=1e-8)

    def test_too_few_frames_for_deltas(self):
        with pytest.raises(ValueError, match="too few frames"):
            delta_coefficients(np.zeros((3, 13)), window=2)
        # 3 frames of signal: 25 ms + 2 hops
        w = Waveform(samples=np.zeros(400 + 2 * 80), fs=FS)
        with pytest.raises(ValueError, match="too few frames"):
            mfcc_feature(w)


class TestFrameOrderInvariance:
    def test_time_average_commutes_with_permutation(self):
        rng = np.random.default_rng(5)
        w = Waveform(samples=rng.uniform(-1, 1, 4000), fs=FS)
        spectra = frame_amplitude_spectra(w)
        log_then_mean = np.log(spectra + LOG_FLOOR).mean(axis=0)
        perm = rng.permutation(spectra.shape[0])
        permuted = np.log(spectra[perm] + LOG_FLOOR).mean(axis=0)
        assert np.allclose(log_then_mean, permuted, atol=1e-12)


class TestFeatureVector:
    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="requires dim"):
            FeatureVector(values=np.zeros(10), kind="mel80")

    def test_embedding_dims(self):
        assert FeatureVector(values=np.zeros(768), kind="embedding").dim == 768
        assert FeatureVector(values=np.zeros(1024), kind="embedding").dim == 1024
        with pytest.raises(ValueError):
            FeatureVector(values=np.zeros(512), kind="embedding")

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            FeatureVector(values=np.full(80, np.inf), kind="mel80")
