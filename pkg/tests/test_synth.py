import numpy as np
import pytest

from glottalkit.qcp import wlp_analyze
from glottalkit.synth import (QUALITIES, VoicePreset, make_corpus, make_preset,
                              nsa_like, speaker_preset, synthesize_vowel)

FS = 16000.0


def harmonic_db(samples, freq, start=4000, length=16000):
    n = np.arange(start, start + length)
    probe = np.exp(-2j * np.pi * freq * n / FS)
    return 20.0 * np.log10(np.abs(np.dot(samples[start:start + length], probe))
                           * 2.0 / length + 1e-300)


class TestSynthesizeVowel:
    def test_duration_sample_count(self):
        w, _ = synthesize_vowel(make_preset("modal", duration=0.5), fs=FS, seed=0)
        assert len(w) == 8000

    def test_zero_jitter_onset_gaps_exact(self):
        preset = make_preset("modal", f0=200.0, jitter_percent=0.0)
        _, onsets = synthesize_vowel(preset, fs=FS, seed=0)
        assert np.all(np.diff(onsets) == 80)

    def test_pressed_has_flatter_harmonic_tilt_than_breathy(self):
        # H2 - H1 separates the pulse shapes; formants and f0 held identical
        def tilt(quality):
            preset = make_preset(quality, f0=200.0, duration=1.5,
                                 jitter_percent=0.0, shimmer_percent=0.0)
            w, _ = synthesize_vowel(preset, fs=FS, seed=0)
            return harmonic_db(w.samples, 400.0) - harmonic_db(w.samples, 200.0)

        assert tilt("pressed") - tilt("breathy") >= 6.0

    def test_same_seed_bitwise_identical(self):
        preset = make_preset("breathy")
        w1, o1 = synthesize_vowel(preset, fs=FS, seed=42)
        w2, o2 = synthesize_vowel(preset, fs=FS, seed=42)
        assert np.array_equal(w1.samples, w2.samples)
        assert np.array_equal(o1, o2)

    def test_clean_preset_exactly_periodic(self):
        preset = make_preset("modal", f0=200.0, jitter_percent=0.0,
                             shimmer_percent=0.0, noise_level=0.0, duration=1.0)
        w, _ = synthesize_vowel(preset, fs=FS, seed=0)
        x = w.samples
        tail = x[8000:-80]
        shifted = x[8080:]
        assert np.max(np.abs(tail - shifted)) <= 1e-9 * np.max(np.abs(x))

    def test_formants_appear_in_lp_envelope(self):
        from dataclasses import replace
        preset = replace(
            make_preset("modal", f0=125.0, jitter_percent=0.0,
                        shimmer_percent=0.0, noise_level=0.0, duration=1.0),
            formants=((650.0, 50.0), (1800.0, 90.0), (3000.0, 130.0)))
        w, _ = synthesize_vowel(preset, fs=FS, seed=0)
        frame = w.samples[4000:4000 + 480]
        vt = wlp_analyze(frame, np.ones(frame.size), order=12)
        freqs = np.linspace(0, FS / 2, 4097)
        z = np.exp(-2j * np.pi * freqs / FS)
        response = 1.0 / np.abs(np.polyval(vt.polynomial()[::-1], z))
        peaks = [freqs[k] for k in range(1, freqs.size - 1)
                 if response[k] > response[k - 1] and response[k] > response[k + 1]]
        for formant, _bw in preset.formants:
            assert min(abs(p - formant) for p in peaks) <= 50.0

    def test_formant_above_nyquist_rejected(self):
        from dataclasses import replace
        preset = replace(make_preset("modal"), formants=((9000.0, 100.0),))
        with pytest.raises(ValueError, match="above Nyquist"):
            synthesize_vowel(preset, fs=FS, seed=0)


class TestPresetValidation:
    def test_quality_set(self):
        with pytest.raises(ValueError):
            make_preset("falsetto")

    def test_open_quotient_range(self):
        with pytest.raises(ValueError):
            make_preset("modal", open_quotient=1.5)

    def test_f0_range(self):
        with pytest.raises(ValueError):
            make_preset("modal", f0=30.0)


class TestSpeakerVariation:
    def test_perturbation_ranges(self):
        base = make_preset("modal", f0=200.0)
        for speaker in range(30):
            p = speaker_preset(base, corpus_seed=7, speaker=speaker)
            assert abs(p.f0 / base.f0 - 1.0) <= 0.15 + 1e-12
            for (freq, _), (bfreq, _) in zip(p.formants, base.formants):
                assert abs(freq / bfreq - 1.0) <= 0.08 + 1e-12

    def test_deterministic_per_speaker(self):
        base = make_preset("pressed")
        a = speaker_preset(base, corpus_seed=3, speaker=4)
        b = speaker_preset(base, corpus_seed=3, speaker=4)
        assert a == b
        assert a != speaker_preset(base, corpus_seed=3, speaker=5)

    def test_nsa_like_strips_formant_structure(self):
        p = nsa_like(make_preset("modal"))
        assert len(p.formants) == 1


class TestCorpus:
    def test_structure(self):
        items = make_corpus(n_speakers=3, vowels=("a", "i"), repetitions=2,
                            duration=0.3, seed=5)
        assert len(items) == 3 * 3 * 2 * 2
        speakers = {i.speaker_id for i in items}
        assert speakers == {"spk00", "spk01", "spk02"}
        assert {i.label for i in items} == set(QUALITIES)
        assert all(len(i.waveform) == 4800 for i in items)

    def test_repetitions_differ_but_are_reproducible(self):
        a = make_corpus(n_speakers=1, vowels=("a",), repetitions=2,
                        duration=0.3, seed=5)
        b = make_corpus(n_speakers=1, vowels=("a",), repetitions=2,
                        duration=0.3, seed=5)
        for x, y in zip(a, b):
            assert np.array_equal(x.waveform.samples, y.waveform.samples)
        rep0 = [i for i in a if i.repetition == "r0" and i.label == "modal"][0]
        rep1 = [i for i in a if i.repetition == "r1" and i.label == "modal"][0]
        assert not np.array_equal(rep0.waveform.samples, rep1.waveform.samples)
