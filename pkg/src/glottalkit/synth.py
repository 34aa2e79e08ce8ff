"""Synthetic vowel generator with breathy/modal/pressed presets.

Desk-scale ground-truth oracle: a Rosenberg-style glottal pulse train
(derivative used as excitation), additive aspiration noise, and an all-pole
formant cascade. Every output is a pure function of (preset, fs, seed) and the
exact pulse-onset indices are returned alongside the waveform.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.signal

from .signals import Waveform

QUALITIES = ("breathy", "modal", "pressed")

VOWEL_FORMANTS = {
    "a": ((800.0, 80.0), (1150.0, 90.0), (2900.0, 120.0)),
    "ae": ((660.0, 80.0), (1700.0, 100.0), (2400.0, 120.0)),
    "e": ((440.0, 70.0), (2000.0, 100.0), (2600.0, 120.0)),
    "i": ((270.0, 60.0), (2300.0, 100.0), (3000.0, 120.0)),
    "u": ((300.0, 60.0), (870.0, 90.0), (2250.0, 120.0)),
}

# Pulse shape, aspiration, perturbation and vocal-effort level per quality.
# Breathy: soft, dark, irregular; pressed: loud, bright, sharp closure.
# Frozen after verifying the pressed-vs-breathy harmonic-tilt margin and the
# corpus nearest-centroid separability oracle.
QUALITY_SETTINGS = {
    "breathy": dict(open_quotient=0.90, tilt=0.50, noise_level=0.15,
                    jitter_percent=1.2, shimmer_percent=3.0, level_rms=0.028),
    "modal": dict(open_quotient=0.62, tilt=0.60, noise_level=0.03,
                  jitter_percent=0.4, shimmer_percent=1.0, level_rms=0.045),
    "pressed": dict(open_quotient=0.25, tilt=0.92, noise_level=0.0015,
                    jitter_percent=0.1, shimmer_percent=0.3, level_rms=0.095),
}

SPEAKER_F0_SPREAD = 0.15      # +/-15% per-speaker f0 perturbation
SPEAKER_FORMANT_SPREAD = 0.08  # +/-8% per-speaker formant perturbation
NOISE_BAND_HZ = (800.0, 2800.0)  # aspiration band; keeps the pitch band clean


@dataclass(frozen=True)
class VoicePreset:
    quality: str
    open_quotient: float
    tilt: float          # fraction of the open phase spent opening
    noise_level: float   # aspiration noise, relative to excitation RMS
    f0: float
    formants: tuple      # ((freq_hz, bandwidth_hz), ...)
    jitter_percent: float
    shimmer_percent: float
    duration: float      # seconds
    level_rms: float = 0.05  # output RMS; the vocal-effort axis across qualities

    def __post_init__(self):
        if self.quality not in QUALITIES:
            raise ValueError(f"quality must be one of {QUALITIES}")
        if not 0 < self.open_quotient < 1:
            raise ValueError("open quotient must lie in (0, 1)")
        if not 0 < self.tilt < 1:
            raise ValueError("tilt must lie in (0, 1)")
        if not 60.0 <= self.f0 <= 500.0:
            raise ValueError("f0 must lie within [60, 500] Hz")
        if self.noise_level < 0 or self.duration <= 0 or self.level_rms <= 0:
            raise ValueError("noise level must be >= 0, duration and level positive")


def make_preset(quality: str, vowel: str = "a", f0: float = 200.0,
                duration: float = 0.5, **overrides) -> VoicePreset:
    if quality not in QUALITY_SETTINGS:
        raise ValueError(f"quality must be one of {QUALITIES}")
    settings = dict(QUALITY_SETTINGS[quality])
    settings.update(overrides)
    return VoicePreset(quality=quality, f0=f0, formants=VOWEL_FORMANTS[vowel],
                       duration=duration, **settings)


def rosenberg_pulse(period: int, open_quotient: float, tilt: float) -> np.ndarray:
    """One glottal flow pulse, 0..1, opening then closing within the open phase."""
    t_open = max(int(round(open_quotient * period)), 3)
    t_rise = min(max(int(round(tilt * t_open)), 2), t_open - 1)
    t_fall = t_open - t_rise
    g = np.zeros(period)
    n_rise = np.arange(t_rise)
    g[:t_rise] = 0.5 * (1.0 - np.cos(np.pi * n_rise / t_rise))
    n_fall = np.arange(t_fall)
    g[t_rise:t_open] = np.cos(np.pi * n_fall / (2.0 * t_fall))
    return g


def formant_polynomial(formants, fs: float) -> np.ndarray:
    """Denominator of the cascaded two-pole resonators."""
    a = np.array([1.0])
    for freq, bandwidth in formants:
        if freq >= fs / 2:
            raise ValueError(f"formant above Nyquist: {freq} Hz at fs={fs}")
        r = np.exp(-np.pi * bandwidth / fs)
        theta = 2.0 * np.pi * freq / fs
        a = np.convolve(a, [1.0, -2.0 * r * np.cos(theta), r * r])
    return a


def _aspiration_noise(n: int, fs: float, rng: np.random.Generator) -> np.ndarray:
    """Unit-RMS band-limited noise; stays clear of the pitch band so ZFF GCIs hold."""
    lo, hi = NOISE_BAND_HZ
    b, a = scipy.signal.butter(2, [2.0 * lo / fs, 2.0 * hi / fs], "bandpass")
    noise = scipy.signal.lfilter(b, a, rng.standard_normal(n))
    return noise / np.sqrt(np.mean(noise ** 2))


def synthesize_vowel(preset: VoicePreset, fs: float = 16000.0,
                     seed=0) -> tuple[Waveform, np.ndarray]:
    """Render a vowel and return (waveform, ground-truth pulse-onset indices).

    The output is scaled to the preset's RMS level, so the vocal-effort
    ladder across qualities survives any linear downstream processing.
    """
    n = int(round(preset.duration * fs))
    rng = np.random.default_rng(seed)
    nominal = fs / preset.f0

    excitation = np.zeros(n)
    onsets = []
    t = 0
    while t < n:
        onsets.append(t)
        period = max(int(round(nominal * (
            1.0 + preset.jitter_percent / 100.0 * rng.standard_normal()))), 8)
        amplitude = 1.0 + preset.shimmer_percent / 100.0 * rng.standard_normal()
        flow = rosenberg_pulse(period, preset.open_quotient, preset.tilt)
        pulse = np.diff(flow, prepend=0.0)  # flow derivative drives the tract
        take = min(period, n - t)
        excitation[t:t + take] += amplitude * pulse[:take]
        t += period

    rms = np.sqrt(np.mean(excitation ** 2))
    if preset.noise_level > 0:
        excitation = excitation + preset.noise_level * rms * _aspiration_noise(n, fs, rng)

    a = formant_polynomial(preset.formants, fs)
    rendered = scipy.signal.lfilter([1.0], a, excitation)
    out_rms = np.sqrt(np.mean(rendered ** 2))
    if out_rms > 0:
        rendered = preset.level_rms * rendered / out_rms
    return Waveform(samples=rendered, fs=fs), np.asarray(onsets, dtype=np.int64)


def speaker_preset(preset: VoicePreset, corpus_seed: int, speaker: int) -> VoicePreset:
    """Perturb f0 (+/-15%) and formants (+/-8%) with a per-speaker seed."""
    rng = np.random.default_rng([corpus_seed, speaker])
    f0 = preset.f0 * (1.0 + SPEAKER_F0_SPREAD * rng.uniform(-1.0, 1.0))
    formants = tuple(
        (freq * (1.0 + SPEAKER_FORMANT_SPREAD * rng.uniform(-1.0, 1.0)), bandwidth)
        for freq, bandwidth in preset.formants
    )
    return replace(preset, f0=float(np.clip(f0, 60.0, 500.0)), formants=formants)


def nsa_like(preset: VoicePreset) -> VoicePreset:
    """Crude neck-surface approximation: one low resonance instead of formants.

    This is not a sensor model; it only removes most supraglottal structure.
    """
    return replace(preset, formants=((350.0, 300.0),))


@dataclass(frozen=True)
class CorpusItem:
    speaker_id: str
    label: str
    vowel: str
    repetition: str
    waveform: Waveform
    onsets: np.ndarray


def make_corpus(
    n_speakers: int = 12,
    vowels=("a", "ae", "e", "i", "u"),
    repetitions: int = 2,
    fs: float = 16000.0,
    duration: float = 0.5,
    base_f0: float = 190.0,
    variant: str = "speech",
    seed: int = 1234,
) -> list[CorpusItem]:
    """Deterministic synthetic corpus: speakers x qualities x vowels x repetitions."""
    items = []
    for s in range(n_speakers):
        speaker_id = f"spk{s:02d}"
        for q_idx, quality in enumerate(QUALITIES):
            for v_idx, vowel in enumerate(vowels):
                base = make_preset(quality, vowel=vowel, f0=base_f0, duration=duration)
                preset = speaker_preset(base, seed, s)
                if variant == "nsa":
                    preset = nsa_like(preset)
                for rep in range(repetitions):
                    w, onsets = synthesize_vowel(
                        preset, fs=fs, seed=[seed, s, q_idx, v_idx, rep])
                    items.append(CorpusItem(
                        speaker_id=speaker_id, label=quality, vowel=vowel,
                        repetition=f"r{rep}", waveform=w, onsets=onsets))
    return items
