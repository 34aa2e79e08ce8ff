"""Conventional spectral features: averaged log-spectrogram, mel-spectrogram, MFCCs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .signals import FrameSpec, Waveform, pre_emphasize, frame_signal

N_FFT = 1024
LOG_FLOOR = 1e-10  # inside every logarithm so silent frames stay bounded
FEATURE_DIMS = {"spectrogram513": 513, "mel80": 80, "mfcc39": 39}
EMBEDDING_DIMS = (768, 1024)


@dataclass(frozen=True)
class FeatureVector:
    """Fixed-dimension feature tagged with its extractor kind."""

    values: np.ndarray
    kind: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError("feature values must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise ValueError("feature values must be finite")
        if self.kind in FEATURE_DIMS:
            if values.size != FEATURE_DIMS[self.kind]:
                raise ValueError(
                    f"{self.kind} requires dim {FEATURE_DIMS[self.kind]}, got {values.size}"
                )
        elif self.kind == "embedding":
            if values.size not in EMBEDDING_DIMS:
                raise ValueError(f"embedding dim must be one of {EMBEDDING_DIMS}")
        else:
            raise ValueError(f"unknown feature kind {self.kind!r}")
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return self.values.size


def frame_amplitude_spectra(
    w: Waveform,
    frame: FrameSpec | None = None,
    n_fft: int = N_FFT,
    pre_emphasis: bool = False,
) -> np.ndarray:
    """Per-frame amplitude spectra, shape (n_frames, n_fft//2 + 1)."""
    if pre_emphasis:
        w = pre_emphasize(w)
    frames = frame_signal(w, frame or FrameSpec())
    return np.abs(np.fft.rfft(frames, n=n_fft, axis=1))


def spectrogram_feature(
    w: Waveform, frame: FrameSpec | None = None, pre_emphasis: bool = False
) -> FeatureVector:
    """Time-averaged log amplitude spectrum; 513 values at n_fft=1024."""
    spectra = frame_amplitude_spectra(w, frame, pre_emphasis=pre_emphasis)
    return FeatureVector(values=np.log(spectra + LOG_FLOOR).mean(axis=0),
                         kind="spectrogram513")


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_center_frequencies(n_filters: int, fs: float) -> np.ndarray:
    """Triangle centers, equally spaced on the mel scale between 0 Hz and fs/2."""
    grid = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(fs / 2.0), n_filters + 2))
    return grid[1:-1]


def mel_filterbank(n_filters: int = 80, n_fft: int = N_FFT, fs: float = 16000.0) -> np.ndarray:
    """Triangular mel filterbank, peak-normalized rows; shape (n_filters, n_fft//2+1)."""
    if n_filters < 1:
        raise ValueError("n_filters must be >= 1")
    edges = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(fs / 2.0), n_filters + 2))
    bin_hz = np.arange(n_fft // 2 + 1) * fs / n_fft
    lower, center, upper = edges[:-2], edges[1:-1], edges[2:]
    rising = (bin_hz[None, :] - lower[:, None]) / (center - lower)[:, None]
    falling = (upper[:, None] - bin_hz[None, :]) / (upper - center)[:, None]
    fb = np.maximum(np.minimum(rising, falling), 0.0)
    peaks = fb.max(axis=1)
    if np.any(peaks <= 0):
        raise ValueError("n_filters too large for the FFT resolution (empty filter row)")
    return fb / peaks[:, None]


def mel_spectrogram_feature(
    w: Waveform, n_filters: int = 80, frame: FrameSpec | None = None,
    pre_emphasis: bool = False,
) -> FeatureVector:
    """Time-averaged mel-filterbank output on a dB scale; 80 values by default."""
    spectra = frame_amplitude_spectra(w, frame, pre_emphasis=pre_emphasis)
    fb = mel_filterbank(n_filters, N_FFT, w.fs)
    mel_db = 20.0 * np.log10(spectra @ fb.T + LOG_FLOOR)
    return FeatureVector(values=mel_db.mean(axis=0), kind="mel80")


def delta_coefficients(frames: np.ndarray, window: int = 2) -> np.ndarray:
    """Regression deltas over +/-window frames, edge frames replicated."""
    if frames.shape[0] < 2 * window + 1:
        raise ValueError("too few frames for delta computation")
    padded = np.pad(frames, ((window, window), (0, 0)), mode="edge")
    denom = 2.0 * sum(k * k for k in range(1, window + 1))
    out = np.zeros_like(frames)
    for k in range(1, window + 1):
        out += k * (padded[window + k:padded.shape[0] - window + k]
                    - padded[window - k:padded.shape[0] - window - k])
    return out / denom


def mfcc_feature(
    w: Waveform, frame: FrameSpec | None = None, pre_emphasis: bool = False,
    delta_window: int = 2,
) -> FeatureVector:
    """13 DCT-II cepstra of the dB mel spectrum plus deltas and delta-deltas (39)."""
    spectra = frame_amplitude_spectra(w, frame, pre_emphasis=pre_emphasis)
    fb = mel_filterbank(80, N_FFT, w.fs)
    mel_db = 20.0 * np.log10(spectra @ fb.T + LOG_FLOOR)
    cepstra = scipy.fft.dct(mel_db, type=2, norm="ortho", axis=1)[:, :13]
    d1 = delta_coefficients(cepstra, delta_window)
    d2 = delta_coefficients(d1, delta_window)
    stacked = np.concatenate([cepstra, d1, d2], axis=1)
    return FeatureVector(values=stacked.mean(axis=0), kind="mfcc39")


def extract_feature(w: Waveform, kind: str, pre_emphasis: bool = False) -> FeatureVector:
    """Dispatch on the three baseline extractor kinds."""
    if kind == "spectrogram513":
        return spectrogram_feature(w, pre_emphasis=pre_emphasis)
    if kind == "mel80":
        return mel_spectrogram_feature(w, pre_emphasis=pre_emphasis)
    if kind == "mfcc39":
        return mfcc_feature(w, pre_emphasis=pre_emphasis)
    raise ValueError(f"unknown baseline feature kind {kind!r}")
