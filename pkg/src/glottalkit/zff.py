"""Zero-frequency filtering: 0 Hz resonator cascade, trend removal and GCI detection."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .signals import Waveform, pre_emphasize

AUTOCORR_VOICING_FLOOR = 0.1


class UnvoicedError(ValueError):
    """Raised when a signal shows no usable periodicity ("unvoiced/aperiodic")."""


@dataclass(frozen=True)
class ZffSignal:
    """Trend-removed output of the zero-frequency resonator cascade."""

    samples: np.ndarray
    fs: float
    mean_pitch_period: int  # basis of the 2M+1 trend-removal window

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(samples)):
            raise ValueError("ZFF signal contains non-finite values")
        if self.mean_pitch_period < 2:
            raise ValueError("mean pitch period must be >= 2 samples")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class GciSequence:
    """Glottal closure instants as strictly increasing sample indices."""

    instants: np.ndarray
    fs: float

    def __post_init__(self):
        instants = np.asarray(self.instants, dtype=np.int64)
        if instants.size and (np.any(np.diff(instants) <= 0) or instants[0] < 0):
            raise ValueError("GCI instants must be strictly increasing and non-negative")
        object.__setattr__(self, "instants", instants)

    def __len__(self) -> int:
        return self.instants.size

    def periods(self) -> np.ndarray:
        return np.diff(self.instants)


def estimate_mean_pitch_period(w: Waveform, f0_min: float = 60.0, f0_max: float = 500.0) -> int:
    """Average pitch period in samples from the autocorrelation of the pre-emphasized signal.

    Searches lags in [fs/f0_max, fs/f0_min]; a normalized peak below
    0.1 means no usable periodicity and raises :class:`UnvoicedError`.
    """
    if not 0 < f0_min < f0_max:
        raise ValueError("require 0 < f0_min < f0_max")
    n = len(w)
    if n < 2 * w.fs / f0_min:
        raise ValueError("signal too short for pitch estimation (need two f0_min periods)")

    x = pre_emphasize(w).samples
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(x, nfft)
    r = np.fft.irfft(spec * np.conj(spec), nfft)[:n]
    if r[0] <= 0:
        raise UnvoicedError("unvoiced/aperiodic: zero-energy signal")
    r = r / r[0]

    lag_lo = int(round(w.fs / f0_max))
    lag_hi = min(int(round(w.fs / f0_min)), n - 1)
    window = r[lag_lo:lag_hi + 1]
    peak = int(np.argmax(window))
    if window[peak] < AUTOCORR_VOICING_FLOOR:
        raise UnvoicedError(
            f"unvoiced/aperiodic: autocorrelation peak {window[peak]:.3f} below "
            f"{AUTOCORR_VOICING_FLOOR}"
        )
    return lag_lo + peak


def zfr_cascade(x: np.ndarray) -> np.ndarray:
    """Cascade of two zero-frequency resonators (double pole at z=1 each).

    The recursion z_o[n] = 4 z_o[n-1] - 6 z_o[n-2] + 4 z_o[n-3] - z_o[n-4] + x[n]
    equals four cumulative sums; a unit impulse yields C(n+3, 3) = 1, 4, 10, 20, ...
    """
    z = np.asarray(x, dtype=np.float64)
    for _ in range(4):
        z = np.cumsum(z)
    return z


def _trend_window_half(period: int) -> int:
    # half-up rounding; Python round() would round 2.5 -> 2
    return max(int(period / 2 + 0.5), 1)


def remove_local_mean(z: np.ndarray, period: int) -> np.ndarray:
    """Subtract the mean over a sliding window of 2M+1 samples, M = round(period/2).

    Boundary windows are truncated to the in-bounds samples.
    """
    m = _trend_window_half(period)
    n = z.size
    prefix = np.concatenate(([0.0], np.cumsum(z)))
    idx = np.arange(n)
    lo = np.maximum(idx - m, 0)
    hi = np.minimum(idx + m, n - 1)
    sums = prefix[hi + 1] - prefix[lo]
    counts = hi - lo + 1
    return z - sums / counts


def zero_frequency_filter(w: Waveform, period: int, trend_passes: int = 2) -> ZffSignal:
    """Pre-emphasis, the 0 Hz resonator cascade, then repeated local-mean removal.

    ``trend_passes=1`` is the textbook single subtraction; the default of 2
    also removes the residual drift the cascade leaves on longer signals.
    """
    if period < 2:
        raise ValueError("pitch period must be >= 2 samples")
    if trend_passes < 1:
        raise ValueError("trend_passes must be >= 1")
    z = zfr_cascade(pre_emphasize(w).samples)
    for _ in range(trend_passes):
        z = remove_local_mean(z, period)
    if not np.all(np.isfinite(z)):
        raise ValueError("non-finite intermediate values in zero-frequency filtering")
    return ZffSignal(samples=z, fs=w.fs, mean_pitch_period=int(period))


def detect_gcis(z: ZffSignal, polarity: str = "positive", margin: int = 0) -> GciSequence:
    """Negative-to-positive zero crossings of the ZFF signal, reported at n+1.

    ``margin`` drops instants within that many samples of either end, where
    the trend-removal window was truncated; :func:`zff_analyze` passes M.
    """
    if polarity not in ("positive", "negative"):
        raise ValueError("polarity must be 'positive' or 'negative'")
    s = z.samples if polarity == "positive" else -z.samples
    crossings = np.flatnonzero((s[:-1] < 0) & (s[1:] >= 0)) + 1
    if margin > 0:
        crossings = crossings[(crossings >= margin) & (crossings < s.size - margin)]
    return GciSequence(instants=crossings, fs=z.fs)


def zff_analyze(
    w: Waveform,
    f0_min: float = 60.0,
    f0_max: float = 500.0,
    trend_passes: int = 2,
    polarity: str = "positive",
) -> tuple[ZffSignal, GciSequence]:
    """Full ZFF pass: estimate the mean pitch period, filter, detect GCIs."""
    period = estimate_mean_pitch_period(w, f0_min=f0_min, f0_max=f0_max)
    z = zero_frequency_filter(w, period, trend_passes=trend_passes)
    gcis = detect_gcis(z, polarity=polarity, margin=_trend_window_half(period))
    return z, gcis
