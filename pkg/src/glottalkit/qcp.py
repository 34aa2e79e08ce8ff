"""Quasi-closed-phase inverse filtering: AME weights, weighted LP, residual stitching."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .signals import FrameSpec, Waveform, hamming_window, pre_emphasize
from .zff import GciSequence, UnvoicedError, zff_analyze

GLOTTAL_METHODS = ("qcp", "zff")


class DegenerateFrameError(ValueError):
    """Raised when the weighted normal equations are singular ("degenerate frame")."""


@dataclass(frozen=True)
class AmeConfig:
    """Attenuated-main-excitation weighting parameters.

    The duration/position quotients are fractions of the local pitch period;
    ``d_min`` is the weight inside the attenuated region. Defaults follow
    common practice and are all overridable.
    """

    dq: float = 0.7
    pq: float = 0.05
    n_ramp: int = 7
    d_min: float = 1e-5

    def __post_init__(self):
        if not 0 < self.dq < 1:
            raise ValueError("require 0 < dq < 1")
        if not 0 <= self.pq < 1:
            raise ValueError("require 0 <= pq < 1")
        if self.dq + self.pq > 1:
            raise ValueError("require dq + pq <= 1")
        if self.n_ramp < 0:
            raise ValueError("n_ramp must be >= 0")
        if not 0 < self.d_min <= 1:
            raise ValueError("require 0 < d_min <= 1")


@dataclass(frozen=True)
class VocalTractFilter:
    """All-pole model A(z) = 1 + a_1 z^-1 + ... + a_p z^-p (leading 1 implicit)."""

    a: np.ndarray
    order: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        if a.size != self.order:
            raise ValueError("coefficient count must equal the filter order")
        if not np.all(np.isfinite(a)):
            raise ValueError("filter coefficients must be finite")
        object.__setattr__(self, "a", a)

    def polynomial(self) -> np.ndarray:
        return np.concatenate(([1.0], self.a))

    def roots(self) -> np.ndarray:
        return np.roots(self.polynomial()) if self.order else np.empty(0, dtype=complex)


@dataclass(frozen=True)
class GlottalSource:
    """Estimated glottal source waveform; same length as the analyzed signal."""

    samples: np.ndarray
    fs: float
    method: str

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if not np.all(np.isfinite(samples)):
            raise ValueError("glottal source contains non-finite values")
        if self.method not in GLOTTAL_METHODS:
            raise ValueError(f"method must be one of {GLOTTAL_METHODS}")
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.samples.size

    def to_waveform(self) -> Waveform:
        return Waveform(samples=self.samples, fs=self.fs)


def build_ame_weights(gcis: GciSequence, n: int, cfg: AmeConfig) -> np.ndarray:
    """Per-sample AME weights in (0, 1]; 1.0 outside the attenuated regions.

    For each glottal cycle [g_k, g_{k+1}) of length T the weight drops to
    d_min on [g_k + round(pq*T), + round(dq*T)) with n_ramp-sample linear
    transitions on both sides (endpoints excluded, so the ramps are strictly
    monotone). Overlapping regions combine by minimum.
    """
    if gcis.instants.size and gcis.instants[-1] >= n:
        raise ValueError("GCI beyond signal length")
    w = np.ones(n, dtype=np.float64)

    def paint(lo: int, values: np.ndarray) -> None:
        hi = lo + values.size
        clip_lo, clip_hi = max(lo, 0), min(hi, n)
        if clip_lo < clip_hi:
            seg = values[clip_lo - lo:clip_hi - lo]
            w[clip_lo:clip_hi] = np.minimum(w[clip_lo:clip_hi], seg)

    ramp = np.linspace(1.0, cfg.d_min, cfg.n_ramp + 2)[1:-1]
    for g0, g1 in zip(gcis.instants[:-1], gcis.instants[1:]):
        t = int(g1 - g0)
        start = int(g0) + int(round(cfg.pq * t))
        stop = start + int(round(cfg.dq * t))
        paint(start - cfg.n_ramp, ramp)
        paint(start, np.full(max(stop - start, 0), cfg.d_min))
        paint(stop, ramp[::-1])
    return w


def wlp_analyze(frame: np.ndarray, weights: np.ndarray, order: int) -> VocalTractFilter:
    """Weighted linear prediction over the covariance range n = p..L-1.

    Minimizes sum_n w[n] * (s[n] + sum_k a_k s[n-k])^2, so uniform weights
    reduce to the covariance LP method. The weighted normal equations are
    solved through an orthogonal factorization of the sqrt(w)-scaled design
    matrix, which keeps near-singular frames numerically stable. Unstable
    roots of the resulting A(z) are reflected inside the unit circle.
    """
    s = np.asarray(frame, dtype=np.float64)
    wts = np.asarray(weights, dtype=np.float64)
    if s.ndim != 1 or s.size <= order:
        raise ValueError("frame must be 1-D and longer than the prediction order")
    if wts.shape != s.shape:
        raise ValueError("weights must align with the frame")
    if np.any(wts <= 0):
        raise ValueError("weights must be strictly positive")

    lags = np.stack([s[order - k:s.size - k] for k in range(1, order + 1)], axis=1)
    target = s[order:]
    scale = np.sqrt(wts[order:])
    try:
        coeffs, _, rank, _ = scipy.linalg.lstsq(lags * scale[:, None], -target * scale)
    except (scipy.linalg.LinAlgError, ValueError) as exc:
        raise DegenerateFrameError(f"degenerate frame: {exc}") from exc
    if rank < order:
        raise DegenerateFrameError(
            f"degenerate frame: design rank {rank} below order {order}")
    if not np.all(np.isfinite(coeffs)):
        raise DegenerateFrameError("degenerate frame: non-finite solution")
    return VocalTractFilter(a=_stabilize(coeffs), order=order)


def _stabilize(a: np.ndarray) -> np.ndarray:
    """Reflect roots with |z| >= 1 to radius 1/|z| (magnitude response preserved)."""
    poly = np.concatenate(([1.0], a))
    roots = np.roots(poly)
    mags = np.abs(roots)
    if np.all(mags < 1.0):
        return a
    outside = mags >= 1.0
    roots[outside] = roots[outside] / mags[outside] ** 2
    # a root exactly on the circle maps to itself; nudge it inside
    on_circle = np.abs(roots) >= 1.0
    roots[on_circle] *= 1.0 - 1e-9
    return np.poly(roots).real[1:]


def inverse_filter(w: Waveform, vt_filter: VocalTractFilter) -> np.ndarray:
    """Residual e[n] = s[n] + sum_k a_k s[n-k], with s[m] = 0 for m < 0."""
    return scipy.signal.lfilter(vt_filter.polynomial(), [1.0], w.samples)


def _frame_starts(n: int, length: int, shift: int) -> list[int]:
    starts = list(range(0, n - length + 1, shift))
    if starts[-1] != n - length:
        starts.append(n - length)  # anchor a final frame so every sample is covered
    return starts


def qcp_analyze(
    w: Waveform,
    cfg: AmeConfig | None = None,
    frame: FrameSpec | None = None,
    order: int | None = None,
    f0_min: float = 60.0,
    f0_max: float = 500.0,
    trend_passes: int = 2,
    polarity: str = "positive",
    pre_emphasis: bool = True,
    integrate: bool = False,
    gcis: GciSequence | None = None,
) -> GlottalSource:
    """Frame-wise QCP inverse filtering of ``w`` into a glottal source estimate.

    Per frame: AME weights from the ZFF GCIs, WLP on the (by default
    pre-emphasized) frame, inverse filtering of the raw frame with in-signal
    history, then weighted overlap-add with the window sums normalized out.
    ``integrate`` optionally applies a leaky integrator (0.99) to compensate
    lip radiation; off by default. Precomputed ``gcis`` skip the ZFF pass.
    """
    cfg = cfg or AmeConfig()
    frame = frame or FrameSpec()
    fs = w.fs
    n = len(w)
    length = frame.length_samples(fs)
    shift = frame.shift_samples(fs)
    if n < length:
        raise ValueError("signal shorter than one frame")
    p = order if order is not None else int(round(fs / 1000.0)) + 2

    if gcis is None:
        _, gcis = zff_analyze(w, f0_min=f0_min, f0_max=f0_max,
                              trend_passes=trend_passes, polarity=polarity)
    ame = build_ame_weights(gcis, n, cfg)
    np.clip(ame, cfg.d_min, 1.0, out=ame)

    analysis = pre_emphasize(w).samples if pre_emphasis else w.samples
    raw = w.samples
    window = hamming_window(length)
    acc = np.zeros(n)
    norm = np.zeros(n)
    for start in _frame_starts(n, length, shift):
        vt = wlp_analyze(analysis[start:start + length], ame[start:start + length], p)
        # FIR residual with true in-signal history (zeros before sample 0)
        ctx = raw[max(start - p, 0):start + length]
        if start < p:
            ctx = np.concatenate((np.zeros(p - start), ctx))
        residual = np.convolve(ctx, vt.polynomial())[p:p + length]
        acc[start:start + length] += window * residual
        norm[start:start + length] += window

    source = acc / norm
    if integrate:
        source = scipy.signal.lfilter([1.0], [1.0, -0.99], source)
    return GlottalSource(samples=source, fs=fs, method="qcp")


def zff_glottal_source(
    w: Waveform,
    f0_min: float = 60.0,
    f0_max: float = 500.0,
    trend_passes: int = 2,
    polarity: str = "positive",
) -> tuple[GlottalSource, GciSequence]:
    """ZFF output packaged as the approximate glottal source waveform."""
    z, gcis = zff_analyze(w, f0_min=f0_min, f0_max=f0_max,
                          trend_passes=trend_passes, polarity=polarity)
    return GlottalSource(samples=z.samples, fs=z.fs, method="zff"), gcis


# re-exported here because QCP consumes it and callers catch it from either module
__all__ = [
    "AmeConfig", "VocalTractFilter", "GlottalSource", "DegenerateFrameError",
    "UnvoicedError", "build_ame_weights", "wlp_analyze", "inverse_filter",
    "qcp_analyze", "zff_glottal_source",
]
