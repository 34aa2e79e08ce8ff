"""Waveform container, WAV I/O, pre-emphasis and framing shared by the DSP modules."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

PCM16_SCALE = 32768.0
WINDOW_KINDS = ("hamming", "rectangular")

_WAVE_FORMAT_PCM = 1
_WAVE_FORMAT_IEEE_FLOAT = 3


@dataclass(frozen=True)
class Waveform:
    """Uniformly sampled mono signal (dimensionless amplitude) with its sample rate."""

    samples: np.ndarray
    fs: float

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("waveform must be a non-empty 1-D sample sequence")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if not self.fs > 0:
            raise ValueError("sampling rate must be positive")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.fs


@dataclass(frozen=True)
class FrameSpec:
    """Analysis framing: 25 ms windows shifted by 5 ms unless overridden."""

    length_ms: float = 25.0
    shift_ms: float = 5.0
    window: str = "hamming"

    def __post_init__(self):
        if not 0 < self.shift_ms <= self.length_ms:
            raise ValueError("require 0 < shift_ms <= length_ms")
        if self.window not in WINDOW_KINDS:
            raise ValueError(f"window must be one of {WINDOW_KINDS}")

    def length_samples(self, fs: float) -> int:
        return int(round(self.length_ms * fs / 1000.0))

    def shift_samples(self, fs: float) -> int:
        return int(round(self.shift_ms * fs / 1000.0))


def hamming_window(length: int) -> np.ndarray:
    """Periodic Hamming window 0.54 - 0.46*cos(2*pi*n/L), n = 0..L-1.

    Periodic (denominator L, not L-1) so overlap-add sums stay flat.
    """
    n = np.arange(length, dtype=np.float64)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * n / length)


def window_values(kind: str, length: int) -> np.ndarray:
    if kind == "hamming":
        return hamming_window(length)
    if kind == "rectangular":
        return np.ones(length, dtype=np.float64)
    raise ValueError(f"window must be one of {WINDOW_KINDS}")


def load_wav(path, normalize: bool = False) -> Waveform:
    """Read a mono RIFF/WAVE file (PCM16 little-endian or IEEE float32).

    PCM16 samples are scaled by 1/32768 so the result lies in [-1, 1].
    ``normalize=True`` additionally rescales to unit peak (off by default).
    """
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError("malformed WAV header (not a RIFF/WAVE file)")

    fmt = None
    payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (chunk_size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + chunk_size]
        if chunk_id == b"fmt ":
            if len(body) < 16:
                raise ValueError("malformed WAV header (short fmt chunk)")
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            if len(body) < chunk_size:
                raise ValueError("malformed WAV header (truncated data chunk)")
            payload = body
        pos += 8 + chunk_size + (chunk_size & 1)  # chunks are word-aligned

    if fmt is None or payload is None:
        raise ValueError("malformed WAV header (missing fmt or data chunk)")

    audio_format, channels, fs, _byte_rate, _block_align, bits = fmt
    if channels != 1:
        raise ValueError("multichannel unsupported")
    if audio_format == _WAVE_FORMAT_PCM and bits == 16:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 2], dtype="<i2")
        samples = raw.astype(np.float64) / PCM16_SCALE
    elif audio_format == _WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        raw = np.frombuffer(payload[: len(payload) - len(payload) % 4], dtype="<f4")
        samples = raw.astype(np.float64)
    else:
        raise ValueError(
            f"unsupported encoding (format={audio_format}, bits={bits}); "
            "expected PCM16 or IEEE float32"
        )
    if samples.size == 0:
        raise ValueError("empty audio")

    if normalize:
        peak = np.max(np.abs(samples))
        if peak > 0:
            samples = samples / peak
    return Waveform(samples=samples, fs=float(fs))


def save_wav(w: Waveform, path, encoding: str = "pcm16") -> None:
    """Write a mono WAV file; the counterpart of :func:`load_wav`."""
    if encoding == "pcm16":
        scaled = np.clip(np.rint(w.samples * PCM16_SCALE), -32768, 32767)
        payload = scaled.astype("<i2").tobytes()
        audio_format, bits = _WAVE_FORMAT_PCM, 16
    elif encoding == "float32":
        payload = w.samples.astype("<f4").tobytes()
        audio_format, bits = _WAVE_FORMAT_IEEE_FLOAT, 32
    else:
        raise ValueError("encoding must be 'pcm16' or 'float32'")

    fs = int(round(w.fs))
    block_align = bits // 8
    header = b"RIFF" + struct.pack("<I", 36 + len(payload)) + b"WAVE"
    header += b"fmt " + struct.pack(
        "<IHHIIHH", 16, audio_format, 1, fs, fs * block_align, block_align, bits
    )
    header += b"data" + struct.pack("<I", len(payload))
    with open(path, "wb") as fh:
        fh.write(header + payload)


def pre_emphasize(w: Waveform) -> Waveform:
    """First difference x[n] = s[n] - s[n-1], with x[0] = s[0]."""
    return Waveform(samples=np.diff(w.samples, prepend=0.0), fs=w.fs)


def frame_signal(w: Waveform, spec: FrameSpec) -> np.ndarray:
    """Split into overlapping frames and apply the window; shape (n_frames, L).

    Frame k, sample j holds window[j] * s[k*H + j]; trailing samples that do
    not fill a frame are dropped.
    """
    length = spec.length_samples(w.fs)
    shift = spec.shift_samples(w.fs)
    n = w.samples.size
    if n < length:
        raise ValueError("signal shorter than one frame")
    n_frames = (n - length) // shift + 1
    idx = np.arange(length)[None, :] + shift * np.arange(n_frames)[:, None]
    return w.samples[idx] * window_values(spec.window, length)[None, :]
