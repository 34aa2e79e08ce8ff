"""Minimal mono WAV reader (PCM16 LE / IEEE float32), self-contained."""

from __future__ import annotations

import struct

import numpy as np


def read_wav(path) -> tuple[np.ndarray, float]:
    """Return (float32 samples in [-1, 1]-ish scale, sample rate)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 12 or data[0:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise ValueError(f"{path}: not a RIFF/WAVE file")
    fmt = payload = None
    pos = 12
    while pos + 8 <= len(data):
        chunk_id = data[pos:pos + 4]
        (size,) = struct.unpack_from("<I", data, pos + 4)
        body = data[pos + 8:pos + 8 + size]
        if chunk_id == b"fmt ":
            fmt = struct.unpack_from("<HHIIHH", body, 0)
        elif chunk_id == b"data":
            payload = body
        pos += 8 + size + (size & 1)
    if fmt is None or payload is None:
        raise ValueError(f"{path}: missing fmt or data chunk")
    audio_format, channels, fs, _rate, _align, bits = fmt
    if channels != 1:
        raise ValueError(f"{path}: multichannel unsupported")
    if audio_format == 1 and bits == 16:
        samples = np.frombuffer(payload, dtype="<i2").astype(np.float32) / 32768.0
    elif audio_format == 3 and bits == 32:
        samples = np.frombuffer(payload, dtype="<f4").astype(np.float32)
    else:
        raise ValueError(f"{path}: unsupported encoding (format={audio_format}, bits={bits})")
    if samples.size == 0:
        raise ValueError(f"{path}: empty audio")
    return samples, float(fs)
