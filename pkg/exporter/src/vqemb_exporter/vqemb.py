"""VQEMB1 writer and the model/variant contract tables.

Byte layout: magic "VQEMB1", model-id byte, source-variant byte, uint32-LE
layer count, uint32-LE dimension, then layer-major float32-LE values. No
trailing bytes.
"""

from __future__ import annotations

import struct

import numpy as np

MAGIC = b"VQEMB1"
MODEL_IDS = ("wav2vec2-base", "wav2vec2-large", "hubert-large")
SOURCE_VARIANTS = ("speech", "nsa", "speech-qcp", "speech-zff", "nsa-qcp", "nsa-zff")

# model family, transformer layer count, hidden dimension, published checkpoint
MODEL_CONTRACTS = {
    "wav2vec2-base": ("wav2vec2", 12, 768, "facebook/wav2vec2-base-960h"),
    "wav2vec2-large": ("wav2vec2", 24, 1024, "facebook/wav2vec2-large-960h"),
    "hubert-large": ("hubert", 24, 1024, "facebook/hubert-large-ls960-ft"),
}

_HEADER = struct.Struct("<6sBBII")


def expected_shape(model_id: str) -> tuple[int, int]:
    _family, layers, dim, _ckpt = MODEL_CONTRACTS[model_id]
    return layers + 1, dim  # +1: the averaged input to the first layer


def write_vqemb(path, model_id: str, source_variant: str, vectors: np.ndarray) -> None:
    vectors = np.ascontiguousarray(vectors, dtype="<f4")
    if vectors.shape != expected_shape(model_id):
        raise ValueError(
            f"layer/dim mismatch: {model_id} requires {expected_shape(model_id)}, "
            f"got {vectors.shape}")
    if not np.all(np.isfinite(vectors)):
        raise ValueError("non-finite embedding values")
    header = _HEADER.pack(MAGIC, MODEL_IDS.index(model_id),
                          SOURCE_VARIANTS.index(source_variant),
                          vectors.shape[0], vectors.shape[1])
    with open(path, "wb") as fh:
        fh.write(header + vectors.tobytes())
