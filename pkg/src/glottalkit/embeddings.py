"""Ingestion of externally computed pre-trained-model embeddings (VQEMB1 files).

The binary layout is fixed: 6-byte magic "VQEMB1", one model-id byte, one
source-variant byte, two little-endian uint32 fields (n_layers, dim), then
n_layers*dim little-endian float32 values, row-major by layer. No trailing
bytes are permitted. Row 0 is the averaged input to the first transformer
layer; rows 1..L are the averaged transformer layer outputs.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .features import FeatureVector

MAGIC = b"VQEMB1"
MODEL_IDS = ("wav2vec2-base", "wav2vec2-large", "hubert-large")
MODEL_SHAPES = {
    "wav2vec2-base": (13, 768),
    "wav2vec2-large": (25, 1024),
    "hubert-large": (25, 1024),
}
SOURCE_VARIANTS = ("speech", "nsa", "speech-qcp", "speech-zff", "nsa-qcp", "nsa-zff")
_HEADER = struct.Struct("<6sBBII")


@dataclass(frozen=True)
class EmbeddingSet:
    """All layer-wise, temporally averaged vectors for one utterance."""

    model_id: str
    source_variant: str
    vectors: np.ndarray  # (n_layers, dim), float64 internally

    def __post_init__(self):
        if self.model_id not in MODEL_SHAPES:
            raise ValueError(f"unknown model id {self.model_id!r}")
        if self.source_variant not in SOURCE_VARIANTS:
            raise ValueError(f"unknown source variant {self.source_variant!r}")
        vectors = np.asarray(self.vectors, dtype=np.float64)
        expected = MODEL_SHAPES[self.model_id]
        if vectors.shape != expected:
            raise ValueError(
                f"layer/dim mismatch: {self.model_id} requires {expected}, "
                f"got {vectors.shape}"
            )
        if not np.all(np.isfinite(vectors)):
            raise ValueError("embedding matrix contains non-finite values")
        object.__setattr__(self, "vectors", vectors)

    @property
    def n_layers(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def write_embedding_file(embedding_set: EmbeddingSet, path) -> None:
    header = _HEADER.pack(
        MAGIC,
        MODEL_IDS.index(embedding_set.model_id),
        SOURCE_VARIANTS.index(embedding_set.source_variant),
        embedding_set.n_layers,
        embedding_set.dim,
    )
    payload = embedding_set.vectors.astype("<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(header + payload)


def read_embedding_file(path) -> EmbeddingSet:
    """Parse and validate a VQEMB1 file; every header/payload defect is rejected."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise ValueError("truncated header")
    magic, model_byte, variant_byte, n_layers, dim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ValueError("bad magic")
    if model_byte >= len(MODEL_IDS):
        raise ValueError(f"unknown model id byte {model_byte}")
    if variant_byte >= len(SOURCE_VARIANTS):
        raise ValueError(f"unknown source variant byte {variant_byte}")
    model_id = MODEL_IDS[model_byte]
    expected = MODEL_SHAPES[model_id]
    if (n_layers, dim) != expected:
        raise ValueError(
            f"layer/dim mismatch: header declares {n_layers}x{dim}, "
            f"{model_id} requires {expected[0]}x{expected[1]}"
        )
    payload = blob[_HEADER.size:]
    expected_bytes = n_layers * dim * 4
    if len(payload) < expected_bytes:
        raise ValueError("truncated payload")
    if len(payload) > expected_bytes:
        raise ValueError("trailing bytes after payload")
    vectors = np.frombuffer(payload, dtype="<f4").reshape(n_layers, dim)
    if not np.all(np.isfinite(vectors)):
        raise ValueError("non-finite values in payload")
    return EmbeddingSet(
        model_id=model_id,
        source_variant=SOURCE_VARIANTS[variant_byte],
        vectors=vectors.astype(np.float64),
    )


def select_layer(embedding_set: EmbeddingSet, layer_index: int) -> FeatureVector:
    """Copy of one layer's averaged vector (0 = input to the first transformer layer)."""
    if not 0 <= layer_index < embedding_set.n_layers:
        raise IndexError(
            f"layer index {layer_index} out of range [0, {embedding_set.n_layers})"
        )
    return FeatureVector(values=embedding_set.vectors[layer_index].copy(), kind="embedding")
