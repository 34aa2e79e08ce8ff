"""VQEMB1 embedding interchange: write, validate, select layers.

Pre-trained-model features arrive as binary files holding one temporally
averaged vector per transformer layer. The toolkit validates them strictly
and exposes each layer as a feature vector for the layer sweep.
"""

import tempfile
from pathlib import Path

import numpy as np

from glottalkit import EmbeddingSet, read_embedding_file, select_layer, \
    write_embedding_file
from glottalkit.embeddings import MODEL_SHAPES

rng = np.random.default_rng(0)
workdir = Path(tempfile.mkdtemp(prefix="vqemb_demo_"))

for model_id, (n_layers, dim) in MODEL_SHAPES.items():
    path = workdir / f"{model_id}.vqemb"
    es = EmbeddingSet(model_id=model_id, source_variant="speech-qcp",
                      vectors=rng.standard_normal((n_layers, dim)).astype(np.float32))
    write_embedding_file(es, path)
    back = read_embedding_file(path)
    print(f"{model_id}: {back.n_layers} layers x {back.dim} dims, "
          f"{path.stat().st_size} bytes on disk")

es = read_embedding_file(workdir / "wav2vec2-base.vqemb")
layer0 = select_layer(es, 0)   # averaged input to the first transformer layer
layer12 = select_layer(es, es.n_layers - 1)
print(f"\nlayer 0 vs layer 12 norm: {np.linalg.norm(layer0.values):.1f} "
      f"vs {np.linalg.norm(layer12.values):.1f}")

# a corrupted byte is rejected outright
blob = bytearray((workdir / "wav2vec2-base.vqemb").read_bytes())
blob[0] = 0x58
(workdir / "corrupt.vqemb").write_bytes(blob)
try:
    read_embedding_file(workdir / "corrupt.vqemb")
except ValueError as exc:
    print(f"corrupt file rejected: {exc}")
