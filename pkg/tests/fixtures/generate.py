"""Regenerate the VQEMB1 fixture files in this directory.

The binaries are committed; this script only documents how they were made.
Run from the repository root: python tests/fixtures/generate.py
"""

import struct
from pathlib import Path

import numpy as np

HERE = Path(__file__).parent
MAGIC = b"VQEMB1"


def header(model_byte, variant_byte, n_layers, dim):
    return struct.pack("<6sBBII", MAGIC, model_byte, variant_byte, n_layers, dim)


def pattern(n_layers, dim):
    grid = np.arange(n_layers * dim, dtype=np.float64).reshape(n_layers, dim)
    return (np.sin(grid * 0.01) + grid * 1e-6).astype("<f4")


def write(name, blob):
    (HERE / name).write_bytes(blob)
    print(f"wrote {name} ({len(blob)} bytes)")


def main():
    base = pattern(13, 768)
    large = pattern(25, 1024)

    write("valid_wav2vec2_base.vqemb", header(0, 0, 13, 768) + base.tobytes())
    write("valid_wav2vec2_large.vqemb", header(1, 2, 25, 1024) + large.tobytes())
    write("valid_hubert_large.vqemb", header(2, 4, 25, 1024) + large.tobytes())

    write("bad_magic.vqemb",
          b"NOPE!!" + header(0, 0, 13, 768)[6:] + base.tobytes())
    write("bad_model_byte.vqemb", header(9, 0, 13, 768) + base.tobytes())
    write("bad_variant_byte.vqemb", header(0, 7, 13, 768) + base.tobytes())
    write("mismatch_layers.vqemb", header(0, 0, 25, 768) + pattern(25, 768).tobytes())
    write("mismatch_dim.vqemb", header(0, 0, 13, 1024) + pattern(13, 1024).tobytes())
    write("truncated_payload.vqemb",
          header(0, 0, 13, 768) + base.tobytes()[:-64])
    write("trailing_bytes.vqemb",
          header(0, 0, 13, 768) + base.tobytes() + b"\x00\x00\x00\x00")
    nan_payload = base.copy()
    nan_payload[3, 5] = np.nan
    write("nonfinite.vqemb", header(0, 0, 13, 768) + nan_payload.tobytes())
    write("short_header.vqemb", header(0, 0, 13, 768)[:10])


if __name__ == "__main__":
    main()
