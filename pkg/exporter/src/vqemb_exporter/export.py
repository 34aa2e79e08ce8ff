"""Layer-wise embedding extraction from wav2vec2/HuBERT checkpoints.

For each utterance the exporter runs one forward pass in eval mode and stores
the temporal average of the input to the first transformer layer (row 0) and
of every transformer layer's output (rows 1..L) as a VQEMB1 file.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .vqemb import MODEL_CONTRACTS, SOURCE_VARIANTS, expected_shape, write_vqemb
from .wavio import read_wav

log = logging.getLogger("vqemb_exporter")

EXPECTED_SAMPLE_RATE = 16000.0
PEAK_TARGET = 0.95
MANIFEST_FIELDS = ("speaker_id", "label", "vowel", "repetition", "variant", "path")


@dataclass(frozen=True)
class ExportJob:
    manifest: str
    model_id: str
    source_variant: str
    out_dir: str
    checkpoint: str | None = None  # defaults to the published checkpoint
    peak_normalize: bool = True

    def __post_init__(self):
        if self.model_id not in MODEL_CONTRACTS:
            raise ValueError(f"model_id must be one of {tuple(MODEL_CONTRACTS)}")
        if self.source_variant not in SOURCE_VARIANTS:
            raise ValueError(f"source_variant must be one of {SOURCE_VARIANTS}")


def read_manifest(path) -> list[dict]:
    base = os.path.dirname(os.path.abspath(path))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(MANIFEST_FIELDS):
            raise ValueError(f"manifest header must be {','.join(MANIFEST_FIELDS)}")
        rows = []
        for row in reader:
            if row["path"] and not os.path.isabs(row["path"]):
                row = dict(row, path=os.path.join(base, row["path"]))
            rows.append(row)
        return rows


def load_checkpoint(model_id: str, checkpoint: str | None):
    """Load the declared model in eval mode and verify its geometry."""
    import torch
    from transformers import AutoModel

    family, layers, dim, default_ckpt = MODEL_CONTRACTS[model_id]
    source = checkpoint or default_ckpt
    try:
        model = AutoModel.from_pretrained(source)
    except Exception as exc:
        raise RuntimeError(f"checkpoint load failure for {source!r}: {exc}") from exc
    cfg = model.config
    if cfg.model_type != family:
        raise ValueError(
            f"checkpoint is a {cfg.model_type!r} model but {model_id} is {family!r}")
    if cfg.num_hidden_layers != layers or cfg.hidden_size != dim:
        raise ValueError(
            f"checkpoint geometry {cfg.num_hidden_layers}x{cfg.hidden_size} does not "
            f"match {model_id} ({layers} layers x {dim})")
    model.eval()
    for p in model.parameters():
        p.requires_grad_(False)
    torch.set_grad_enabled(False)
    return model


def embed_waveform(model, samples: np.ndarray, peak_normalize: bool) -> np.ndarray:
    """One forward pass; returns the (n_layers+1, dim) temporally averaged matrix."""
    import torch

    if peak_normalize:
        peak = float(np.max(np.abs(samples)))
        if peak > 0:
            samples = samples * (PEAK_TARGET / peak)
    batch = torch.from_numpy(np.ascontiguousarray(samples, dtype=np.float32))[None, :]
    with torch.no_grad():
        out = model(batch, output_hidden_states=True)
    rows = [h[0].mean(dim=0).numpy() for h in out.hidden_states]
    return np.stack(rows).astype(np.float32)


def export(job: ExportJob) -> list[dict]:
    """Run the job; returns the new manifest rows (also written to disk)."""
    rows = read_manifest(job.manifest)
    model = load_checkpoint(job.model_id, job.checkpoint)
    n_layers, dim = expected_shape(job.model_id)

    out = Path(job.out_dir)
    (out / "emb").mkdir(parents=True, exist_ok=True)
    new_rows = []
    for idx, row in enumerate(rows):
        samples, fs = read_wav(row["path"])
        if fs != EXPECTED_SAMPLE_RATE:
            raise ValueError(
                f"{row['path']}: sample rate {fs:.0f} Hz, expected 16000 Hz")
        vectors = embed_waveform(model, samples, job.peak_normalize)
        if vectors.shape != (n_layers, dim):
            raise RuntimeError(
                f"unexpected hidden-state geometry {vectors.shape} for {job.model_id}")
        # row index keeps names collision-free whatever the input stems are
        name = f"{idx:04d}_{Path(row['path']).stem}.vqemb"
        write_vqemb(out / "emb" / name, job.model_id, job.source_variant, vectors)
        new_rows.append(dict(row, variant=job.source_variant, path=f"emb/{name}"))
        log.info("exported %s (%d/%d)", name, idx + 1, len(rows))

    with open(out / "manifest.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(new_rows)
    return new_rows
