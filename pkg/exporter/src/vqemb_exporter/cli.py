"""Command line for the embedding exporter."""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .export import ExportJob, export
from .vqemb import MODEL_CONTRACTS, SOURCE_VARIANTS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vqemb-export",
        description="Extract layer-wise averaged wav2vec2/HuBERT embeddings "
                    "into VQEMB1 files.")
    parser.add_argument("--manifest", required=True,
                        help="dataset manifest CSV (speaker_id,label,...,path)")
    parser.add_argument("--model", required=True, choices=tuple(MODEL_CONTRACTS),
                        help="which published model the checkpoint implements")
    parser.add_argument("--variant", required=True, choices=SOURCE_VARIANTS,
                        help="source variant tag recorded in the output files")
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--checkpoint", default=None,
                        help="local checkpoint directory or hub id "
                             "(default: the published checkpoint)")
    parser.add_argument("--no-peak-normalize", dest="peak_normalize",
                        action="store_false",
                        help="feed waveforms at their native scale")
    return parser


def main(argv=None) -> int:
    level = os.environ.get("VQEMB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    job = ExportJob(manifest=args.manifest, model_id=args.model,
                    source_variant=args.variant, out_dir=args.out_dir,
                    checkpoint=args.checkpoint, peak_normalize=args.peak_normalize)
    try:
        rows = export(job)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"exported {len(rows)} embedding files to {args.out_dir}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
