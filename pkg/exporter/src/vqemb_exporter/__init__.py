"""Layer-wise wav2vec2/HuBERT embedding exporter writing VQEMB1 files."""

from .export import ExportJob, embed_waveform, export, load_checkpoint
from .vqemb import MODEL_CONTRACTS, SOURCE_VARIANTS, expected_shape, write_vqemb

__version__ = "0.1.0"
