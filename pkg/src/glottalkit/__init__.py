"""Glottal source estimation (QCP, ZFF) and phonation-type classification toolkit."""

from .signals import FrameSpec, Waveform, frame_signal, load_wav, pre_emphasize, save_wav
from .zff import (GciSequence, UnvoicedError, ZffSignal, detect_gcis,
                  estimate_mean_pitch_period, zero_frequency_filter, zff_analyze)
from .qcp import (AmeConfig, DegenerateFrameError, GlottalSource, VocalTractFilter,
                  build_ame_weights, inverse_filter, qcp_analyze, wlp_analyze,
                  zff_glottal_source)
from .features import (FeatureVector, mel_filterbank, mel_spectrogram_feature,
                       mfcc_feature, spectrogram_feature)
from .embeddings import EmbeddingSet, read_embedding_file, select_layer, write_embedding_file
from .svm import SvmConfig, SvmModel, resolve_gamma, svm_predict, svm_train
from .cnn import CnnConfig, CnnModel, cnn_predict, cnn_train
from .model_io import load_model, save_model
from .evaluation import (DatasetRecord, EvalSummary, FoldReport, LabeledDataset,
                         accuracy, confusion_matrix, loso_cross_validate,
                         read_manifest, write_manifest, zscore_apply, zscore_fit)
from .synth import VoicePreset, make_corpus, make_preset, synthesize_vowel

__version__ = "0.1.0"
