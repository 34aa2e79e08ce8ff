"""Leave-one-speaker-out evaluation: per-fold z-scoring, accuracy, confusion counts."""

from __future__ import annotations

import concurrent.futures
import csv
import os
from dataclasses import dataclass, replace

import numpy as np

from .cnn import CnnConfig, cnn_predict, cnn_train
from .embeddings import read_embedding_file, select_layer
from .features import FeatureVector, extract_feature
from .signals import load_wav
from .svm import SvmConfig, svm_predict, svm_train

LABELS = ("breathy", "modal", "pressed")
MANIFEST_FIELDS = ("speaker_id", "label", "vowel", "repetition", "variant", "path")
SIGMA_FLOOR = 1e-12


class FoldError(RuntimeError):
    """Classifier failure inside one cross-validation fold."""


@dataclass(frozen=True)
class DatasetRecord:
    speaker_id: str
    label: str
    vowel: str = ""
    repetition: str = ""
    variant: str = "speech"
    path: str | None = None
    feature: FeatureVector | None = None

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")


@dataclass(frozen=True)
class LabeledDataset:
    records: tuple

    def __post_init__(self):
        records = tuple(self.records)
        kinds = {(r.feature.kind, r.feature.dim) for r in records if r.feature is not None}
        if len(kinds) > 1:
            raise ValueError(f"mixed feature kinds/dims in dataset: {sorted(kinds)}")
        object.__setattr__(self, "records", records)

    def __len__(self) -> int:
        return len(self.records)

    def speakers(self) -> list[str]:
        return sorted({r.speaker_id for r in self.records})

    def feature_matrix(self) -> np.ndarray:
        if any(r.feature is None for r in self.records):
            raise ValueError("dataset records are missing features")
        return np.stack([r.feature.values for r in self.records])

    def labels(self) -> list[str]:
        return [r.label for r in self.records]


@dataclass(frozen=True)
class FoldReport:
    test_speaker: str
    truth: tuple
    predictions: tuple
    accuracy: float
    confusion: np.ndarray

    def __post_init__(self):
        confusion = np.asarray(self.confusion, dtype=np.int64)
        if confusion.sum() != len(self.truth):
            raise ValueError("confusion counts must sum to the fold test-set size")
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValueError("accuracy must lie in [0, 1]")
        object.__setattr__(self, "confusion", confusion)


@dataclass(frozen=True)
class EvalSummary:
    mean_accuracy: float
    std_accuracy: float
    confusion: np.ndarray
    n_folds: int

    def as_dict(self) -> dict:
        return {
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "n_folds": self.n_folds,
            "labels": list(LABELS),
            "confusion": self.confusion.tolist(),
        }


def zscore_fit(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and population std of the training rows."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two training vectors to fit z-score statistics")
    return X.mean(axis=0), X.std(axis=0)


def zscore_apply(stats: tuple[np.ndarray, np.ndarray], X: np.ndarray) -> np.ndarray:
    """(x - mean) / std with the std clamped to >= 1e-12 (constant dims map to 0)."""
    mean, std = stats
    return (np.asarray(X, dtype=np.float64) - mean) / np.maximum(std, SIGMA_FLOOR)


def confusion_matrix(truth, predictions) -> np.ndarray:
    """3x3 counts; rows are truth, columns predictions, order (breathy, modal, pressed)."""
    truth = list(truth)
    predictions = list(predictions)
    if len(truth) != len(predictions):
        raise ValueError("truth and prediction sequences differ in length")
    if not truth:
        raise ValueError("empty label sequences")
    index = {label: k for k, label in enumerate(LABELS)}
    counts = np.zeros((3, 3), dtype=np.int64)
    for t, p in zip(truth, predictions):
        counts[index[t], index[p]] += 1
    return counts


def accuracy(confusion: np.ndarray) -> float:
    confusion = np.asarray(confusion)
    total = confusion.sum()
    if total == 0:
        raise ValueError("empty confusion matrix")
    return float(np.trace(confusion) / total)


def _run_fold(args) -> FoldReport:
    X, labels, speakers, test_speaker, classifier, svm_cfg, cnn_cfg = args
    speakers = np.asarray(speakers)
    labels = np.asarray(labels, dtype=object)
    test_mask = speakers == test_speaker
    train_mask = ~test_mask
    stats = zscore_fit(X[train_mask])
    X_train = zscore_apply(stats, X[train_mask])
    X_test = zscore_apply(stats, X[test_mask])
    y_train = list(labels[train_mask])
    y_test = list(labels[test_mask])

    try:
        if classifier == "svm":
            model = svm_train(X_train, y_train, svm_cfg)
            predictions = svm_predict(model, X_test)
        elif classifier == "cnn":
            train_speakers = sorted(set(speakers[train_mask]))
            val_speaker = train_speakers[0]
            val_mask = speakers[train_mask] == val_speaker
            model = cnn_train(
                X_train[~val_mask], list(np.asarray(y_train, dtype=object)[~val_mask]),
                (X_train[val_mask], list(np.asarray(y_train, dtype=object)[val_mask])),
                cnn_cfg,
            )
            predictions = cnn_predict(model, X_test)
        else:
            raise ValueError(f"unknown classifier {classifier!r}")
    except Exception as exc:
        raise FoldError(f"fold {test_speaker!r}: {exc}") from exc

    counts = confusion_matrix(y_test, predictions)
    return FoldReport(test_speaker=test_speaker, truth=tuple(y_test),
                      predictions=tuple(predictions), accuracy=accuracy(counts),
                      confusion=counts)


def loso_cross_validate(
    dataset: LabeledDataset,
    classifier: str = "svm",
    svm_cfg: SvmConfig | None = None,
    cnn_cfg: CnnConfig | None = None,
    workers: int = 1,
) -> tuple[EvalSummary, list[FoldReport]]:
    """One fold per speaker, sorted by speaker id; statistics fit on training folds only.

    For the CNN the first remaining training speaker (sorted order) is held
    out as the early-stopping validation set.
    """
    speakers = dataset.speakers()
    if len(speakers) < 2:
        raise ValueError("LOSO needs at least two distinct speakers")
    if classifier == "cnn" and len(speakers) < 3:
        raise ValueError("CNN LOSO needs at least three speakers (one for validation)")
    X = dataset.feature_matrix()
    labels = dataset.labels()
    speaker_col = [r.speaker_id for r in dataset.records]

    jobs = [(X, labels, speaker_col, s, classifier, svm_cfg, cnn_cfg) for s in speakers]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_fold, jobs))
    else:
        reports = [_run_fold(job) for job in jobs]

    accs = np.array([r.accuracy for r in reports])
    pooled = np.sum([r.confusion for r in reports], axis=0)
    summary = EvalSummary(mean_accuracy=float(accs.mean()),
                          std_accuracy=float(accs.std()),
                          confusion=pooled, n_folds=len(reports))
    return summary, reports


def read_manifest(path) -> list[DatasetRecord]:
    """Read a dataset manifest; relative paths resolve against its directory."""
    base = os.path.dirname(os.path.abspath(path))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != list(MANIFEST_FIELDS):
            raise ValueError(
                f"manifest header must be {','.join(MANIFEST_FIELDS)}, "
                f"got {reader.fieldnames}"
            )
        records = []
        for row in reader:
            p = row["path"]
            if p and not os.path.isabs(p):
                p = os.path.join(base, p)
            records.append(DatasetRecord(
                speaker_id=row["speaker_id"], label=row["label"], vowel=row["vowel"],
                repetition=row["repetition"], variant=row["variant"], path=p))
        return records


def write_manifest(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_FIELDS)
        for r in records:
            writer.writerow([r.speaker_id, r.label, r.vowel, r.repetition,
                             r.variant, r.path or ""])


def load_record_feature(record: DatasetRecord, kind: str, layer: int | None = None,
                        pre_emphasis: bool = False) -> FeatureVector:
    """Materialize one record's feature from its WAV or VQEMB1 file."""
    if record.path is None:
        raise ValueError(f"record for {record.speaker_id} has no path")
    if kind == "embedding":
        if layer is None:
            raise ValueError("embedding features need a layer index")
        return select_layer(read_embedding_file(record.path), layer)
    return extract_feature(load_wav(record.path), kind, pre_emphasis=pre_emphasis)


def _feature_job(args):
    record, kind, layer, pre_emphasis = args
    return load_record_feature(record, kind, layer, pre_emphasis)


def with_features(records, kind: str, layer: int | None = None,
                  pre_emphasis: bool = False, workers: int = 1) -> LabeledDataset:
    """Attach features for every manifest record, optionally in parallel."""
    jobs = [(r, kind, layer, pre_emphasis) for r in records]
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            feats = list(pool.map(_feature_job, jobs))
    else:
        feats = [_feature_job(job) for job in jobs]
    return LabeledDataset(records=tuple(
        replace(r, feature=f) for r, f in zip(records, feats)))
