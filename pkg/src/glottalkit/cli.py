"""Command-line front door wiring the toolkit into manifest-in / files-out pipelines."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import evaluation, model_io, synth
from .embeddings import read_embedding_file
from .evaluation import (DatasetRecord, loso_cross_validate, read_manifest,
                         with_features, write_manifest, zscore_apply, zscore_fit)
from .qcp import AmeConfig, qcp_analyze, zff_glottal_source
from .signals import FrameSpec, load_wav, save_wav
from .svm import SvmConfig, svm_predict, svm_train
from .cnn import CnnConfig, cnn_predict, cnn_train
from .zff import zff_analyze

log = logging.getLogger("glottalkit")

FEATURE_KINDS = ("spec513", "mel80", "mfcc39", "embedding")
_KIND_MAP = {"spec513": "spectrogram513", "mel80": "mel80", "mfcc39": "mfcc39",
             "embedding": "embedding"}


def _add_zff_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--zff.f0-min", dest="zff_f0_min", type=float, default=60.0,
                   help="lower f0 bound for pitch-period search (Hz)")
    p.add_argument("--zff.f0-max", dest="zff_f0_max", type=float, default=500.0,
                   help="upper f0 bound for pitch-period search (Hz)")
    p.add_argument("--zff.trend-passes", dest="zff_trend_passes", type=int, default=2,
                   help="local-mean removal passes (1 = single textbook pass)")
    p.add_argument("--zff.polarity", dest="zff_polarity",
                   choices=("positive", "negative"), default="positive",
                   help="signal polarity assumed for NPZC-based GCI detection")


def _add_qcp_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--qcp.dq", dest="qcp_dq", type=float, default=0.7,
                   help="AME duration quotient")
    p.add_argument("--qcp.pq", dest="qcp_pq", type=float, default=0.05,
                   help="AME position quotient")
    p.add_argument("--qcp.n-ramp", dest="qcp_n_ramp", type=int, default=7,
                   help="AME ramp length in samples")
    p.add_argument("--qcp.d-min", dest="qcp_d_min", type=float, default=1e-5,
                   help="AME weight inside the attenuated region")
    p.add_argument("--qcp.order", dest="qcp_order", type=int, default=None,
                   help="LP order (default round(fs/1000)+2)")
    p.add_argument("--qcp.frame-ms", dest="qcp_frame_ms", type=float, default=25.0,
                   help="QCP analysis frame length (ms)")
    p.add_argument("--qcp.shift-ms", dest="qcp_shift_ms", type=float, default=5.0,
                   help="QCP analysis frame shift (ms)")
    p.add_argument("--qcp.no-pre-emphasis", dest="qcp_pre_emphasis",
                   action="store_false", help="run WLP on the raw frame")
    p.add_argument("--qcp.integrate", dest="qcp_integrate", action="store_true",
                   help="apply the 0.99 leaky integrator after inverse filtering")


def _add_feature_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--features.pre-emphasis", dest="features_pre_emphasis",
                   action="store_true",
                   help="pre-emphasize before the FFT in baseline features")


def _add_svm_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--svm.c", dest="svm_c", type=float, default=1.0,
                   help="SVM regularization parameter")
    p.add_argument("--svm.gamma", dest="svm_gamma", default="scale",
                   help="'scale' (1/(D*Var)) or a fixed positive value")
    p.add_argument("--svm.tolerance", dest="svm_tolerance", type=float, default=1e-4,
                   help="SMO KKT tolerance")


def _add_cnn_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cnn.learning-rate", dest="cnn_lr", type=float, default=1e-3,
                   help="Adam learning rate")
    p.add_argument("--cnn.batch-size", dest="cnn_batch", type=int, default=64,
                   help="mini-batch size")
    p.add_argument("--cnn.max-epochs", dest="cnn_epochs", type=int, default=100,
                   help="training epoch cap")
    p.add_argument("--cnn.patience", dest="cnn_patience", type=int, default=20,
                   help="early-stopping patience (epochs without improvement)")


def _svm_cfg(args) -> SvmConfig:
    gamma = args.svm_gamma
    if gamma != "scale":
        gamma = float(gamma)
    return SvmConfig(c=args.svm_c, gamma=gamma, tolerance=args.svm_tolerance)


def _cnn_cfg(args) -> CnnConfig:
    return CnnConfig(learning_rate=args.cnn_lr, batch_size=args.cnn_batch,
                     max_epochs=args.cnn_epochs, patience=args.cnn_patience,
                     seed=args.seed)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="glottalkit",
        description="Glottal source estimation and phonation-type classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="generate the synthetic vowel corpus")
    p_synth.add_argument("--out-dir", required=True)
    p_synth.add_argument("--seed", type=int, default=1234)
    p_synth.add_argument("--variant", choices=("speech", "nsa"), default="speech")
    p_synth.add_argument("--synth.speakers", dest="synth_speakers", type=int,
                         default=12, help="number of synthetic speakers")
    p_synth.add_argument("--synth.repetitions", dest="synth_repetitions", type=int,
                         default=2, help="repetitions per speaker/quality/vowel")
    p_synth.add_argument("--synth.duration", dest="synth_duration", type=float,
                         default=0.5, help="utterance duration in seconds")
    p_synth.add_argument("--synth.f0", dest="synth_f0", type=float, default=190.0,
                         help="base fundamental frequency (Hz)")
    p_synth.add_argument("--synth.fs", dest="synth_fs", type=float, default=16000.0,
                         help="sampling rate (Hz)")
    p_synth.add_argument("--synth.vowels", dest="synth_vowels", type=int, default=5,
                         help="number of vowels (prefix of a, ae, e, i, u)")

    p_zff = sub.add_parser("zff", help="write ZFF glottal sources + GCIs per manifest")
    p_zff.add_argument("--manifest", required=True)
    p_zff.add_argument("--out-dir", required=True)
    _add_zff_overrides(p_zff)

    p_qcp = sub.add_parser("qcp", help="write QCP glottal sources + GCIs per manifest")
    p_qcp.add_argument("--manifest", required=True)
    p_qcp.add_argument("--out-dir", required=True)
    _add_zff_overrides(p_qcp)
    _add_qcp_overrides(p_qcp)

    p_feat = sub.add_parser("features", help="extract feature vectors per manifest")
    p_feat.add_argument("--manifest", required=True)
    p_feat.add_argument("--out-dir", required=True)
    p_feat.add_argument("--feature", choices=FEATURE_KINDS, required=True)
    p_feat.add_argument("--layer", type=int, default=None,
                        help="embedding layer index (0 = transformer input)")
    p_feat.add_argument("--workers", type=int, default=1)
    _add_feature_overrides(p_feat)

    p_val = sub.add_parser("embed-validate", help="validate VQEMB1 embedding files")
    group = p_val.add_mutually_exclusive_group(required=True)
    group.add_argument("--manifest")
    group.add_argument("--path", nargs="+")

    p_train = sub.add_parser("train", help="train one classifier on a manifest")
    p_loso = sub.add_parser("loso", help="leave-one-speaker-out cross-validation")
    for p in (p_train, p_loso):
        p.add_argument("--manifest", required=True)
        p.add_argument("--feature", choices=FEATURE_KINDS, required=True)
        p.add_argument("--layer", type=int, default=None)
        p.add_argument("--classifier", choices=("svm", "cnn"), default="svm")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--workers", type=int, default=1)
        _add_feature_overrides(p)
        _add_svm_overrides(p)
        _add_cnn_overrides(p)
    p_train.add_argument("--model-out", required=True)
    p_loso.add_argument("--out-dir", required=True)

    p_eval = sub.add_parser("evaluate", help="apply a saved model to a manifest")
    p_eval.add_argument("--manifest", required=True)
    p_eval.add_argument("--feature", choices=FEATURE_KINDS, required=True)
    p_eval.add_argument("--layer", type=int, default=None)
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--out-dir", required=True)
    p_eval.add_argument("--workers", type=int, default=1)
    _add_feature_overrides(p_eval)

    p_sweep = sub.add_parser("layer-sweep",
                             help="run loso per embedding layer, table out")
    p_sweep.add_argument("--manifest", required=True)
    p_sweep.add_argument("--classifier", choices=("svm", "cnn"), default="svm")
    p_sweep.add_argument("--out-dir", required=True)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--workers", type=int, default=1)
    _add_svm_overrides(p_sweep)
    _add_cnn_overrides(p_sweep)

    return parser


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_synth(args) -> int:
    out = Path(args.out_dir)
    (out / "wav").mkdir(parents=True, exist_ok=True)
    vowels = ("a", "ae", "e", "i", "u")[:args.synth_vowels]
    items = synth.make_corpus(
        n_speakers=args.synth_speakers, vowels=vowels,
        repetitions=args.synth_repetitions, fs=args.synth_fs,
        duration=args.synth_duration, base_f0=args.synth_f0,
        variant=args.variant, seed=args.seed)
    records, gci_rows = [], []
    for item in items:
        name = f"{item.speaker_id}_{item.label}_{item.vowel}_{item.repetition}.wav"
        save_wav(item.waveform, out / "wav" / name)
        # manifest paths stay relative to the output directory so reruns into
        # any directory produce byte-identical artifacts
        rel = f"wav/{name}"
        records.append(DatasetRecord(
            speaker_id=item.speaker_id, label=item.label, vowel=item.vowel,
            repetition=item.repetition, variant=args.variant, path=rel))
        gci_rows.append([rel] + [str(v) for v in item.onsets])
    write_manifest(records, out / "manifest.csv")
    (out / "gci.csv").write_text(
        "\n".join(",".join(row) for row in gci_rows) + "\n", encoding="utf-8")
    log.info("synth: wrote %d utterances to %s", len(records), out)
    print(f"wrote {len(records)} utterances, manifest {out / 'manifest.csv'}")
    return 0


def _cmd_glottal(args, method: str) -> int:
    out = Path(args.out_dir)
    (out / "wav").mkdir(parents=True, exist_ok=True)
    records = read_manifest(args.manifest)
    new_records, gci_rows = [], []
    for record in records:
        w = load_wav(record.path)
        z, gcis = zff_analyze(w, f0_min=args.zff_f0_min, f0_max=args.zff_f0_max,
                              trend_passes=args.zff_trend_passes,
                              polarity=args.zff_polarity)
        if method == "zff":
            source_samples = z.samples
        else:
            cfg = AmeConfig(dq=args.qcp_dq, pq=args.qcp_pq,
                            n_ramp=args.qcp_n_ramp, d_min=args.qcp_d_min)
            frame = FrameSpec(length_ms=args.qcp_frame_ms, shift_ms=args.qcp_shift_ms)
            source = qcp_analyze(w, cfg=cfg, frame=frame, order=args.qcp_order,
                                 pre_emphasis=args.qcp_pre_emphasis,
                                 integrate=args.qcp_integrate, gcis=gcis)
            source_samples = source.samples
        name = Path(record.path).stem + f"_{method}.wav"
        # float32 keeps the unbounded glottal-source scale intact; no
        # renormalization, so loudness relations between utterances survive
        save_wav(type(w)(samples=source_samples, fs=w.fs), out / "wav" / name,
                 encoding="float32")
        rel = f"wav/{name}"
        new_records.append(DatasetRecord(
            speaker_id=record.speaker_id, label=record.label, vowel=record.vowel,
            repetition=record.repetition, variant=f"{record.variant}-{method}",
            path=rel))
        gci_rows += [[rel, str(int(v))] for v in gcis.instants]
    write_manifest(new_records, out / "manifest.csv")
    _write_csv(out / "gci.csv", ["path", "instant"], gci_rows)
    print(f"wrote {len(new_records)} {method} glottal sources to {out}")
    return 0


def _cmd_features(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = read_manifest(args.manifest)
    dataset = with_features(records, _KIND_MAP[args.feature], layer=args.layer,
                            pre_emphasis=args.features_pre_emphasis,
                            workers=args.workers)
    dim = dataset.records[0].feature.dim if dataset.records else 0
    header = ["speaker_id", "label", "vowel", "repetition", "variant", "kind"]
    header += [f"v{i}" for i in range(dim)]
    rows = [[r.speaker_id, r.label, r.vowel, r.repetition, r.variant, r.feature.kind]
            + [repr(v) for v in r.feature.values] for r in dataset.records]
    _write_csv(out / "features.csv", header, rows)
    print(f"wrote {len(rows)} feature vectors (dim {dim}) to {out / 'features.csv'}")
    return 0


def _cmd_embed_validate(args) -> int:
    paths = args.path or [r.path for r in read_manifest(args.manifest)]
    for path in paths:
        es = read_embedding_file(path)
        print(f"OK {path} ({es.model_id}, {es.n_layers}x{es.dim}, {es.source_variant})")
    return 0


def _load_dataset(args):
    records = read_manifest(args.manifest)
    return with_features(records, _KIND_MAP[args.feature], layer=args.layer,
                         pre_emphasis=getattr(args, "features_pre_emphasis", False),
                         workers=args.workers)


def _cmd_train(args) -> int:
    dataset = _load_dataset(args)
    X = dataset.feature_matrix()
    y = dataset.labels()
    stats = zscore_fit(X)
    Xn = zscore_apply(stats, X)
    if args.classifier == "svm":
        model = svm_train(Xn, y, _svm_cfg(args))
    else:
        speakers = np.asarray([r.speaker_id for r in dataset.records])
        val_speaker = sorted(set(speakers))[0]
        val = speakers == val_speaker
        model = cnn_train(Xn[~val], list(np.asarray(y, dtype=object)[~val]),
                          (Xn[val], list(np.asarray(y, dtype=object)[val])),
                          _cnn_cfg(args))
    model.norm_stats = stats
    model_io.save_model(model, args.model_out)
    print(f"trained {args.classifier} on {len(y)} rows -> {args.model_out}")
    return 0


def _cmd_evaluate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset = _load_dataset(args)
    model = model_io.load_model(args.model)
    X = dataset.feature_matrix()
    if model.norm_stats is not None:
        X = zscore_apply(model.norm_stats, X)
    predictions = (svm_predict(model, X) if hasattr(model, "machines")
                   else cnn_predict(model, X))
    counts = evaluation.confusion_matrix(dataset.labels(), predictions)
    rows = [[r.speaker_id, r.label, p, r.vowel, r.repetition, r.variant]
            for r, p in zip(dataset.records, predictions)]
    _write_csv(out / "predictions.csv",
               ["speaker_id", "label", "predicted", "vowel", "repetition", "variant"],
               rows)
    _write_json(out / "summary.json", {
        "accuracy": evaluation.accuracy(counts),
        "labels": list(evaluation.LABELS),
        "confusion": counts.tolist(),
    })
    print(f"accuracy {evaluation.accuracy(counts):.4f} on {len(rows)} rows -> {out}")
    return 0


def _cmd_loso(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    dataset = _load_dataset(args)
    summary, reports = loso_cross_validate(
        dataset, classifier=args.classifier, svm_cfg=_svm_cfg(args),
        cnn_cfg=_cnn_cfg(args), workers=args.workers)
    rows = [[r.test_speaker, len(r.truth), repr(r.accuracy)]
            + [str(v) for v in r.confusion.ravel()] for r in reports]
    header = ["test_speaker", "n_test", "accuracy"]
    header += [f"c_{t}_{p}" for t in evaluation.LABELS for p in evaluation.LABELS]
    _write_csv(out / "folds.csv", header, rows)
    _write_json(out / "summary.json", summary.as_dict())
    print(f"loso mean accuracy {summary.mean_accuracy:.4f} "
          f"± {summary.std_accuracy:.4f} over {summary.n_folds} folds -> {out}")
    return 0


def _cmd_layer_sweep(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    records = read_manifest(args.manifest)
    if not records:
        raise ValueError("empty manifest")
    n_layers = read_embedding_file(records[0].path).n_layers
    rows = []
    for layer in range(n_layers):
        dataset = with_features(records, "embedding", layer=layer,
                                workers=args.workers)
        summary, _ = loso_cross_validate(
            dataset, classifier=args.classifier, svm_cfg=_svm_cfg(args),
            cnn_cfg=_cnn_cfg(args), workers=args.workers)
        rows.append([layer, repr(summary.mean_accuracy), repr(summary.std_accuracy)])
        log.info("layer %d: %.4f", layer, summary.mean_accuracy)
    _write_csv(out / "layer_sweep.csv",
               ["layer", "mean_accuracy", "std_accuracy"], rows)
    print(f"layer sweep over {n_layers} layers -> {out / 'layer_sweep.csv'}")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "zff": lambda a: _cmd_glottal(a, "zff"),
    "qcp": lambda a: _cmd_glottal(a, "qcp"),
    "features": _cmd_features,
    "embed-validate": _cmd_embed_validate,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "loso": _cmd_loso,
    "layer-sweep": _cmd_layer_sweep,
}


def main(argv=None) -> int:
    level = os.environ.get("GLOTTALKIT_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except Exception as exc:  # single-line diagnostic, nonzero exit
        print(f"error: {exc}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
