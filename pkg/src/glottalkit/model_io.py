"""Versioned binary container for trained models (magic "VQMDL1").

Layout: 6-byte magic, one kind byte (0 = svm, 1 = cnn), uint32 block count,
then length-prefixed named blocks. Each block is a named float64
little-endian array: uint16 name length, utf-8 name, uint8 ndim,
ndim * uint32 shape, then the values.
"""

from __future__ import annotations

import struct

import numpy as np

from .cnn import CnnConfig, CnnModel
from .svm import CLASS_ORDER, BinarySvm, SvmModel

MAGIC = b"VQMDL1"
KIND_SVM = 0
KIND_CNN = 1


def _pack_block(name: str, array) -> bytes:
    arr = np.atleast_1d(np.asarray(array, dtype=np.float64))
    encoded = name.encode("utf-8")
    out = struct.pack("<H", len(encoded)) + encoded
    out += struct.pack("<B", arr.ndim)
    out += struct.pack(f"<{arr.ndim}I", *arr.shape)
    return out + arr.astype("<f8").tobytes()


def _read_blocks(blob: bytes, offset: int, count: int) -> dict:
    blocks = {}
    for _ in range(count):
        (name_len,) = struct.unpack_from("<H", blob, offset)
        offset += 2
        name = blob[offset:offset + name_len].decode("utf-8")
        offset += name_len
        (ndim,) = struct.unpack_from("<B", blob, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", blob, offset)
        offset += 4 * ndim
        size = int(np.prod(shape)) if ndim else 1
        values = np.frombuffer(blob, dtype="<f8", count=size, offset=offset)
        offset += 8 * size
        blocks[name] = values.reshape(shape).astype(np.float64)
    if offset != len(blob):
        raise ValueError("trailing bytes after model blocks")
    return blocks


def _class_indices(classes) -> np.ndarray:
    try:
        return np.asarray([CLASS_ORDER.index(c) for c in classes], dtype=np.float64)
    except ValueError as exc:
        raise ValueError("only canonical phonation labels are serializable") from exc


def _write(path, kind: int, blocks: list[bytes]) -> None:
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<BI", kind, len(blocks)) + b"".join(blocks))


def save_model(model, path) -> None:
    norm_blocks = []
    if getattr(model, "norm_stats", None) is not None:
        mean, std = model.norm_stats
        norm_blocks = [_pack_block("norm_mean", mean), _pack_block("norm_std", std)]
    if isinstance(model, SvmModel):
        blocks = norm_blocks + [
            _pack_block("classes", _class_indices(model.classes)),
            _pack_block("gamma", [model.gamma]),
            _pack_block("c", [model.c]),
        ]
        for i, machine in enumerate(model.machines):
            pair = _class_indices([machine.pos, machine.neg])
            blocks.append(_pack_block(f"m{i}_pair", pair))
            blocks.append(_pack_block(f"m{i}_sv", machine.support_vectors))
            blocks.append(_pack_block(f"m{i}_coef", machine.dual_coef))
            blocks.append(_pack_block(f"m{i}_bias", [machine.bias]))
            blocks.append(_pack_block(f"m{i}_obj", [machine.objective]))
        _write(path, KIND_SVM, blocks)
    elif isinstance(model, CnnModel):
        cfg = model.config
        meta = [model.input_dim, model.best_epoch, cfg.hidden_units, cfg.n_classes,
                cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.adam_eps, cfg.batch_size,
                cfg.max_epochs, -1 if cfg.patience is None else cfg.patience,
                cfg.bn_momentum, cfg.bn_eps, cfg.seed]
        blocks = norm_blocks + [
            _pack_block("classes", _class_indices(model.classes)),
            _pack_block("meta", meta),
        ]
        blocks += [_pack_block(f"p_{k}", v) for k, v in sorted(model.params.items())]
        blocks += [_pack_block(f"r_{k}", v) for k, v in sorted(model.running.items())]
        _write(path, KIND_CNN, blocks)
    else:
        raise TypeError(f"cannot serialize {type(model).__name__}")


def load_model(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 11 or blob[:6] != MAGIC:
        raise ValueError("bad magic in model file")
    kind, count = struct.unpack_from("<BI", blob, 6)
    blocks = _read_blocks(blob, 11, count)
    classes = tuple(CLASS_ORDER[int(i)] for i in blocks["classes"])
    norm_stats = None
    if "norm_mean" in blocks:
        norm_stats = (blocks["norm_mean"], blocks["norm_std"])

    if kind == KIND_SVM:
        model = SvmModel(classes=classes, gamma=float(blocks["gamma"][0]),
                         c=float(blocks["c"][0]), norm_stats=norm_stats)
        i = 0
        while f"m{i}_pair" in blocks:
            pair = blocks[f"m{i}_pair"]
            model.machines.append(BinarySvm(
                pos=CLASS_ORDER[int(pair[0])],
                neg=CLASS_ORDER[int(pair[1])],
                support_vectors=blocks[f"m{i}_sv"],
                dual_coef=blocks[f"m{i}_coef"],
                bias=float(blocks[f"m{i}_bias"][0]),
                objective=float(blocks[f"m{i}_obj"][0]),
            ))
            i += 1
        return model
    if kind == KIND_CNN:
        meta = blocks["meta"]
        cfg = CnnConfig(
            hidden_units=int(meta[2]), n_classes=int(meta[3]),
            learning_rate=float(meta[4]), beta1=float(meta[5]), beta2=float(meta[6]),
            adam_eps=float(meta[7]), batch_size=int(meta[8]), max_epochs=int(meta[9]),
            patience=None if meta[10] < 0 else int(meta[10]),
            bn_momentum=float(meta[11]), bn_eps=float(meta[12]), seed=int(meta[13]),
        )
        params = {k[2:]: v for k, v in blocks.items() if k.startswith("p_")}
        running = {k[2:]: v for k, v in blocks.items() if k.startswith("r_")}
        return CnnModel(params=params, running=running, classes=classes,
                        input_dim=int(meta[0]), config=cfg, best_epoch=int(meta[1]),
                        norm_stats=norm_stats)
    raise ValueError(f"unknown model kind byte {kind}")
