"""1-D CNN classifier (3 conv blocks + 2 dense layers) with hand-written backprop.

Layers: conv(k=3, stride=2, same-padding, channels 8/16/32), each followed by
batch normalization and ReLU; flatten; dense 16 (ReLU); dense 3 + softmax.
Inputs are zero-padded to the next multiple of 8 so three stride-2 stages
leave exactly input_dim_padded/8 positions and the dense input width is
32 * (input_dim_padded / 8).
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

import numpy as np

from .svm import CLASS_ORDER, _ordered_classes

CONV_CHANNELS = (8, 16, 32)
KERNEL = 3
STRIDE = 2


@dataclass(frozen=True)
class CnnConfig:
    hidden_units: int = 16
    n_classes: int = 3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 64
    max_epochs: int = 100
    patience: int | None = 20  # None disables early stopping
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5
    seed: int = 0

    def __post_init__(self):
        if min(self.hidden_units, self.n_classes, self.batch_size, self.max_epochs) < 1:
            raise ValueError("all sizes must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class CnnModel:
    params: dict
    running: dict
    classes: tuple
    input_dim: int
    config: CnnConfig
    best_epoch: int = 0
    history: list = field(default_factory=list)  # (epoch, train_loss, val_loss)
    norm_stats: tuple | None = None  # optional (mean, std) z-score stats


def padded_dim(input_dim: int) -> int:
    return ((input_dim + 7) // 8) * 8


def flatten_width(input_dim: int) -> int:
    """Dense input width: 32 channels times (padded input length / 8)."""
    return CONV_CHANNELS[-1] * (padded_dim(input_dim) // 8)


def _pad_inputs(X: np.ndarray, input_dim: int) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != input_dim:
        raise ValueError(f"expected {input_dim}-dimensional inputs, got {X.shape[1]}")
    extra = padded_dim(input_dim) - input_dim
    if extra:
        X = np.pad(X, ((0, 0), (0, extra)))
    return X[:, None, :]  # (B, 1, L)


def init_params(input_dim: int, cfg: CnnConfig, rng: np.random.Generator) -> tuple[dict, dict]:
    """He-uniform weights, zero biases, unit batch-norm scale."""
    def he(shape, fan_in):
        limit = np.sqrt(6.0 / fan_in)
        return rng.uniform(-limit, limit, size=shape)

    params, running = {}, {}
    in_ch = 1
    for i, out_ch in enumerate(CONV_CHANNELS, start=1):
        params[f"conv{i}_w"] = he((out_ch, in_ch, KERNEL), in_ch * KERNEL)
        params[f"conv{i}_b"] = np.zeros(out_ch)
        params[f"bn{i}_gamma"] = np.ones(out_ch)
        params[f"bn{i}_beta"] = np.zeros(out_ch)
        running[f"bn{i}_mean"] = np.zeros(out_ch)
        running[f"bn{i}_var"] = np.ones(out_ch)
        in_ch = out_ch
    flat = flatten_width(input_dim)
    params["fc1_w"] = he((cfg.hidden_units, flat), flat)
    params["fc1_b"] = np.zeros(cfg.hidden_units)
    params["fc2_w"] = he((cfg.n_classes, cfg.hidden_units), cfg.hidden_units)
    params["fc2_b"] = np.zeros(cfg.n_classes)
    return params, running


def _conv_forward(x, w, b):
    # same-style padding for k=3, stride=2 on even L: one zero on the right
    xp = np.pad(x, ((0, 0), (0, 0), (0, 1)))
    cols = np.lib.stride_tricks.sliding_window_view(xp, KERNEL, axis=2)[:, :, ::STRIDE, :]
    y = np.einsum("bilk,oik->bol", cols, w) + b[None, :, None]
    return y, (x.shape, cols, w)


def _conv_backward(dy, cache):
    xshape, cols, w = cache
    b_, cin, length = xshape
    dw = np.einsum("bol,bilk->oik", dy, cols)
    db = dy.sum(axis=(0, 2))
    dxp = np.zeros((b_, cin, length + 1))
    lout = dy.shape[2]
    for k in range(KERNEL):
        dxp[:, :, k:k + STRIDE * lout:STRIDE] += np.einsum("bol,oi->bil", dy, w[:, :, k])
    return dxp[:, :, :length], dw, db


def _bn_forward_train(x, gamma, beta, eps):
    mu = x.mean(axis=(0, 2))
    var = x.var(axis=(0, 2))
    std = np.sqrt(var + eps)
    xhat = (x - mu[None, :, None]) / std[None, :, None]
    y = gamma[None, :, None] * xhat + beta[None, :, None]
    return y, mu, var, (xhat, std, gamma)


def _bn_backward(dy, cache):
    xhat, std, gamma = cache
    dgamma = (dy * xhat).sum(axis=(0, 2))
    dbeta = dy.sum(axis=(0, 2))
    dxhat = dy * gamma[None, :, None]
    mean_dxhat = dxhat.mean(axis=(0, 2))[None, :, None]
    mean_dxhat_xhat = (dxhat * xhat).mean(axis=(0, 2))[None, :, None]
    dx = (dxhat - mean_dxhat - xhat * mean_dxhat_xhat) / std[None, :, None]
    return dx, dgamma, dbeta


def _bn_forward_infer(x, gamma, beta, mean, var, eps):
    xhat = (x - mean[None, :, None]) / np.sqrt(var + eps)[None, :, None]
    return gamma[None, :, None] * xhat + beta[None, :, None]


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def forward_logits(params: dict, X: np.ndarray, input_dim: int,
                   running: dict, bn_eps: float = 1e-5) -> np.ndarray:
    """Inference-mode forward pass (batch norm uses running statistics)."""
    h = _pad_inputs(X, input_dim)
    for i in range(1, 4):
        h, _ = _conv_forward(h, params[f"conv{i}_w"], params[f"conv{i}_b"])
        h = _bn_forward_infer(h, params[f"bn{i}_gamma"], params[f"bn{i}_beta"],
                              running[f"bn{i}_mean"], running[f"bn{i}_var"], bn_eps)
        h = np.maximum(h, 0.0)
    flat = h.reshape(h.shape[0], -1)
    hidden = np.maximum(flat @ params["fc1_w"].T + params["fc1_b"], 0.0)
    return hidden @ params["fc2_w"].T + params["fc2_b"]


def loss_and_grads(params: dict, Xp: np.ndarray, y_idx: np.ndarray,
                   bn_eps: float = 1e-5):
    """Training-mode cross-entropy loss, parameter gradients and batch stats.

    ``Xp`` is the already padded (B, 1, L) batch; the returned batch statistics
    feed the running-average update.
    """
    caches = []
    batch_stats = {}
    h = Xp
    for i in range(1, 4):
        h, conv_cache = _conv_forward(h, params[f"conv{i}_w"], params[f"conv{i}_b"])
        h, mu, var, bn_cache = _bn_forward_train(
            h, params[f"bn{i}_gamma"], params[f"bn{i}_beta"], bn_eps)
        mask = h > 0
        h = h * mask
        caches.append((conv_cache, bn_cache, mask))
        batch_stats[f"bn{i}_mean"] = mu
        batch_stats[f"bn{i}_var"] = var
    flat = h.reshape(h.shape[0], -1)
    pre_hidden = flat @ params["fc1_w"].T + params["fc1_b"]
    hidden_mask = pre_hidden > 0
    hidden = pre_hidden * hidden_mask
    logits = hidden @ params["fc2_w"].T + params["fc2_b"]

    probs = softmax(logits)
    batch = Xp.shape[0]
    loss = float(-np.log(probs[np.arange(batch), y_idx] + 1e-300).mean())

    grads = {}
    dlogits = probs.copy()
    dlogits[np.arange(batch), y_idx] -= 1.0
    dlogits /= batch
    grads["fc2_w"] = dlogits.T @ hidden
    grads["fc2_b"] = dlogits.sum(axis=0)
    dhidden = (dlogits @ params["fc2_w"]) * hidden_mask
    grads["fc1_w"] = dhidden.T @ flat
    grads["fc1_b"] = dhidden.sum(axis=0)
    dh = (dhidden @ params["fc1_w"]).reshape(h.shape)
    for i in range(3, 0, -1):
        conv_cache, bn_cache, mask = caches[i - 1]
        dh = dh * mask
        dh, dgamma, dbeta = _bn_backward(dh, bn_cache)
        grads[f"bn{i}_gamma"] = dgamma
        grads[f"bn{i}_beta"] = dbeta
        dh, dw, db = _conv_backward(dh, conv_cache)
        grads[f"conv{i}_w"] = dw
        grads[f"conv{i}_b"] = db
    return loss, grads, batch_stats


def _adam_step(params, grads, state, cfg: CnnConfig):
    state["t"] += 1
    t = state["t"]
    for key, grad in grads.items():
        m = state["m"][key] = cfg.beta1 * state["m"][key] + (1 - cfg.beta1) * grad
        v = state["v"][key] = cfg.beta2 * state["v"][key] + (1 - cfg.beta2) * grad * grad
        m_hat = m / (1 - cfg.beta1 ** t)
        v_hat = v / (1 - cfg.beta2 ** t)
        params[key] -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def mean_val_loss(params, running, X, y_idx, input_dim, bn_eps):
    logits = forward_logits(params, X, input_dim, running, bn_eps)
    probs = softmax(logits)
    return float(-np.log(probs[np.arange(len(y_idx)), y_idx] + 1e-300).mean())


def cnn_train(X, y, val, cfg: CnnConfig | None = None) -> CnnModel:
    """Train on (X, y) with early stopping on the validation split.

    ``val`` is a (features, labels) pair. Stops after ``patience`` epochs
    without strict validation-loss improvement (ties keep the earlier epoch)
    or at ``max_epochs``; the best-validation parameters are returned.
    Deterministic for a fixed seed.
    """
    cfg = cfg or CnnConfig()
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    X_val, y_val = val
    X_val = np.atleast_2d(np.asarray(X_val, dtype=np.float64))
    if X.shape[1] < 8:
        raise ValueError("input dimension must be >= 8")
    if X_val.shape[0] == 0:
        raise ValueError("empty validation set")
    input_dim = X.shape[1]

    classes = _ordered_classes(list(y) + list(y_val))
    class_index = {c: k for k, c in enumerate(classes)}
    if len(classes) > cfg.n_classes:
        raise ValueError("more classes than output units")
    y_idx = np.asarray([class_index[label] for label in y])
    y_val_idx = np.asarray([class_index[label] for label in y_val])

    rng = np.random.default_rng(cfg.seed)
    params, running = init_params(input_dim, cfg, rng)
    state = {"t": 0,
             "m": {k: np.zeros_like(p) for k, p in params.items()},
             "v": {k: np.zeros_like(p) for k, p in params.items()}}

    best_loss = np.inf
    best = (copy.deepcopy(params), copy.deepcopy(running), 0)
    stall = 0
    history = []
    n = X.shape[0]
    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, cfg.batch_size):
            rows = order[start:start + cfg.batch_size]
            Xp = _pad_inputs(X[rows], input_dim)
            loss, grads, stats = loss_and_grads(params, Xp, y_idx[rows], cfg.bn_eps)
            if not np.isfinite(loss):
                raise ValueError("non-finite loss (divergence)")
            epoch_loss += loss * len(rows)
            for key, value in stats.items():
                running[key] = cfg.bn_momentum * running[key] + (1 - cfg.bn_momentum) * value
            _adam_step(params, grads, state, cfg)
        val_loss = mean_val_loss(params, running, X_val, y_val_idx, input_dim, cfg.bn_eps)
        history.append((epoch, epoch_loss / n, val_loss))
        if val_loss < best_loss:
            best_loss = val_loss
            best = (copy.deepcopy(params), copy.deepcopy(running), epoch)
            stall = 0
        else:
            stall += 1
            if cfg.patience is not None and stall >= cfg.patience:
                break

    best_params, best_running, best_epoch = best
    return CnnModel(params=best_params, running=best_running, classes=classes,
                    input_dim=input_dim, config=cfg, best_epoch=best_epoch,
                    history=history)


def cnn_predict(model: CnnModel, X):
    """Argmax of the softmax in inference mode (running batch-norm statistics)."""
    single = np.asarray(X).ndim == 1
    logits = forward_logits(model.params, np.atleast_2d(X), model.input_dim,
                            model.running, model.config.bn_eps)
    picks = [model.classes[k] for k in np.argmax(logits, axis=1)]
    return picks[0] if single else picks
