"""RBF-kernel SVM trained from scratch with SMO (most-violating-pair selection)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CLASS_ORDER = ("breathy", "modal", "pressed")


@dataclass(frozen=True)
class SvmConfig:
    c: float = 1.0
    gamma: float | str = "scale"  # "scale" -> 1/(D*Var(X)), or a fixed value
    tolerance: float = 1e-4
    max_iter: int = 200_000

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("C must be positive")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if isinstance(self.gamma, str) and self.gamma != "scale":
            raise ValueError("gamma must be 'scale' or a positive number")
        if not isinstance(self.gamma, str) and self.gamma <= 0:
            raise ValueError("gamma must be 'scale' or a positive number")


@dataclass
class BinarySvm:
    """One trained one-vs-one subproblem: +1 for ``pos`` label, -1 for ``neg``."""

    pos: object
    neg: object
    support_vectors: np.ndarray
    dual_coef: np.ndarray  # alpha_i * y_i for the support vectors
    bias: float
    objective: float  # dual objective sum(alpha) - 0.5 a'Qa at convergence
    kkt: float = 0.0  # worst one-sided KKT violation on the training set


@dataclass
class SvmModel:
    classes: tuple
    gamma: float
    c: float
    machines: list[BinarySvm] = field(default_factory=list)
    norm_stats: tuple | None = None  # optional (mean, std) z-score stats


def resolve_gamma(X: np.ndarray) -> float:
    """gamma = 1 / (D * Var(X)) with the population variance over all entries."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need a 2-D matrix with at least two rows")
    var = float(X.var())
    if var <= 0:
        raise ValueError("zero variance training data; cannot resolve gamma")
    return 1.0 / (X.shape[1] * var)


def rbf_kernel(a: np.ndarray, b: np.ndarray, gamma: float) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    sq = (
        np.sum(a * a, axis=1)[:, None]
        + np.sum(b * b, axis=1)[None, :]
        - 2.0 * (a @ b.T)
    )
    return np.exp(-gamma * np.maximum(sq, 0.0))


def _smo_solve(K: np.ndarray, y: np.ndarray, c: float, tol: float, max_iter: int):
    """Solve the dual min 1/2 a'Qa - 1'a, y'a = 0, 0 <= a <= C.

    Working set of two: the most violating pair (max over the 'up' set vs min
    over the 'down' set of -y*grad), updated analytically with box clipping.
    Returns (alpha, bias).
    """
    n = y.size
    alpha = np.zeros(n)
    grad = -np.ones(n)  # Q @ alpha - 1

    for _ in range(max_iter):
        score = -y * grad
        up = np.where(y > 0, alpha < c - 1e-12, alpha > 1e-12)
        down = np.where(y > 0, alpha > 1e-12, alpha < c - 1e-12)
        if not up.any() or not down.any():
            break
        i = int(np.flatnonzero(up)[np.argmax(score[up])])
        j = int(np.flatnonzero(down)[np.argmin(score[down])])
        violation = score[i] - score[j]
        if violation < tol:
            break

        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
        step = violation / quad if quad > 1e-12 else np.inf
        # box limits along the direction alpha_i += y_i*t, alpha_j -= y_j*t
        limit_i = (c - alpha[i]) if y[i] > 0 else alpha[i]
        limit_j = alpha[j] if y[j] > 0 else (c - alpha[j])
        step = min(step, limit_i, limit_j)
        if step <= 0:
            break

        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        # Q = (yy')K, so the pair update shifts the gradient by y_r*t*(K_ri - K_rj)
        grad += step * y * (K[:, i] - K[:, j])

    score = -y * grad
    up = np.where(y > 0, alpha < c - 1e-12, alpha > 1e-12)
    down = np.where(y > 0, alpha > 1e-12, alpha < c - 1e-12)
    hi = score[up].max() if up.any() else 0.0
    lo = score[down].min() if down.any() else 0.0
    bias = (hi + lo) / 2.0
    return alpha, float(bias)


def dual_objective(alpha: np.ndarray, K: np.ndarray, y: np.ndarray) -> float:
    """sum(alpha) - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij (to be maximized)."""
    ay = alpha * y
    return float(alpha.sum() - 0.5 * ay @ K @ ay)


def _ordered_classes(labels) -> tuple:
    present = set(labels)
    if present <= set(CLASS_ORDER):
        return tuple(c for c in CLASS_ORDER if c in present)
    return tuple(sorted(present, key=str))


def svm_train(X: np.ndarray, y, cfg: SvmConfig | None = None) -> SvmModel:
    """One-vs-one RBF SVMs trained with SMO to the configured KKT tolerance."""
    cfg = cfg or SvmConfig()
    X = np.asarray(X, dtype=np.float64)
    y = list(y)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two training rows")
    if len(y) != X.shape[0]:
        raise ValueError("label count must match row count")
    classes = _ordered_classes(y)
    if len(classes) < 2:
        raise ValueError("degenerate (single-class) input")
    gamma = resolve_gamma(X) if cfg.gamma == "scale" else float(cfg.gamma)

    labels = np.asarray(y, dtype=object)
    model = SvmModel(classes=classes, gamma=gamma, c=cfg.c)
    for a_idx in range(len(classes)):
        for b_idx in range(a_idx + 1, len(classes)):
            pos, neg = classes[a_idx], classes[b_idx]
            mask = (labels == pos) | (labels == neg)
            Xs = X[mask]
            ys = np.where(labels[mask] == pos, 1.0, -1.0)
            K = rbf_kernel(Xs, Xs, gamma)
            alpha, bias = _smo_solve(K, ys, cfg.c, cfg.tolerance, cfg.max_iter)
            obj = dual_objective(alpha, K, ys)
            sv = alpha > 1e-12
            model.machines.append(BinarySvm(
                pos=pos, neg=neg,
                support_vectors=Xs[sv].copy(),
                dual_coef=(alpha * ys)[sv].copy(),
                bias=bias,
                objective=obj,
                kkt=_kkt_from_alpha(alpha, K, ys, bias, cfg.c),
            ))
    return model


def _kkt_from_alpha(alpha, K, y, bias, c) -> float:
    """Worst one-sided KKT violation given the converged dual variables."""
    yf = y * (K @ (alpha * y) + bias)
    free = (alpha > 1e-12) & (alpha < c - 1e-12)
    worst = 0.0
    if np.any(alpha <= 1e-12):
        worst = max(worst, float(np.max(1.0 - yf[alpha <= 1e-12])))
    if np.any(alpha >= c - 1e-12):
        worst = max(worst, float(np.max(yf[alpha >= c - 1e-12] - 1.0)))
    if np.any(free):
        worst = max(worst, float(np.max(np.abs(yf[free] - 1.0))))
    return max(worst, 0.0)


def binary_decision(machine: BinarySvm, X: np.ndarray, gamma: float) -> np.ndarray:
    """Signed decision value f(x) = sum_i alpha_i y_i k(x_i, x) + b."""
    if machine.support_vectors.size == 0:
        return np.full(np.atleast_2d(X).shape[0], machine.bias)
    K = rbf_kernel(np.atleast_2d(X), machine.support_vectors, gamma)
    return K @ machine.dual_coef + machine.bias


def svm_predict(model: SvmModel, X: np.ndarray):
    """One-vs-one majority vote; ties broken by summed decision values,
    then by the fixed class order."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.machines and X.shape[1] != model.machines[0].support_vectors.shape[1]:
        raise ValueError("feature dimension mismatch with the trained model")
    n = X.shape[0]
    votes = {c: np.zeros(n) for c in model.classes}
    scores = {c: np.zeros(n) for c in model.classes}
    for machine in model.machines:
        d = binary_decision(machine, X, model.gamma)
        win_pos = d >= 0  # zero decision counts for the earlier class in order
        votes[machine.pos] += win_pos
        votes[machine.neg] += ~win_pos
        scores[machine.pos] += d
        scores[machine.neg] -= d
    out = []
    for r in range(n):
        best = max(
            model.classes,
            key=lambda c: (votes[c][r], scores[c][r], -model.classes.index(c)),
        )
        out.append(best)
    return out


def kkt_violation(machine: BinarySvm, X: np.ndarray, y: np.ndarray,
                  gamma: float, c: float) -> float:
    """Worst-case KKT violation of a trained binary machine on its training set.

    alpha=0 rows need y*f >= 1, bound rows y*f <= 1, free rows y*f = 1;
    returns the largest one-sided excess (0 means KKT satisfied exactly).
    """
    f = binary_decision(machine, X, gamma)
    yf = y * f
    # reconstruct alpha*y per training row by matching support vectors
    alpha = np.zeros(y.size)
    sv = machine.support_vectors
    used = np.zeros(sv.shape[0], dtype=bool)
    for r in range(y.size):
        for s in range(sv.shape[0]):
            if not used[s] and np.array_equal(X[r], sv[s]):
                alpha[r] = machine.dual_coef[s] * y[r]
                used[s] = True
                break
    worst = 0.0
    for r in range(y.size):
        if alpha[r] <= 1e-12:
            worst = max(worst, 1.0 - yf[r])
        elif alpha[r] >= c - 1e-12:
            worst = max(worst, yf[r] - 1.0)
        else:
            worst = max(worst, abs(yf[r] - 1.0))
    return worst
