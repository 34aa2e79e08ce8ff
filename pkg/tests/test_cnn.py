import numpy as np
import pytest

from glottalkit.cnn import (CnnConfig, _pad_inputs, cnn_predict, cnn_train,
                            flatten_width, forward_logits, init_params,
                            loss_and_grads, padded_dim, softmax)

BN_EPS = 1e-5


def toy_problem(n=30, dim=16, seed=0):
    rng = np.random.default_rng(seed)
    centers = {"breathy": -1.0, "modal": 0.0, "pressed": 1.0}
    X, y = [], []
    for label, shift in centers.items():
        X.append(rng.normal(shift, 0.3, size=(n // 3, dim)))
        y += [label] * (n // 3)
    return np.vstack(X), y


class TestArchitecture:
    @pytest.mark.parametrize("dim,width", [(80, 320), (513, 2080),
                                           (768, 3072), (1024, 4096)])
    def test_flatten_width_rule(self, dim, width):
        assert flatten_width(dim) == width
        assert padded_dim(dim) % 8 == 0

    def test_softmax_normalization(self):
        rng = np.random.default_rng(1)
        logits = rng.normal(0, 50, size=(40, 3))
        p = softmax(logits)
        assert np.all(p > 0)
        assert np.max(np.abs(p.sum(axis=1) - 1.0)) <= 1e-9

    def test_input_dim_floor(self):
        X, y = toy_problem(dim=16)
        with pytest.raises(ValueError, match=">= 8"):
            cnn_train(X[:, :4], y, (X[:, :4], y), CnnConfig(max_epochs=1))

    def test_empty_validation_rejected(self):
        X, y = toy_problem()
        with pytest.raises(ValueError, match="empty validation"):
            cnn_train(X, y, (np.zeros((0, 16)), []), CnnConfig(max_epochs=1))


class TestGradients:
    def test_finite_difference_check_all_parameters(self):
        rng = np.random.default_rng(42)
        dim = 16
        cfg = CnnConfig(seed=7)
        params, _ = init_params(dim, cfg, np.random.default_rng(cfg.seed))
        X = rng.normal(size=(5, dim))
        y_idx = np.array([0, 1, 2, 1, 0])
        Xp = _pad_inputs(X, dim)

        _, grads, _ = loss_and_grads(params, Xp, y_idx, BN_EPS)
        h = 1e-4
        worst = 0.0
        for name, value in params.items():
            grad = grads[name]
            flat = value.ravel()
            for idx in range(flat.size):
                orig = flat[idx]
                flat[idx] = orig + h
                up = loss_and_grads(params, Xp, y_idx, BN_EPS)[0]
                flat[idx] = orig - h
                down = loss_and_grads(params, Xp, y_idx, BN_EPS)[0]
                flat[idx] = orig
                numeric = (up - down) / (2 * h)
                analytic = grad.ravel()[idx]
                # conv biases feeding batch norm have exactly zero gradient;
                # the floor keeps pure float noise from dominating the ratio
                rel = abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-6)
                worst = max(worst, rel)
        assert worst <= 1e-4, worst


class TestTraining:
    def test_toy_memorization(self):
        rng = np.random.default_rng(3)
        X = rng.normal(size=(3, 16))
        y = ["breathy", "modal", "pressed"]
        cfg = CnnConfig(max_epochs=500, patience=None, seed=1)
        model = cnn_train(X, y, (X, y), cfg)
        train_losses = [row[1] for row in model.history]
        assert min(train_losses) < 0.01
        assert cnn_predict(model, X) == y

    def test_bitwise_reproducibility(self):
        X, y = toy_problem()
        cfg = CnnConfig(max_epochs=5, seed=11)
        m1 = cnn_train(X[:-6], y[:-6], (X[-6:], y[-6:]), cfg)
        m2 = cnn_train(X[:-6], y[:-6], (X[-6:], y[-6:]), cfg)
        for key in m1.params:
            assert np.array_equal(m1.params[key], m2.params[key]), key
        for key in m1.running:
            assert np.array_equal(m1.running[key], m2.running[key]), key

    def test_early_stopping_and_best_epoch(self):
        X, y = toy_problem(n=30)
        cfg = CnnConfig(max_epochs=60, patience=5, seed=2)
        model = cnn_train(X[:-6], y[:-6], (X[-6:], y[-6:]), cfg)
        epochs_run = len(model.history)
        assert epochs_run <= 60
        val_losses = [row[2] for row in model.history]
        assert model.best_epoch == int(np.argmin(val_losses)) + 1
        # ties and later non-improvements never move best_epoch forward
        assert val_losses[model.best_epoch - 1] == min(val_losses)

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")  # overflow on purpose
    def test_divergence_raises(self):
        X, y = toy_problem()
        cfg = CnnConfig(max_epochs=20, learning_rate=1e150, seed=0)
        with pytest.raises(ValueError, match="non-finite loss"):
            cnn_train(X, y, (X, y), cfg)


class TestPredict:
    def test_prediction_invariant_to_batch_composition(self):
        X, y = toy_problem()
        cfg = CnnConfig(max_epochs=8, seed=5)
        model = cnn_train(X[:-6], y[:-6], (X[-6:], y[-6:]), cfg)
        single = forward_logits(model.params, X[:1], model.input_dim,
                                model.running, cfg.bn_eps)
        batched = forward_logits(model.params, X[:7], model.input_dim,
                                 model.running, cfg.bn_eps)
        assert np.allclose(single[0], batched[0], atol=1e-9)
        assert cnn_predict(model, X[0]) == cnn_predict(model, X[:7])[0]

    def test_one_hot_logit_construction(self):
        # force fc2 so that class index 2 always wins
        cfg = CnnConfig(seed=0)
        params, running = init_params(16, cfg, np.random.default_rng(0))
        params["fc2_w"][:] = 0.0
        params["fc2_b"][:] = np.array([0.0, 0.0, 10.0])
        from glottalkit.cnn import CnnModel
        model = CnnModel(params=params, running=running,
                         classes=("breathy", "modal", "pressed"),
                         input_dim=16, config=cfg)
        rng = np.random.default_rng(9)
        assert cnn_predict(model, rng.normal(size=16)) == "pressed"

    def test_forward_matches_stepwise_oracle(self):
        dim = 8
        cfg = CnnConfig(seed=3)
        rng = np.random.default_rng(21)
        params, running = init_params(dim, cfg, np.random.default_rng(cfg.seed))
        for key in running:  # non-trivial running stats
            running[key] = np.abs(rng.normal(1.0, 0.1, running[key].shape))
        x = rng.normal(size=dim)

        def conv_oracle(signal, w, b):
            cin, length = signal.shape
            cout = w.shape[0]
            padded = np.concatenate([signal, np.zeros((cin, 1))], axis=1)
            out = np.zeros((cout, length // 2))
            for o in range(cout):
                for t in range(length // 2):
                    acc = b[o]
                    for i in range(cin):
                        for k in range(3):
                            acc += w[o, i, k] * padded[i, 2 * t + k]
                    out[o, t] = acc
            return out

        h = x[None, :].copy()
        for i in range(1, 4):
            h = conv_oracle(h, params[f"conv{i}_w"], params[f"conv{i}_b"])
            mean, var = running[f"bn{i}_mean"], running[f"bn{i}_var"]
            gamma, beta = params[f"bn{i}_gamma"], params[f"bn{i}_beta"]
            for c in range(h.shape[0]):
                h[c] = gamma[c] * (h[c] - mean[c]) / np.sqrt(var[c] + cfg.bn_eps) \
                    + beta[c]
            h = np.maximum(h, 0.0)
        flat = h.reshape(-1)
        hidden = np.maximum(params["fc1_w"] @ flat + params["fc1_b"], 0.0)
        logits_oracle = params["fc2_w"] @ hidden + params["fc2_b"]

        logits = forward_logits(params, x[None, :], dim, running, cfg.bn_eps)[0]
        assert np.allclose(logits, logits_oracle, rtol=1e-12, atol=1e-12)
