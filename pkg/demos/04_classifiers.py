"""The two classifiers on a toy problem: SMO-trained RBF SVM and the small CNN."""

import numpy as np

from glottalkit import CnnConfig, SvmConfig, cnn_predict, cnn_train, svm_predict, svm_train
from glottalkit.cnn import flatten_width
from glottalkit.svm import resolve_gamma

rng = np.random.default_rng(0)
centers = {"breathy": -2.0, "modal": 0.0, "pressed": 2.0}
X = np.vstack([rng.normal(shift, 0.6, size=(20, 16)) for shift in centers.values()])
y = [label for label in centers for _ in range(20)]

gamma = resolve_gamma(X)
print(f"training matrix {X.shape}, gamma = 1/(D*Var) = {gamma:.4f}")

svm = svm_train(X, y, SvmConfig())
svm_acc = np.mean([p == t for p, t in zip(svm_predict(svm, X), y)])
print(f"SVM: {len(svm.machines)} one-vs-one machines, "
      f"KKT residuals {[f'{m.kkt:.1e}' for m in svm.machines]}, "
      f"training accuracy {svm_acc:.2f}")

print(f"\nCNN dense width for 16-dim inputs: {flatten_width(16)} "
      f"(= 32 channels x padded_dim/8)")
cnn = cnn_train(X[:-9], y[:-9], (X[-9:], y[-9:]),
                CnnConfig(max_epochs=40, patience=10, seed=0))
cnn_acc = np.mean([p == t for p, t in zip(cnn_predict(cnn, X), y)])
print(f"CNN: stopped after {len(cnn.history)} epochs "
      f"(best validation at epoch {cnn.best_epoch}), training accuracy {cnn_acc:.2f}")
