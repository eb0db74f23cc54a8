import logging

import numpy as np

logger = logging.getLogger(__name__)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def _spectral_norm_sq(X: np.ndarray, iterations: int = 50) -> float:
    """Largest eigenvalue of X^T X by power iteration from a fixed start."""
    if X.size == 0:
        return 0.0
    v = np.ones(X.shape[1]) / np.sqrt(X.shape[1])
    value = 0.0
    for _ in range(iterations):
        w = X.T @ (X @ v)
        norm = np.linalg.norm(w)
        if norm == 0:
            return 0.0
        value, v = norm, w / norm
    return float(value)


class LogisticRegression:
    """L2-regularized logistic regression fitted by full-batch gradient descent.

    Features are divided by their column max-abs value before fitting; the
    scale is kept with the weights. The bias is not regularized. The step is
    `learning_rate / L` with L the gradient's Lipschitz constant, so the
    descent is stable however wide the vocabulary is.
    """

    def __init__(self, l2: float = 1.0, learning_rate: float = 1.0, iterations: int = 2000):
        self.l2 = l2
        self.learning_rate = learning_rate
        self.iterations = iterations
        self.weights = np.zeros(0)
        self.bias = 0.0
        self.scale = np.zeros(0)

    def fit(self, X: np.ndarray, y: np.ndarray) -> "LogisticRegression":
        y = np.asarray(y, dtype=np.float64)
        n, d = X.shape
        scale = np.abs(X).max(axis=0) if n else np.ones(d)
        self.scale = np.where(scale > 0, scale, 1.0)
        Xs = X / self.scale
        lipschitz = 0.25 * _spectral_norm_sq(np.hstack([Xs, np.ones((n, 1))])) / n + self.l2 / n
        step = self.learning_rate / lipschitz
        w = np.zeros(d)
        b = 0.0
        for _ in range(self.iterations):
            error = _sigmoid(Xs @ w + b) - y
            w -= step * (Xs.T @ error / n + self.l2 * w / n)
            b -= step * float(error.mean())
        self.weights, self.bias = w, b
        logger.debug(f"Fitted logistic regression on {n} samples x {d} features (step {step:.4g})")
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return _sigmoid((X / self.scale) @ self.weights + self.bias)

    def parameters(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "bias": float(self.bias),
            "scale": [float(v) for v in self.scale],
            "l2": float(self.l2),
        }

    @classmethod
    def from_parameters(cls, parameters: dict) -> "LogisticRegression":
        model = cls(l2=parameters.get("l2", 1.0))
        model.weights = np.asarray(parameters["weights"], dtype=np.float64)
        model.bias = float(parameters["bias"])
        model.scale = np.asarray(parameters["scale"], dtype=np.float64)
        return model
