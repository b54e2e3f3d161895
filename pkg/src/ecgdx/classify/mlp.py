"""Fully connected network: rectifier hidden units, softmax output,
cross-entropy loss, mini-batch SGD with momentum. Deterministic given the
config seed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import TrainingError


@dataclass(frozen=True)
class MlpConfig:
    hidden_layers: tuple[int, ...] = (100, 50)
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 64
    momentum: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if any(h < 1 for h in self.hidden_layers):
            raise ValueError(f"hidden layer sizes must be >= 1, got {self.hidden_layers}")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class MlpNetwork:
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    @classmethod
    def init(cls, layer_sizes: list[int], rng: np.random.Generator) -> "MlpNetwork":
        """Uniform init scaled by fan-in: U(-1/sqrt(d_in), 1/sqrt(d_in))."""
        weights, biases = [], []
        for d_in, d_out in zip(layer_sizes[:-1], layer_sizes[1:]):
            bound = 1.0 / np.sqrt(d_in)
            weights.append(rng.uniform(-bound, bound, size=(d_in, d_out)))
            biases.append(np.zeros(d_out))
        return cls(weights, biases)

    @property
    def n_features(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_outputs(self) -> int:
        return self.weights[-1].shape[1]

    def forward(self, X: np.ndarray) -> list[np.ndarray]:
        """Activations per layer; the last entry is the softmax output."""
        acts = [np.asarray(X, dtype=np.float64)]
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            z = acts[-1] @ W + b
            acts.append(softmax(z) if i == len(self.weights) - 1 else relu(z))
        return acts

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        return self.forward(X)[-1]

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    def loss_and_gradients(
        self, X: np.ndarray, Y: np.ndarray
    ) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
        """Mean cross-entropy against one-hot ``Y`` plus gradients per layer."""
        acts = self.forward(X)
        probs = acts[-1]
        n = X.shape[0]
        loss = float(-np.sum(Y * np.log(np.clip(probs, 1e-300, None))) / n)
        grad_w = [np.empty_like(W) for W in self.weights]
        grad_b = [np.empty_like(b) for b in self.biases]
        delta = (probs - Y) / n  # softmax + cross-entropy
        for layer in range(len(self.weights) - 1, -1, -1):
            grad_w[layer] = acts[layer].T @ delta
            grad_b[layer] = delta.sum(axis=0)
            if layer > 0:
                delta = (delta @ self.weights[layer].T) * (acts[layer] > 0.0)
        return loss, grad_w, grad_b


def fit_mlp(X: np.ndarray, y_codes: np.ndarray, n_classes: int, cfg: MlpConfig) -> MlpNetwork:
    if n_classes < 2:
        raise TrainingError("MLP needs at least two classes")
    n, d = X.shape
    Y = np.zeros((n, n_classes))
    Y[np.arange(n), y_codes] = 1.0

    rng = np.random.default_rng(cfg.seed)
    net = MlpNetwork.init([d, *cfg.hidden_layers, n_classes], rng)
    vel_w = [np.zeros_like(W) for W in net.weights]
    vel_b = [np.zeros_like(b) for b in net.biases]

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start: start + cfg.batch_size]
            loss, grad_w, grad_b = net.loss_and_gradients(X[idx], Y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"training diverged at epoch {epoch}: loss is not finite")
            for layer in range(len(net.weights)):
                vel_w[layer] = cfg.momentum * vel_w[layer] - cfg.learning_rate * grad_w[layer]
                vel_b[layer] = cfg.momentum * vel_b[layer] - cfg.learning_rate * grad_b[layer]
                net.weights[layer] += vel_w[layer]
                net.biases[layer] += vel_b[layer]
    return net
