from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax

from fedpower.exceptions import ShapeError


def _check_batch(weight, x, y):
    if x.ndim != 2 or x.shape[1] != weight.shape[1]:
        raise ShapeError(f"batch of shape {x.shape} does not fit a {weight.shape} weight")
    if y.shape != (x.shape[0],):
        raise ShapeError(f"{y.shape[0]} labels for {x.shape[0]} samples")


def cross_entropy(weight, x, y):
    """Per-sample cross-entropy of softmax(W x) in nats."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64)
    _check_batch(weight, x, y)
    logp = log_softmax(x @ weight.T, axis=1)
    return -logp[np.arange(len(y)), y]


def full_gradient(weight, x, y):
    """Mean loss and its gradient with respect to the full weight."""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64)
    _check_batch(weight, x, y)
    logits = x @ weight.T
    probs = softmax(logits, axis=1)
    rows = np.arange(len(y))
    loss = float(np.mean(-log_softmax(logits, axis=1)[rows, y]))
    probs[rows, y] -= 1.0
    return loss, (probs / len(y)).T @ x


def lora_gradients(base, a, b, x, y):
    """Mean loss of (W0 + B A) and its gradients with respect to A and B.

    With G the weight gradient, dL/dB = G A^T and dL/dA = B^T G.
    """
    loss, grad_w = full_gradient(base + b @ a, x, y)
    return loss, b.T @ grad_w, grad_w @ a.T


@dataclass(frozen=True)
class ReleasedModel:
    """The merged weight a downstream user receives; outputs only."""

    weight: np.ndarray

    @classmethod
    def from_pair(cls, base, pair):
        return cls(np.asarray(base) + pair.merged())

    def predict_proba(self, x):
        return softmax(np.asarray(x, dtype=np.float64) @ self.weight.T, axis=1)

    def losses(self, x, y):
        return cross_entropy(self.weight, x, y)

    def accuracy(self, data):
        if len(data) == 0:
            return 0.0
        predicted = np.argmax(data.features @ self.weight.T, axis=1)
        return float(np.mean(predicted == data.labels))
