import numpy as np

from fedpower.exceptions import ValidationError


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, name, param, grad):
        return param - self.lr * grad


class Adam:
    """Adam with per-parameter moments keyed by name."""

    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self._moments = {}

    def step(self, name, param, grad):
        m, v, t = self._moments.get(name, (np.zeros_like(param), np.zeros_like(param), 0))
        t += 1
        m = self.beta1 * m + (1 - self.beta1) * grad
        v = self.beta2 * v + (1 - self.beta2) * grad * grad
        self._moments[name] = (m, v, t)
        m_hat = m / (1 - self.beta1 ** t)
        v_hat = v / (1 - self.beta2 ** t)
        return param - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(name, lr):
    if name == "sgd":
        return SGD(lr)
    if name == "adam":
        return Adam(lr)
    raise ValidationError(f"unknown optimizer {name!r}; expected sgd or adam")
