from dataclasses import dataclass, replace

import numpy as np

from fedpower import throw
from fedpower.exceptions import ShapeError, ValidationError
from fedpower.fl.model import full_gradient
from fedpower.linalg import Purpose, RngStream
from fedpower.utils import logger

# pool indices under the task stream
_PRETRAIN, _TRAIN, _TEST, _AUX, _HOLDOUT = range(5)


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2 or labels.shape != (features.shape[0],):
            raise ValidationError(
                f"features {features.shape} and labels {labels.shape} do not line up"
            )
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)

    def __len__(self):
        return self.labels.shape[0]

    def subset(self, index):
        index = np.asarray(index, dtype=np.int64)
        return Dataset(self.features[index], self.labels[index])

    @classmethod
    def concat(cls, parts):
        parts = list(parts)
        if not parts:
            raise ValidationError("cannot concatenate zero datasets")
        return cls(
            np.concatenate([p.features for p in parts]),
            np.concatenate([p.labels for p in parts]),
        )


@dataclass(frozen=True)
class SyntheticTask:
    """Gaussian clusters lifted through a fixed tanh feature map.

    The training pool is split evenly and disjointly across clients; the base
    weight is pretrained on its own pool. Test, auxiliary and holdout pools are
    disjoint from everything else.
    """

    n: int
    m: int
    classes: int
    base_weight: np.ndarray
    centers: np.ndarray
    feature_map: np.ndarray
    feature_bias: np.ndarray
    clients: tuple
    test: Dataset
    aux: Dataset
    holdout: Dataset
    pretrain: Dataset
    seed: int = 0

    @property
    def client_count(self):
        return len(self.clients)

    @property
    def train_pool(self):
        return Dataset.concat(self.clients)

    def with_client_data(self, datasets):
        """Same task and base weight, different client datasets."""
        datasets = tuple(datasets)
        for data in datasets:
            if data.features.shape[1] != self.n:
                throw(f"client features have {data.features.shape[1]} columns, task expects {self.n}", ShapeError)
        return replace(self, clients=datasets)

    @classmethod
    def generate(cls, config):
        """Build the task described by a TaskConfig; same seed, same arrays."""
        root = RngStream(config.seed, (Purpose.TASK,))
        d = config.latent_dim
        centers = root.child(0).normal((config.classes, d), config.separation)
        feature_map = root.child(1).normal((config.n, d), 1.0 / np.sqrt(d))
        feature_bias = root.child(2).normal(config.n, 0.5)

        def draw(pool, size, label_noise=0.0):
            stream = root.child(3, pool)
            gen = stream.generator
            labels = gen.integers(0, config.classes, size=size)
            latent = centers[labels] + gen.normal(size=(size, d))
            features = np.tanh(latent @ feature_map.T + feature_bias)
            if label_noise > 0:
                flip = gen.random(size) < label_noise
                shift = gen.integers(1, config.classes, size=size)
                labels = np.where(flip, (labels + shift) % config.classes, labels)
            return Dataset(features, labels)

        pretrain = draw(_PRETRAIN, config.pretrain_samples)
        train = draw(_TRAIN, config.clients * config.samples_per_client, config.label_noise)
        order = root.child(4).permutation(len(train))
        clients = tuple(train.subset(part) for part in np.array_split(order, config.clients))

        base = pretrain_base(pretrain, config.m, config.n, config.pretrain_epochs)
        logger("fl").debug(
            f"generated task seed={config.seed} n={config.n} m={config.m} "
            f"classes={config.classes} clients={config.clients}"
        )
        return cls(
            n=config.n,
            m=config.m,
            classes=config.classes,
            base_weight=base,
            centers=centers,
            feature_map=feature_map,
            feature_bias=feature_bias,
            clients=clients,
            test=draw(_TEST, config.test_samples),
            aux=draw(_AUX, config.aux_samples),
            holdout=draw(_HOLDOUT, config.holdout_samples),
            pretrain=pretrain,
            seed=config.seed,
        )


def pretrain_base(data, m, n, epochs, lr=0.5):
    """Full-batch gradient descent on the pretraining pool, from zero."""
    weight = np.zeros((m, n))
    if len(data) == 0:
        return weight
    for _ in range(epochs):
        _, grad = full_gradient(weight, data.features, data.labels)
        weight -= lr * grad
    return weight
