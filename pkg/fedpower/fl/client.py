from dataclasses import dataclass, field

import numpy as np

from fedpower.exceptions import ShapeError, ValidationError
from fedpower.factorize import LoRAPair
from fedpower.fl.model import lora_gradients
from fedpower.fl.optim import make_optimizer
from fedpower.linalg import Purpose
from fedpower.utils import logger


@dataclass
class ClientState:
    """One client's data, training hyper-parameters and latest adapter."""

    id: int
    data: object
    base_weight: np.ndarray
    eta: float
    L: int
    q_s: float
    optimizer: str = "sgd"
    # FFA-LoRA trains B only
    freeze_a: bool = False
    pair: LoRAPair = field(default=None, repr=False)
    skipped_steps: int = 0


def local_train(client, global_pair, rng):
    """L Poisson-sampled mini-batch steps on (W0 + B A), starting from the global pair.

    Batch l is drawn from rng.child(BATCH, l); an empty batch skips the step.
    """
    if not 0 < client.q_s <= 1:
        raise ValidationError(f"batch sampling rate must lie in (0, 1], got {client.q_s}")
    m, n = global_pair.shape
    if client.base_weight.shape != (m, n):
        raise ShapeError(
            f"client {client.id} base weight is {client.base_weight.shape}, adapter merges to {(m, n)}"
        )

    a, b = global_pair.a.copy(), global_pair.b.copy()
    opt = make_optimizer(client.optimizer, client.eta)
    size = len(client.data)
    for step in range(client.L):
        mask = rng.child(Purpose.BATCH, step).random(size) < client.q_s
        batch = np.flatnonzero(mask)
        if batch.size == 0:
            client.skipped_steps += 1
            logger("fl").debug(f"client {client.id} step {step}: empty batch, skipped")
            continue
        _, grad_a, grad_b = lora_gradients(
            client.base_weight, a, b, client.data.features[batch], client.data.labels[batch]
        )
        if not client.freeze_a:
            a = opt.step("a", a, grad_a)
        b = opt.step("b", b, grad_b)

    client.pair = LoRAPair(a=a, b=b)
    return client.pair
