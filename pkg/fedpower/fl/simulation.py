import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from fedpower.factorize import LoRAPair
from fedpower.fl.client import ClientState, local_train
from fedpower.fl.communication import upload_bits
from fedpower.fl.model import ReleasedModel
from fedpower.fl.protocols import fedlora_round, fedpower_round, ffalora_round
from fedpower.fl.task import SyntheticTask
from fedpower.linalg import Purpose, RngStream, gaussian_matrix
from fedpower.utils import logger

ROUND_COLUMNS = (
    "round", "clients", "accuracy", "cumulative_bits", "sigma", "noise_std",
    "refactored", "deficient",
)


@dataclass(frozen=True)
class RoundLog:
    round: int
    clients: tuple
    accuracy: float
    cumulative_bits: int
    aggregation_seconds: float
    sigma: float
    noise_std: float = 0.0
    refactored: bool = False
    deficient: int = 0

    def as_row(self):
        """CSV row; wall-time is kept out so the row is reproducible."""
        return {
            "round": self.round,
            "clients": ";".join(str(c) for c in self.clients),
            "accuracy": self.accuracy,
            "cumulative_bits": self.cumulative_bits,
            "sigma": self.sigma,
            "noise_std": self.noise_std,
            "refactored": int(self.refactored),
            "deficient": self.deficient,
        }


@dataclass
class ExperimentResult:
    config: object
    task: SyntheticTask
    rounds: list
    initial_pair: LoRAPair
    final_pair: LoRAPair
    sigma: float
    base_accuracy: float
    clients: list = field(default_factory=list, repr=False)

    @property
    def final_weight(self):
        return self.task.base_weight + self.final_pair.merged()

    @property
    def released_model(self):
        return ReleasedModel(self.final_weight)

    @property
    def final_accuracy(self):
        return self.rounds[-1].accuracy if self.rounds else self.base_accuracy

    @property
    def total_bits(self):
        return self.rounds[-1].cumulative_bits if self.rounds else 0

    @property
    def aggregation_times(self):
        return [log.aggregation_seconds for log in self.rounds]


def sample_clients(count, q_c, rng):
    """Fixed-size cohort of ceil(q_c * count) distinct clients, sorted."""
    size = min(count, max(1, math.ceil(q_c * count - 1e-12)))
    return sorted(int(i) for i in rng.choice(count, size, replace=False))


def build_clients(task, config):
    training = config.training
    return [
        ClientState(
            id=i,
            data=data,
            base_weight=task.base_weight,
            eta=training.eta,
            L=training.L,
            q_s=training.q_s,
            optimizer=training.optimizer,
            freeze_a=config.protocol.name == "ffalora",
        )
        for i, data in enumerate(task.clients)
    ]


def initial_pair(task, config, rng):
    r = config.protocol.r
    std = config.training.init_std
    if std is None:
        std = 1.0 / math.sqrt(task.n)
    a = gaussian_matrix(r, task.n, std, rng.child(Purpose.INIT))
    return LoRAPair(a=a, b=np.zeros((task.m, r)))


def _disclose(config, spec, log):
    log.info(config.describe())
    if spec.is_private:
        log.info(
            f"sigma={spec.sigma:.6g} from {config.sigma_source}; accounting assumes Poisson "
            f"client sampling while rounds draw a fixed cohort of ceil(q_c N)"
        )
        if config.protocol.name in ("fedlora", "ffalora"):
            log.info("A and B are clipped independently; the product's sensitivity is not analysed")


def run_experiment(config, task=None, progress=False, debug=None):
    """T rounds of client sampling, local training and server aggregation."""
    log = logger("fl")
    config.validate()
    task = task if task is not None else SyntheticTask.generate(config.task)
    spec = config.privacy_spec()
    _disclose(config, spec, log)

    root = RngStream(config.seed)
    protocol = config.protocol
    clients = build_clients(task, config)
    pair = initial_pair(task, config, root)
    start_pair = pair
    per_client_bits = upload_bits(protocol.name, task.m, task.n, protocol.r, config.value_width)
    base_accuracy = ReleasedModel(task.base_weight).accuracy(task.test)

    rounds = []
    bits = 0
    workers = config.training.workers
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for t in tqdm(range(1, config.training.T + 1), disable=not progress, desc=config.name):
            step = root.child(t)
            cohort = sample_clients(len(clients), config.training.q_c, step.child(Purpose.CLIENT_SAMPLING))
            jobs = [(clients[i], step.child(Purpose.CLIENT, i)) for i in cohort]
            if pool is None:
                client_pairs = [local_train(c, pair, s) for c, s in jobs]
            else:
                client_pairs = list(pool.map(lambda job: local_train(job[0], pair, job[1]), jobs))

            server = step.child(Purpose.SERVER)
            started = time.perf_counter()
            if protocol.name == "fedlora":
                pair, stats = fedlora_round(client_pairs, pair, spec, server, debug=debug)
            elif protocol.name == "ffalora":
                b, stats = ffalora_round(client_pairs, pair.a, pair.b, spec, server, debug=debug)
                pair = LoRAPair(a=pair.a, b=b)
            else:
                refactor_now = t % protocol.refactor_frequency == 0
                pair, stats = fedpower_round(
                    client_pairs, pair, spec, protocol.k, refactor_now, server,
                    noise_scheme=protocol.noise_scheme, debug=debug,
                )
            elapsed = time.perf_counter() - started

            bits += per_client_bits * len(cohort)
            accuracy = ReleasedModel.from_pair(task.base_weight, pair).accuracy(task.test)
            rounds.append(RoundLog(
                round=t,
                clients=tuple(cohort),
                accuracy=accuracy,
                cumulative_bits=bits,
                aggregation_seconds=elapsed,
                sigma=spec.sigma,
                noise_std=stats.noise_std,
                refactored=stats.refactored,
                deficient=stats.deficient,
            ))
            if stats.deficient:
                log.warning(f"round {t}: {stats.deficient} rank-deficient directions refilled")
    finally:
        if pool is not None:
            pool.shutdown()

    result = ExperimentResult(
        config=config,
        task=task,
        rounds=rounds,
        initial_pair=start_pair,
        final_pair=pair,
        sigma=spec.sigma,
        base_accuracy=base_accuracy,
        clients=clients,
    )
    log.info(
        f"{config.name}: final accuracy {result.final_accuracy:.4f} "
        f"(base {base_accuracy:.4f}) after {len(rounds)} rounds, {bits} bits"
    )
    return result
