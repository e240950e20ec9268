import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from functools import lru_cache
from pathlib import Path

from fedpower import hooks, throw
from fedpower.accountant import certify, effective_rate, required_sigma
from fedpower.dp import Adjacency, PrivacySpec
from fedpower.exceptions import ConfigError, DomainError

PROTOCOLS = ("fedlora", "ffalora", "fedpower")
NOISE_SCHEMES = ("powerdp", "input", "output")
OPTIMIZERS = ("sgd", "adam")


@dataclass(frozen=True)
class TaskConfig:
    n: int = 48
    m: int = 12
    classes: int = 12
    samples_per_client: int = 2560
    clients: int = 6
    seed: int = 0
    latent_dim: int = 8
    separation: float = 1.0
    test_samples: int = 1000
    aux_samples: int = 2000
    holdout_samples: int = 1000
    pretrain_samples: int = 240
    pretrain_epochs: int = 30
    label_noise: float = 0.0


@dataclass(frozen=True)
class ProtocolConfig:
    name: str = "fedpower"
    r: int = 8
    k: int = hooks.default_power_iterations
    refactor_frequency: int = 1
    noise_scheme: str = "powerdp"


@dataclass(frozen=True)
class TrainingConfig:
    T: int = 200
    L: int = 5
    eta: float = 0.1
    q_c: float = 0.5
    q_s: float = 0.05
    optimizer: str = "sgd"
    # std of the Gaussian A^0; None means 1/sqrt(n)
    init_std: float = None
    workers: int = 1


@dataclass(frozen=True)
class PrivacyConfig:
    epsilon: float = None
    delta: float = 1e-5
    # None disables clipping
    clip: float = 2.0
    adjacency: str = "sample"
    sigma: float = None
    tight_sensitivity: bool = False


@lru_cache(maxsize=256)
def _sigma_for_budget(epsilon, delta, q, T):
    return required_sigma(epsilon, delta, q, T)


@dataclass(frozen=True)
class FLRunConfig:
    task: TaskConfig = field(default_factory=TaskConfig)
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    privacy: PrivacyConfig = field(default_factory=PrivacyConfig)
    seed: int = 0
    seeds: tuple = (0, 1, 2, 3, 4)
    name: str = "run"
    value_width: int = hooks.value_width_bits
    output_dir: str = None

    def __post_init__(self):
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        self.validate()

    # Validation
    # ----------

    def validate(self):
        t, p, tr, pr = self.task, self.protocol, self.training, self.privacy
        checks = [
            (t.n >= 1 and t.m >= 1, "task.n and task.m must be positive"),
            (2 <= t.classes <= t.m, "task.classes must lie in [2, task.m]"),
            (t.clients >= 1 and t.samples_per_client >= 1, "task needs clients with data"),
            (0 <= t.label_noise < 1, "task.label_noise must lie in [0, 1)"),
            (p.name in PROTOCOLS, f"protocol.name must be one of {PROTOCOLS}"),
            (p.noise_scheme in NOISE_SCHEMES, f"protocol.noise_scheme must be one of {NOISE_SCHEMES}"),
            (1 <= p.r <= min(t.m, t.n), "protocol.r must lie in [1, min(m, n)]"),
            (p.k >= 1, "protocol.k must be at least 1"),
            (p.refactor_frequency >= 1, "protocol.refactor_frequency must be at least 1"),
            (tr.T >= 0 and tr.L >= 0, "training.T and training.L must be non-negative"),
            (tr.eta >= 0, "training.eta must be non-negative"),
            (0 < tr.q_c <= 1 and 0 < tr.q_s <= 1, "sampling rates must lie in (0, 1]"),
            (tr.optimizer in OPTIMIZERS, f"training.optimizer must be one of {OPTIMIZERS}"),
            (tr.workers >= 1, "training.workers must be at least 1"),
            (0 < pr.delta < 1, "privacy.delta must lie in (0, 1)"),
            (pr.clip is None or pr.clip > 0, "privacy.clip must be positive"),
            (pr.adjacency in (a.value for a in Adjacency), "privacy.adjacency must be sample or client"),
            (not (pr.epsilon is not None and pr.sigma is not None),
             "privacy supplies both epsilon and sigma; give exactly one"),
            (pr.epsilon is None or pr.epsilon > 0, "privacy.epsilon must be positive"),
            (pr.sigma is None or pr.sigma >= 0, "privacy.sigma must be non-negative"),
            (self.value_width >= 1, "value_width must be positive"),
        ]
        for ok, message in checks:
            if not ok:
                throw(message, ConfigError)
        if self.is_private and pr.clip is None:
            throw("private runs need a finite privacy.clip", ConfigError)

    # Privacy
    # -------

    @property
    def is_private(self):
        pr = self.privacy
        return pr.epsilon is not None or bool(pr.sigma)

    @property
    def sampling_rate(self):
        return effective_rate(self.training.q_c, self.training.q_s, self.privacy.adjacency)

    @property
    def sigma(self):
        """Noise multiplier in use: explicit, derived from epsilon, or 0."""
        pr = self.privacy
        if pr.sigma is not None:
            return float(pr.sigma)
        if pr.epsilon is None or self.training.T == 0:
            return 0.0
        try:
            return _sigma_for_budget(pr.epsilon, pr.delta, self.sampling_rate, self.training.T)
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def sigma_source(self):
        if self.privacy.sigma is not None:
            return "explicit"
        return "accountant" if self.privacy.epsilon is not None else "nonprivate"

    def certify(self):
        """(epsilon, Renyi order) the accountant certifies for the sigma actually used."""
        return certify(self.sigma, self.sampling_rate, self.training.T, self.privacy.delta)

    def privacy_spec(self):
        pr = self.privacy
        sigma = self.sigma
        return PrivacySpec(
            epsilon=pr.epsilon if pr.epsilon is not None else math.inf,
            delta=pr.delta,
            sigma=sigma,
            clip=pr.clip if pr.clip is not None else math.inf,
            adjacency=pr.adjacency,
            tight_sensitivity=pr.tight_sensitivity,
        )

    # Persistence
    # -----------

    def to_dict(self):
        data = asdict(self)
        data["seeds"] = list(self.seeds)
        return data

    @classmethod
    def from_dict(cls, data):
        sections = {"task": TaskConfig, "protocol": ProtocolConfig,
                    "training": TrainingConfig, "privacy": PrivacyConfig}
        try:
            kwargs = {name: _section(kind, data.get(name, {}), name) for name, kind in sections.items()}
            for key in ("seed", "seeds", "name", "value_width", "output_dir"):
                if key in data:
                    kwargs[key] = data[key]
            unknown = set(data) - set(kwargs) - set(sections)
            if unknown:
                raise ConfigError(f"unknown config keys: {sorted(unknown)}")
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"malformed config: {exc}") from exc

    def save(self, path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path

    @classmethod
    def load(cls, path):
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} is not a JSON object")
        return cls.from_dict(data)

    def with_overrides(self, **sections):
        """Copy with per-section field overrides, e.g. training={"T": 10}."""
        changes = {}
        for name, values in sections.items():
            current = getattr(self, name)
            changes[name] = replace(current, **values) if isinstance(values, dict) else values
        return replace(self, **changes)

    def describe(self):
        return (
            f"{self.name}: protocol={self.protocol.name} r={self.protocol.r} k={self.protocol.k} "
            f"f={self.protocol.refactor_frequency} T={self.training.T} q_c={self.training.q_c} "
            f"q_s={self.training.q_s} sigma={self.sigma:.4g} ({self.sigma_source}) "
            f"clip={self.privacy.clip} tight={self.privacy.tight_sensitivity} "
            f"width={self.value_width}"
        )


def _section(kind, values, name):
    if not isinstance(values, dict):
        raise ConfigError(f"section {name!r} must be an object")
    known = {f.name for f in fields(kind)}
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown keys in {name!r}: {sorted(unknown)}")
    return kind(**values)


