from fedpower import hooks
from fedpower.config import FLRunConfig, PrivacyConfig, ProtocolConfig, TaskConfig, TrainingConfig
from fedpower.exceptions import ConfigError

_BUDGETS = {"nonprivate": None, "eps9": 9.0, "eps6": 6.0, "eps3": 3.0}

# learning rates tuned separately for the two regimes
NONPRIVATE_ETA = 0.1
PRIVATE_ETA = 0.2


def preset(name, protocol="fedpower", seed=0):
    """The evaluation setup: 6 clients, cohort 3, batch ~128, T=200, r=8, C=2, delta=1e-5."""
    if name in hooks.control_presets:
        return overfit_control(protocol=protocol, seed=seed)
    if name not in _BUDGETS:
        valid = ", ".join(hooks.preset_names + hooks.control_presets)
        raise ConfigError(f"unknown preset {name!r}; valid presets: {valid}")

    epsilon = _BUDGETS[name]
    private = epsilon is not None
    return FLRunConfig(
        task=TaskConfig(samples_per_client=2560, clients=6),
        protocol=ProtocolConfig(name=protocol, r=8, k=hooks.default_power_iterations),
        training=TrainingConfig(
            T=200, L=5, q_c=0.5, q_s=128 / 2560,
            eta=PRIVATE_ETA if private else NONPRIVATE_ETA,
        ),
        privacy=PrivacyConfig(epsilon=epsilon, delta=1e-5, clip=2.0 if private else None),
        seed=seed,
        name=f"{name}-{protocol}",
    )


def overfit_control(protocol="fedpower", seed=0):
    """Non-private run on tiny noisy client datasets trained to memorization."""
    return FLRunConfig(
        task=TaskConfig(samples_per_client=10, clients=6, label_noise=0.3),
        protocol=ProtocolConfig(name=protocol, r=8),
        training=TrainingConfig(T=100, L=10, q_c=1.0, q_s=1.0, eta=0.5),
        privacy=PrivacyConfig(clip=None),
        seed=seed,
        name=f"overfit-{protocol}",
    )
