from fedpower.config.run_config import (  # noqa: F401
    NOISE_SCHEMES,
    OPTIMIZERS,
    PROTOCOLS,
    FLRunConfig,
    PrivacyConfig,
    ProtocolConfig,
    TaskConfig,
    TrainingConfig,
)
