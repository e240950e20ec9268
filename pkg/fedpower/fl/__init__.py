from fedpower.fl.client import ClientState, local_train  # noqa: F401
from fedpower.fl.communication import upload_bits  # noqa: F401
from fedpower.fl.model import (  # noqa: F401
    ReleasedModel,
    cross_entropy,
    full_gradient,
    lora_gradients,
)
from fedpower.fl.optim import SGD, Adam, make_optimizer  # noqa: F401
from fedpower.fl.protocols import (  # noqa: F401
    AggregationStats,
    aggregate_products,
    fedlora_round,
    fedpower_round,
    ffalora_round,
)
from fedpower.fl.simulation import (  # noqa: F401
    ROUND_COLUMNS,
    ExperimentResult,
    RoundLog,
    run_experiment,
    sample_clients,
)
from fedpower.fl.task import Dataset, SyntheticTask  # noqa: F401
