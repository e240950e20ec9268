from fedpower.factorize.engines import (  # noqa: F401
    FACTORIZERS,
    factorize_input_perturb,
    factorize_output_perturb,
    output_sensitivities,
    power_dp,
    power_iteration,
    private_factorizer,
    reconstruction_error,
)
from fedpower.factorize.lora_pair import LoRAPair  # noqa: F401
