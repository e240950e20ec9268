from fedpower.accountant.accountant import (  # noqa: F401
    AccountantState,
    certify,
    compose,
    effective_rate,
    epsilon_for,
    rdp_to_dp,
    required_sigma,
)
from fedpower.accountant.rdp import step_rdp  # noqa: F401
