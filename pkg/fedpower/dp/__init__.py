from fedpower.dp.mechanisms import (  # noqa: F401
    calibrate_sigma_single,
    clip_frobenius,
    gaussian_mechanism,
    noise_std,
)
from fedpower.dp.privacy_spec import Adjacency, PrivacySpec  # noqa: F401
