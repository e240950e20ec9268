"""Renyi-DP of the Poisson-subsampled Gaussian mechanism.

Numerics follow the standard log-space series: integer orders sum a binomial
expansion, fractional orders split the integral at z0 and sum both tails.
"""

import math

import numpy as np
from scipy import special

from fedpower.exceptions import DomainError
from fedpower.utils import logger

_MAX_STEPS_LOG_A_FRAC = 1000


def _log_add(logx, logy):
    a, b = min(logx, logy), max(logx, logy)
    if a == -np.inf:
        return b
    return math.log1p(math.exp(a - b)) + b


def _log_comb(n, k):
    return special.gammaln(n + 1) - special.gammaln(k + 1) - special.gammaln(n - k + 1)


def _log_erfc(x):
    return math.log(2) + special.log_ndtr(-x * 2 ** 0.5)


def _compute_log_a_int(q, sigma, alpha):
    i = np.arange(alpha + 1, dtype=np.float64)
    log_terms = (
        _log_comb(alpha, i)
        + i * math.log(q)
        + (alpha - i) * math.log1p(-q)
        + (i * i - i) / (2 * sigma ** 2)
    )
    return float(special.logsumexp(log_terms))


def _compute_log_a_frac(q, sigma, alpha):
    log_a0, log_a1 = -np.inf, -np.inf
    z0 = sigma ** 2 * math.log(1 / q - 1) + 0.5
    log1mq = math.log1p(-q)
    last_s0 = last_s1 = -np.inf

    for i in range(_MAX_STEPS_LOG_A_FRAC):
        log_coef = _log_comb(alpha, i)
        j = alpha - i

        log_t0 = log_coef + i * math.log(q) + j * log1mq
        log_t1 = log_coef + j * math.log(q) + i * log1mq

        log_e0 = math.log(0.5) + _log_erfc((i - z0) / (math.sqrt(2) * sigma))
        log_e1 = math.log(0.5) + _log_erfc((z0 - j) / (math.sqrt(2) * sigma))

        log_s0 = log_t0 + (i * i - i) / (2 * sigma ** 2) + log_e0
        log_s1 = log_t1 + (j * j - j) / (2 * sigma ** 2) + log_e1

        log_a0 = _log_add(log_a0, log_s0)
        log_a1 = _log_add(log_a1, log_s1)
        total = _log_add(log_a0, log_a1)

        if log_s0 < last_s0 and log_s1 < last_s1 and max(log_s0, log_s1) < total - 30:
            return float(total)
        last_s0, last_s1 = log_s0, log_s1

    logger("accountant").warning(
        f"fractional-order series did not converge (q={q}, sigma={sigma}, alpha={alpha}); "
        "dropping the order"
    )
    return np.inf


def _compute_log_a(q, sigma, alpha):
    if float(alpha).is_integer():
        return _compute_log_a_int(q, sigma, int(alpha))
    return _compute_log_a_frac(q, sigma, alpha)


def step_rdp(sigma, q, orders):
    """Per-order RDP of one Poisson-subsampled Gaussian step.

    q == 0 costs nothing; sigma == 0 is an unbounded loss and yields inf at
    every order.
    """
    if not 0 <= q <= 1:
        raise DomainError(f"sampling rate must lie in [0, 1], got {q}")
    if sigma < 0:
        raise DomainError(f"sigma must be non-negative, got {sigma}")

    def one_order(alpha):
        if q == 0:
            return 0.0
        if sigma == 0 or math.isinf(alpha):
            return np.inf
        if q == 1:
            return alpha / (2 * sigma ** 2)
        return _compute_log_a(q, sigma, alpha) / (alpha - 1)

    return np.array([one_order(float(a)) for a in orders], dtype=np.float64)
