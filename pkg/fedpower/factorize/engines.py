import math

import numpy as np

from fedpower.exceptions import ContractError, ShapeError, ValidationError
from fedpower.factorize.lora_pair import LoRAPair
from fedpower.linalg import (
    Purpose,
    as_matrix,
    frobenius_norm,
    gaussian_matrix,
    orthonormalize_columns,
    orthonormalize_rows,
)
from fedpower.utils import debug_enabled, logger

# label for the per-iteration orthonormalization streams
_SWEEP = 100


def _check_rank(w, r, k):
    m, n = w.shape
    if not 1 <= r <= min(m, n):
        raise ShapeError(f"rank {r} is outside [1, {min(m, n)}] for a {w.shape} matrix")
    if k < 1:
        raise ValidationError(f"need at least one power iteration, got {k}")


def _check_norm(w, c_w):
    if not c_w > 0:
        raise ValidationError(f"norm bound must be positive, got {c_w}")
    norm = frobenius_norm(w)
    if norm > c_w + 1e-9:
        raise ContractError(f"input norm {norm:.6g} exceeds the bound {c_w:.6g}; clip first")


def _subspace_iteration(w, r, k, rng, c_w=None, debug=False):
    """k sweeps of P = W Q^T, orthonormalize P, A = P^T W, Q = orth rows of A.

    Returns (A, Q, deficient) from the last sweep. Both factorizers share this
    loop so that zero noise reproduces the clean result bit for bit.
    """
    m, n = w.shape
    q = gaussian_matrix(r, n, 1.0, rng.child(Purpose.INIT))
    deficient = 0
    a = None
    for sweep in range(k):
        stream = rng.child(_SWEEP, sweep)
        p, flags_p = orthonormalize_columns(w @ q.T, rng=stream.child(0))
        a = p.T @ w
        q, flags_q = orthonormalize_rows(a, rng=stream.child(1))
        deficient += len(flags_p) + len(flags_q)
        if debug and c_w is not None:
            _check_projection(w, p, q, c_w)
    return a, q, deficient


def _check_projection(w, p, q, c_w):
    left, right = frobenius_norm(p.T @ w), frobenius_norm(w @ q.T)
    if left > c_w + 1e-9 or right > c_w + 1e-9:
        raise ContractError(
            f"projection norms {left:.6g}, {right:.6g} exceed the bound {c_w:.6g}"
        )


def power_iteration(w, r, k, rng):
    """Rank-r factorization W ~ B A with orthonormal rows in A."""
    w = as_matrix(w, "W")
    _check_rank(w, r, k)
    _, q, deficient = _subspace_iteration(w, r, k, rng)
    return LoRAPair(a=q, b=w @ q.T, deficient=deficient)


def power_dp(w, r, k, sigma, c_w, rng, debug=None):
    """PowerDP: subspace iteration with noise injected before the last orthonormalization.

    B~ = W Q^T + N(0, sigma^2 c_w^2) uses the clean Q; A~ = A + N(0, sigma^2 c_w^2)
    is orthonormalized afterwards, so B~ is not W A~^T.
    """
    w = as_matrix(w, "W")
    _check_rank(w, r, k)
    _check_norm(w, c_w)
    debug = debug_enabled(debug)

    a, q, deficient = _subspace_iteration(w, r, k, rng, c_w=c_w, debug=debug)
    m, n = w.shape
    std = sigma * c_w
    b_noisy = w @ q.T
    a_noisy = a
    if std > 0:
        b_noisy = b_noisy + gaussian_matrix(m, r, std, rng.child(Purpose.NOISE_B))
        a_noisy = a_noisy + gaussian_matrix(r, n, std, rng.child(Purpose.NOISE_A))
    # same refill stream as the last sweep, so sigma == 0 matches power_iteration exactly
    a_final, flags = orthonormalize_rows(a_noisy, rng=rng.child(_SWEEP, k - 1, 1))
    return LoRAPair(a=a_final, b=b_noisy, deficient=deficient + len(flags))


def factorize_input_perturb(w, r, k, sigma, c_w, rng):
    """Gaussian noise on W, then clean power iteration (post-processing)."""
    w = as_matrix(w, "W")
    _check_rank(w, r, k)
    _check_norm(w, c_w)
    std = sigma * c_w
    if std > 0:
        w = w + gaussian_matrix(w.shape[0], w.shape[1], std, rng.child(Purpose.NOISE_INPUT))
    return power_iteration(w, r, k, rng)


def output_sensitivities(r, c_w):
    """Worst-case (A, B) output sensitivities: a basis flip and a norm-c_w swing."""
    return 2.0 * math.sqrt(r), 2.0 * c_w


def factorize_output_perturb(w, r, k, sigma, c_w, rng):
    """Clean power iteration, then Gaussian noise on A and B with no re-orthonormalization."""
    w = as_matrix(w, "W")
    _check_rank(w, r, k)
    _check_norm(w, c_w)
    pair = power_iteration(w, r, k, rng)
    if sigma == 0:
        return pair
    delta_a, delta_b = output_sensitivities(r, c_w)
    logger("factorize").debug(f"output perturbation sensitivities A={delta_a:.4g} B={delta_b:.4g}")
    m, n = pair.shape
    a = pair.a + gaussian_matrix(r, n, sigma * delta_a, rng.child(Purpose.NOISE_A))
    b = pair.b + gaussian_matrix(m, r, sigma * delta_b, rng.child(Purpose.NOISE_B))
    return LoRAPair(a=a, b=b, deficient=pair.deficient)


FACTORIZERS = {
    "powerdp": power_dp,
    "input": factorize_input_perturb,
    "output": factorize_output_perturb,
}


def private_factorizer(scheme):
    try:
        return FACTORIZERS[scheme]
    except KeyError:
        raise ValidationError(
            f"unknown noise scheme {scheme!r}; expected one of {sorted(FACTORIZERS)}"
        ) from None


def reconstruction_error(w, pair):
    return float(np.linalg.norm(np.asarray(w) - pair.merged()))

