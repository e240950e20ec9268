import math

from fedpower.exceptions import ContractError, DomainError, ValidationError
from fedpower.linalg import as_matrix, frobenius_norm, gaussian_matrix


def clip_frobenius(m, c):
    """Scale `m` by min(1, c / ||m||_F)."""
    if not c > 0:
        raise ValidationError(f"clip threshold must be positive, got {c}")
    m = as_matrix(m)
    norm = frobenius_norm(m)
    if math.isinf(c) or norm <= c:
        return m.copy()
    clipped = m * (c / norm)
    # rounding can leave the result a hair above c
    overshoot = frobenius_norm(clipped)
    if overshoot > c:
        clipped = clipped * (c / overshoot)
    return clipped


def gaussian_mechanism(m, sensitivity, sigma, rng, gate=None):
    """m + N(0, (sigma * sensitivity)^2) entrywise.

    sigma == 0 returns an exact copy. With `gate` set, the input norm is
    checked against it before any noise is drawn.
    """
    if sigma < 0:
        raise ValidationError(f"sigma must be non-negative, got {sigma}")
    m = as_matrix(m)
    if gate is not None and math.isfinite(gate) and frobenius_norm(m) > gate + 1e-9:
        raise ContractError(
            f"aggregate norm {frobenius_norm(m):.6g} exceeds its declared bound {gate:.6g}"
        )
    if sigma == 0:
        return m.copy()
    if not sensitivity > 0 or math.isinf(sensitivity):
        raise ValidationError(f"sensitivity must be positive and finite, got {sensitivity}")
    return m + gaussian_matrix(m.shape[0], m.shape[1], sigma * sensitivity, rng)


def calibrate_sigma_single(epsilon0, delta0):
    """Smallest sigma giving (epsilon0, delta0)-DP for one Gaussian release."""
    if not epsilon0 > 0:
        raise DomainError(f"epsilon must be positive, got {epsilon0}")
    if not 0 < delta0 < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta0}")
    return math.sqrt(2.0 * math.log(1.25 / delta0)) / epsilon0


def noise_std(spec, cohort_size):
    """Per-entry noise std a protocol round adds to an aggregate."""
    if not spec.is_private:
        return 0.0
    return spec.sigma * spec.sensitivity(cohort_size)
