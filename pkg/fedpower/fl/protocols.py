from dataclasses import dataclass

import numpy as np

from fedpower import throw
from fedpower.dp import clip_frobenius, gaussian_mechanism, noise_std
from fedpower.exceptions import ShapeError
from fedpower.factorize import LoRAPair, private_factorizer
from fedpower.linalg import Purpose, frobenius_norm
from fedpower.utils import debug_enabled


@dataclass(frozen=True)
class AggregationStats:
    cohort: int
    noise_std: float
    refactored: bool = False
    deficient: int = 0


def _require_cohort(client_pairs):
    if not client_pairs:
        throw("a server round needs at least one sampled client")


def _privatize(mean, spec, cohort, rng, debug):
    gate = spec.clip if debug else None
    sensitivity = spec.sensitivity(cohort)
    return gaussian_mechanism(mean, sensitivity, spec.sigma, rng, gate=gate)


def fedlora_round(client_pairs, global_pair, spec, rng, debug=None):
    """Clip each A_i and B_i to C, average component-wise, add N(0, (sigma C)^2)."""
    _require_cohort(client_pairs)
    debug = debug_enabled(debug)
    cohort = len(client_pairs)
    mean_a = np.mean([clip_frobenius(p.a, spec.clip) for p in client_pairs], axis=0)
    mean_b = np.mean([clip_frobenius(p.b, spec.clip) for p in client_pairs], axis=0)
    a = _privatize(mean_a, spec, cohort, rng.child(Purpose.NOISE_A), debug)
    b = _privatize(mean_b, spec, cohort, rng.child(Purpose.NOISE_B), debug)
    return LoRAPair(a=a, b=b), AggregationStats(cohort, noise_std(spec, cohort))


def ffalora_round(client_pairs, frozen_a, global_b, spec, rng, debug=None):
    """Aggregate B only; A stays the frozen initialization."""
    _require_cohort(client_pairs)
    debug = debug_enabled(debug)
    cohort = len(client_pairs)
    if global_b.shape[1] != frozen_a.shape[0]:
        throw("global B does not match the frozen A", ShapeError)
    mean_b = np.mean([clip_frobenius(p.b, spec.clip) for p in client_pairs], axis=0)
    b = _privatize(mean_b, spec, cohort, rng.child(Purpose.NOISE_B), debug)
    return b, AggregationStats(cohort, noise_std(spec, cohort))


def aggregate_products(client_pairs, clip):
    """(1/|C|) sum_i clip(B_i A_i, C): the mean of clipped products."""
    _require_cohort(client_pairs)
    return np.mean([clip_frobenius(p.merged(), clip) for p in client_pairs], axis=0)


def fedpower_round(client_pairs, global_pair, spec, k, refactor_now, rng,
                   noise_scheme="powerdp", debug=None):
    """Merge, clip and average client updates, then refactor through the private factorizer.

    Rounds that skip refactorization aggregate like FedLoRA with the same sigma.
    """
    if not refactor_now:
        return fedlora_round(client_pairs, global_pair, spec, rng, debug=debug)

    cohort = len(client_pairs)
    aggregate = aggregate_products(client_pairs, spec.clip)
    if spec.clipping_enabled:
        c_w = spec.clip
        # the factorizer scales noise by c_w; fold tight sensitivity into sigma
        sigma = spec.sigma * spec.sensitivity(cohort) / spec.clip
    else:
        norm = frobenius_norm(aggregate)
        c_w = norm if norm > 0 else 1.0
        sigma = 0.0
    factorize = private_factorizer(noise_scheme)
    kwargs = {"debug": debug} if noise_scheme == "powerdp" else {}
    pair = factorize(aggregate, global_pair.rank, k, sigma, c_w, rng, **kwargs)
    stats = AggregationStats(cohort, noise_std(spec, cohort), refactored=True, deficient=pair.deficient)
    return pair, stats
