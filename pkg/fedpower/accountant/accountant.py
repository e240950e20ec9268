import math
from dataclasses import dataclass, field

import numpy as np

from fedpower import hooks
from fedpower.accountant.rdp import step_rdp
from fedpower.exceptions import DomainError
from fedpower.utils import logger


@dataclass(frozen=True)
class AccountantState:
    orders: tuple = tuple(hooks.default_orders)
    rdp: tuple = field(default=None)
    steps: int = 0

    def __post_init__(self):
        orders = tuple(float(a) for a in self.orders)
        if any(a <= 1 for a in orders):
            raise DomainError("Renyi orders must exceed 1")
        object.__setattr__(self, "orders", orders)
        rdp = (0.0,) * len(orders) if self.rdp is None else tuple(float(v) for v in self.rdp)
        if len(rdp) != len(orders):
            raise DomainError("rdp and orders differ in length")
        object.__setattr__(self, "rdp", rdp)

    def as_rows(self):
        return [{"order": a, "rdp": v} for a, v in zip(self.orders, self.rdp)]


def compose(state, step, T):
    """Add T copies of the per-order `step` RDP to `state`."""
    if T < 0:
        raise DomainError(f"round count must be non-negative, got {T}")
    step = np.asarray(step, dtype=np.float64)
    if step.shape != (len(state.orders),):
        raise DomainError("step RDP does not match the state's order grid")
    if T == 0:
        return state
    rdp = np.asarray(state.rdp) + T * step
    return AccountantState(orders=state.orders, rdp=tuple(rdp), steps=state.steps + T)


def rdp_to_dp(state, delta):
    """(epsilon, optimal order) via eps = min_a rdp(a) + ln(1/delta) / (a - 1)."""
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")
    orders = np.asarray(state.orders)
    rdp = np.asarray(state.rdp)
    eps = rdp + math.log(1 / delta) / (orders - 1)
    if not np.any(np.isfinite(eps)):
        return math.inf, None
    best = int(np.argmin(eps))
    return float(max(0.0, eps[best])), float(orders[best])


def epsilon_for(sigma, q, T, delta, orders=hooks.default_orders):
    state = compose(AccountantState(orders=orders), step_rdp(sigma, q, orders), T)
    return rdp_to_dp(state, delta)[0]


def required_sigma(epsilon, delta, q, T, orders=hooks.default_orders,
                   bracket=hooks.sigma_search_bracket, rtol=hooks.sigma_search_rtol):
    """Smallest sigma (to `rtol`) whose T-fold composition at rate q stays within epsilon."""
    if not epsilon > 0 or not T > 0 or not q > 0:
        raise DomainError("epsilon, q and T must be positive")
    if not 0 < delta < 1:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")

    lo, hi = bracket
    if epsilon_for(hi, q, T, delta, orders) > epsilon:
        raise DomainError(
            f"epsilon={epsilon} is unreachable with sigma <= {hi} (q={q}, T={T}, delta={delta})"
        )
    if epsilon_for(lo, q, T, delta, orders) <= epsilon:
        logger("accountant").warning(f"epsilon={epsilon} already met at the bracket floor sigma={lo}")
        return lo

    # geometric bisection: the invariant is eps(lo) > epsilon >= eps(hi)
    while hi / lo > 1 + rtol:
        mid = math.sqrt(lo * hi)
        if epsilon_for(mid, q, T, delta, orders) > epsilon:
            lo = mid
        else:
            hi = mid
    return hi


def effective_rate(q_c, q_s, adjacency):
    """Per-round inclusion probability of the protected unit."""
    return q_c if str(getattr(adjacency, "value", adjacency)) == "client" else q_c * q_s


def certify(sigma, q, T, delta, orders=hooks.default_orders):
    """(epsilon, optimal order) certified for T rounds at (sigma, q); nothing released costs 0."""
    if T == 0:
        return 0.0, None
    if sigma == 0:
        return math.inf, None
    state = compose(AccountantState(orders=orders), step_rdp(sigma, q, orders), T)
    return rdp_to_dp(state, delta)
