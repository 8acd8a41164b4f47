"""Upper confidence indices: estimate plus a confidence radius."""

import math
from typing import Optional, Sequence

from ..clipped_sgd import Schedule, g_bound
from ..errors import PreconditionError
from ..estimators import median_of_means
from .config import DeltaRule


def resolve_delta(rule: DeltaRule, horizon: int, t: int, fixed: Optional[float] = None) -> float:
    """Confidence level for horizon T at raw pull count t."""
    if rule == DeltaRule.PER_ROUND:
        return 1.0 / max(t, 1) ** 2
    if rule == DeltaRule.ONE_OVER_T2:
        return 1.0 / horizon ** 2
    if rule == DeltaRule.ONE_OVER_T_TPLUS1:
        return 1.0 / (horizon * (horizon + 1))
    if fixed is None:
        raise PreconditionError("a fixed delta rule needs a delta value")
    return fixed


def g_at(pulls: float, schedule: Schedule, delta: Optional[float] = None) -> float:
    """g(pulls, delta) for the schedule; a delta other than the schedule's only changes the log factor."""
    if delta is None or delta == schedule.delta:
        return g_bound(pulls, schedule)
    scale = math.log(4.0 * (schedule.horizon + 1) / delta) / schedule.log_term
    return g_bound(pulls, schedule) * scale


def fo_ucb_index(arm, schedule: Schedule, delta: Optional[float] = None) -> float:
    """First-order index x + sqrt(2 g(n, delta))."""
    if arm.pulls < 1:
        raise PreconditionError("first-order index needs at least one optimizer step")
    return arm.x + math.sqrt(2.0 * g_at(arm.pulls, schedule, delta))


def zo_ucb_index(arm, g_value: float) -> float:
    """Zero-order index x + g(n, delta)."""
    if g_value < 0:
        raise PreconditionError(f"g must be nonnegative, got {g_value}")
    return arm.x + g_value


def vanilla_ucb_index(mean: float, n: int, t: int, v: float = 1.0, delta: Optional[float] = None) -> float:
    """mean + sqrt(2 v ln(1/delta) / n); delta defaults to 1/t^2."""
    if n < 1 or t < 1:
        raise PreconditionError(f"vanilla UCB needs n >= 1 and t >= 1, got n={n}, t={t}")
    if delta is None:
        delta = 1.0 / t ** 2
    return mean + math.sqrt(2.0 * v * math.log(1.0 / delta) / n)


def rucb_block_count(delta: float, n: int) -> int:
    """Odd block count 1 + floor(3.5 ln(1/delta)), capped by the odd part of n."""
    raw = 1 + int(math.floor(3.5 * math.log(1.0 / delta)))
    if raw % 2 == 0:
        raw += 1
    cap = n if n % 2 else n - 1
    return max(1, min(raw, cap))


def rucb_radius(n: int, delta: float, alpha: float, v: float, c: float) -> float:
    return v ** (1.0 / alpha) * (c * math.log(1.0 / delta) / n) ** (alpha / (1.0 + alpha))


def rucb_median_index(arm_samples: Sequence[float], n: int, delta: float,
                      alpha: float = 1.0, v: float = 1.0, c: float = 1.0) -> float:
    """Median-of-means estimate over all stored samples plus the robust radius."""
    if n < 1 or len(arm_samples) < 1:
        raise PreconditionError("robust UCB index needs at least one sample")
    blocks = rucb_block_count(delta, len(arm_samples))
    return median_of_means(arm_samples, blocks) + rucb_radius(n, delta, alpha, v, c)
