"""FO-UCB / ZO-UCB templates around any externally supplied g-bounded optimizer."""

import math
from typing import Callable, List, Optional, Sequence

from ..distributions import RngStream
from ..errors import PreconditionError
from ..estimators import median
from .base import ArmState, BanditPolicy
from .config import PolicyConfig
from .indices import zo_ucb_index

# step(x, k, rewards) -> next iterate; g(k, delta) -> suboptimality bound after k steps
StepFn = Callable[[float, int, Sequence[float]], float]
BoundFn = Callable[[int, float], float]


class _TemplatePolicy(BanditPolicy):
    def __init__(self, config: PolicyConfig, n_arms: int, horizon: int, rng: Optional[RngStream] = None,
                 step: Optional[StepFn] = None, g: Optional[BoundFn] = None):
        if step is None or g is None:
            raise PreconditionError(f"{type(self).__name__} needs both a step function and a g function")
        super().__init__(config, n_arms, horizon, rng)
        self.step_fn = step
        self.g_fn = g

    def _init_arm(self, arm: int, rewards: List[float]) -> ArmState:
        return ArmState(index=arm, x=median(rewards), pulls=1, total_samples=len(rewards))

    def _observe(self, state: ArmState, rewards: Sequence[float]):
        state.x = float(self.step_fn(state.x, state.pulls, rewards))
        state.pulls += 1


class GenericFoUcbPolicy(_TemplatePolicy):
    """Index x + sqrt(2 g(n, delta)) for a first-order optimizer."""

    def _index(self, state: ArmState, delta: float) -> float:
        g_value = self.g_fn(state.pulls, delta)
        if g_value < 0:
            raise PreconditionError(f"g must be nonnegative, got {g_value}")
        return state.x + math.sqrt(2.0 * g_value)


class GenericZoUcbPolicy(_TemplatePolicy):
    """Index x + g(n, delta) for a zero-order optimizer."""

    def _index(self, state: ArmState, delta: float) -> float:
        return zo_ucb_index(state, self.g_fn(state.pulls, delta))
