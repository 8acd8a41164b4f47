"""Clipped-SGD-UCB: per-arm clipped-SGD on (x - mu_i)^2 / 2 with SMoM batch gradients."""

from typing import List, Optional, Sequence

from ..clipped_sgd import OptimizerState, batch_gradient, sgd_step
from ..distributions import RngStream
from ..estimators import median
from ..logger import get_logger
from .base import ArmState, BanditPolicy
from .config import DeltaRule, PolicyConfig
from .indices import fo_ucb_index, resolve_delta

logger = get_logger()


class ClippedSgdUcbPolicy(BanditPolicy):
    """SGD-UCB (m=0, n=1), SGD-UCB-Median (m=1, n=1) and SGD-UCB-SMoM (m=1, n=2).

    Arms start from the median of their p initialization rewards, counted as the first
    optimizer step. Each round plays the chosen arm b = (2m+1)n times and takes one
    clipped-SGD step on the SMoM of the per-sample gradients.
    """

    def __init__(self, config: PolicyConfig, n_arms: int, horizon: int, rng: Optional[RngStream] = None):
        super().__init__(config, n_arms, horizon, rng)
        # per-round confidence only moves the index; the schedule keeps a fixed delta
        rule = self.delta_rule
        if rule == DeltaRule.PER_ROUND:
            rule = DeltaRule.ONE_OVER_T_TPLUS1
        self.schedule = config.schedule.build(horizon, resolve_delta(rule, horizon, horizon, config.delta))
        logger.debug(
            f"{self.name}: b={self.batch_size}, gamma={self.schedule.gamma:.4g}, "
            f"lambda_1={self.schedule.level(1):.4g}, lr_mode={self.schedule.lr_mode}"
        )

    def _init_arm(self, arm: int, rewards: List[float]) -> ArmState:
        x = median(rewards)
        optimizer = OptimizerState(x=x, k=1, schedule=self.schedule)
        return ArmState(index=arm, x=x, pulls=1, total_samples=len(rewards), optimizer=optimizer)

    def _observe(self, state: ArmState, rewards: Sequence[float]):
        grad = batch_gradient(state.x, rewards, self.config.smom, self.rng)
        state.optimizer = sgd_step(state.optimizer, grad)
        state.x = state.optimizer.x
        state.pulls += 1

    def _index(self, state: ArmState, delta: float) -> float:
        return fo_ucb_index(state, self.schedule, delta)
