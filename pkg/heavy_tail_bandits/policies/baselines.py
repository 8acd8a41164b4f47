"""Baseline policies: vanilla UCB and Robust UCB with a median-of-means estimator."""

from typing import List, Sequence

from ..estimators import median
from .base import ArmState, BanditPolicy
from .indices import rucb_median_index, rucb_radius, vanilla_ucb_index


class VanillaUcbPolicy(BanditPolicy):
    """UCB on the running empirical mean. Initialization rewards count as samples."""

    def _init_arm(self, arm: int, rewards: List[float]) -> ArmState:
        total = float(sum(rewards))
        return ArmState(index=arm, x=total / len(rewards), pulls=len(rewards),
                        total_samples=len(rewards), reward_sum=total)

    def _observe(self, state: ArmState, rewards: Sequence[float]):
        state.reward_sum += rewards[0]
        state.pulls += 1
        state.x = state.reward_sum / state.pulls

    def _index(self, state: ArmState, delta: float) -> float:
        return vanilla_ucb_index(state.x, state.pulls, max(self.t, 1), self.config.ucb_v, delta)


class RucbMedianPolicy(BanditPolicy):
    """Robust UCB: median of means over every stored sample of the arm.

    All samples are kept and re-blocked on each recompute, so the per-round cost grows
    with the arm's sample count.
    """

    def _init_arm(self, arm: int, rewards: List[float]) -> ArmState:
        samples = list(rewards)
        return ArmState(index=arm, x=median(samples), pulls=len(samples),
                        total_samples=len(samples), samples=samples)

    def _observe(self, state: ArmState, rewards: Sequence[float]):
        state.samples.append(rewards[0])
        state.pulls += 1

    def _index(self, state: ArmState, delta: float) -> float:
        params = self.config.rucb
        ucb = rucb_median_index(state.samples, state.pulls, delta, params.alpha, params.v, params.c)
        state.x = ucb - rucb_radius(state.pulls, delta, params.alpha, params.v, params.c)
        return ucb
