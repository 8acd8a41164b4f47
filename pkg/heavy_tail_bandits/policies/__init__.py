"""Bandit policies behind one interface."""

from typing import Optional

from ..distributions import RngStream
from ..errors import PreconditionError
from .base import ArmState, BanditPolicy, RewardFeed
from .baselines import RucbMedianPolicy, VanillaUcbPolicy
from .clipped_sgd_ucb import ClippedSgdUcbPolicy
from .config import (
    NAMED_VARIANTS,
    DeltaRule,
    PolicyConfig,
    PolicyFamily,
    RucbParams,
    ScheduleParams,
    canonical_name,
    named_policy,
)
from .generic import BoundFn, GenericFoUcbPolicy, GenericZoUcbPolicy, StepFn
from .indices import (
    fo_ucb_index,
    resolve_delta,
    rucb_block_count,
    rucb_median_index,
    vanilla_ucb_index,
    zo_ucb_index,
)

_FAMILIES = {
    PolicyFamily.CLIPPED_SGD_UCB: ClippedSgdUcbPolicy,
    PolicyFamily.VANILLA_UCB: VanillaUcbPolicy,
    PolicyFamily.RUCB_MEDIAN: RucbMedianPolicy,
}


def make_policy(config: PolicyConfig, n_arms: int, horizon: int, rng: Optional[RngStream] = None,
                step: Optional[StepFn] = None, g: Optional[BoundFn] = None) -> BanditPolicy:
    """Instantiate the policy selected by `config.family`.

    The generic templates need the optimizer as a (step, g) function pair.
    """
    if config.family == PolicyFamily.GENERIC_FO_UCB:
        return GenericFoUcbPolicy(config, n_arms, horizon, rng, step=step, g=g)
    if config.family == PolicyFamily.GENERIC_ZO_UCB:
        return GenericZoUcbPolicy(config, n_arms, horizon, rng, step=step, g=g)
    policy_cls = _FAMILIES.get(config.family)
    if policy_cls is None:
        raise PreconditionError(f"unknown policy family {config.family!r}")
    return policy_cls(config, n_arms, horizon, rng)


def init_policy(config: PolicyConfig, n_arms: int, horizon: int, env_feed: RewardFeed,
                rng: Optional[RngStream] = None, **optimizer) -> BanditPolicy:
    """Build a policy and run its initialization pulls through `env_feed`."""
    policy = make_policy(config, n_arms, horizon, rng, **optimizer)
    policy.initialize(env_feed)
    return policy


__all__ = [
    "ArmState", "BanditPolicy", "BoundFn", "ClippedSgdUcbPolicy", "DeltaRule", "GenericFoUcbPolicy",
    "GenericZoUcbPolicy", "NAMED_VARIANTS", "PolicyConfig", "PolicyFamily", "RewardFeed",
    "RucbMedianPolicy", "RucbParams", "ScheduleParams", "StepFn", "VanillaUcbPolicy", "canonical_name",
    "fo_ucb_index", "init_policy", "make_policy", "named_policy", "resolve_delta", "rucb_block_count",
    "rucb_median_index", "vanilla_ucb_index", "zo_ucb_index",
]
