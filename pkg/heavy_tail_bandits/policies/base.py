"""Common machinery of index policies."""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from ..clipped_sgd import OptimizerState
from ..distributions import RngStream
from ..errors import PreconditionError
from .config import DeltaRule, PolicyConfig
from .indices import resolve_delta

RewardFeed = Callable[[int], float]


@dataclass
class ArmState:
    """Per-arm estimate and bookkeeping.

    `pulls` counts estimator updates (optimizer steps for SGD-based policies, samples for
    the baselines); `total_samples` counts raw rewards drawn, initialization included.
    """
    index: int
    x: float
    pulls: int
    total_samples: int
    ucb: float = float("inf")
    optimizer: Optional[OptimizerState] = None
    reward_sum: float = 0.0
    samples: Optional[List[float]] = None


class BanditPolicy(ABC):
    """An index policy: initialize, then alternate select_arm / update."""

    def __init__(self, config: PolicyConfig, n_arms: int, horizon: int, rng: Optional[RngStream] = None):
        if n_arms < 2:
            raise PreconditionError(f"a bandit needs at least 2 arms, got {n_arms}")
        if horizon < 1:
            raise PreconditionError(f"horizon must be positive, got {horizon}")
        self.config = config
        self.n_arms = n_arms
        self.horizon = horizon
        self.rng = rng
        self.arms: List[ArmState] = []
        self.ucbs: List[float] = []
        self.t = 0
        self.rounds = 0
        self.delta_rule = config.effective_delta_rule

    @property
    def name(self) -> str:
        return self.config.display_name

    @property
    def batch_size(self) -> int:
        return self.config.batch_size

    @property
    def init_pulls(self) -> int:
        return self.n_arms * self.config.p

    @property
    def initialized(self) -> bool:
        return len(self.arms) == self.n_arms

    def current_delta(self) -> float:
        return resolve_delta(self.delta_rule, self.horizon, self.t, self.config.delta)

    def initialize(self, env_feed: RewardFeed):
        """Pull every arm p times (arm by arm) and build the initial estimates."""
        if self.initialized:
            raise PreconditionError("policy is already initialized")
        p = self.config.p
        for arm in range(self.n_arms):
            rewards = [env_feed(arm) for _ in range(p)]
            self.t += p
            self.arms.append(self._init_arm(arm, rewards))
        self.ucbs = [0.0] * self.n_arms
        self._refresh_all()

    def select_arm(self) -> int:
        """Arm with the largest cached index; ties go to the lowest arm index."""
        if not self.initialized:
            raise PreconditionError("select_arm called before initialize")
        ucbs = self.ucbs
        return ucbs.index(max(ucbs))

    def update(self, arm: int, rewards: Sequence[float]):
        """Feed the rewards of one round to `arm` and refresh indices."""
        if len(rewards) != self.batch_size:
            raise PreconditionError(f"{self.name} expects batches of {self.batch_size} rewards, got {len(rewards)}")
        if not 0 <= arm < self.n_arms:
            raise PreconditionError(f"arm index {arm} out of range")
        self.t += len(rewards)
        self.rounds += 1
        state = self.arms[arm]
        self._observe(state, rewards)
        state.total_samples += len(rewards)
        if self.delta_rule == DeltaRule.PER_ROUND:
            self._refresh_all()
        else:
            self._refresh(state)

    def pull_counts(self) -> List[int]:
        return [arm.pulls for arm in self.arms]

    def overruns(self) -> int:
        return sum(arm.optimizer.overruns for arm in self.arms if arm.optimizer is not None)

    def _refresh(self, state: ArmState, delta: Optional[float] = None):
        state.ucb = self._index(state, self.current_delta() if delta is None else delta)
        self.ucbs[state.index] = state.ucb

    def _refresh_all(self):
        delta = self.current_delta()
        for state in self.arms:
            self._refresh(state, delta)

    @abstractmethod
    def _init_arm(self, arm: int, rewards: List[float]) -> ArmState:
        """Initial state of `arm` from its p initialization rewards."""

    @abstractmethod
    def _observe(self, state: ArmState, rewards: Sequence[float]):
        """Update the estimate of one arm."""

    @abstractmethod
    def _index(self, state: ArmState, delta: float) -> float:
        """Index of one arm at confidence level delta."""
