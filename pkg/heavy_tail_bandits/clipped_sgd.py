"""
Clipped-SGD on f(x) = (x - mu)^2 / 2 as a g(k, delta)-bounding first-order algorithm.

The step size, the clipping schedule and the bounding function g follow the
high-probability analysis of clipped-SGD for strongly convex objectives:

    gamma    = min(1 / (400 L ln(4(K+1)/delta)), ln((K+1) R^2) / (K+1))
    lambda_k = exp(-gamma (1 + k/2)) R / (120 gamma ln(4(K+1)/delta))
    g(k)     = C ln(4(K+1)/delta) ln^2((K+1) R^2) / (k+1)

where K is the optimizer horizon.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .distributions import NoiseModel, RngStream, sample_many
from .errors import PreconditionError
from .estimators import SmomConfig, clip, smom
from .logger import get_logger

logger = get_logger()

LR_MODES = ("constant", "harmonic")


@dataclass(frozen=True)
class Schedule:
    """Step-size and clipping schedule of one optimizer run."""
    horizon: int
    delta: float
    R: float = 1.0
    L: float = 1.0
    C: float = 1.0
    lr_mode: str = "constant"
    gamma: float = field(init=False)
    log_term: float = field(init=False)
    bound_constant: float = field(init=False)

    def __post_init__(self):
        if not isinstance(self.horizon, (int, np.integer)) or self.horizon < 1:
            raise PreconditionError(f"horizon must be a positive integer, got {self.horizon!r}")
        if not 0.0 < self.delta <= 1.0:
            raise PreconditionError(f"delta must lie in (0, 1], got {self.delta}")
        if not self.R > 0:
            raise PreconditionError(f"R must be positive, got {self.R}")
        if not self.L > 0:
            raise PreconditionError(f"L must be positive, got {self.L}")
        if not self.C >= 0:
            raise PreconditionError(f"C must be nonnegative, got {self.C}")
        if self.lr_mode not in LR_MODES:
            raise PreconditionError(f"lr_mode must be one of {LR_MODES}, got {self.lr_mode!r}")
        if (self.horizon + 1) * self.R ** 2 <= 1.0:
            raise PreconditionError(
                f"(horizon+1)*R^2 must exceed 1 for a positive step size, got {(self.horizon + 1) * self.R ** 2}"
            )

        log_term = math.log(4.0 * (self.horizon + 1) / self.delta)
        log_radius = math.log((self.horizon + 1) * self.R ** 2)
        gamma = min(1.0 / (400.0 * self.L * log_term), log_radius / (self.horizon + 1))
        object.__setattr__(self, 'log_term', log_term)
        object.__setattr__(self, 'gamma', gamma)
        object.__setattr__(self, 'bound_constant', self.C * log_term * log_radius ** 2)

    def step_size(self, k: int) -> float:
        if self.lr_mode == "harmonic":
            return max(self.gamma, 1.0 / (k + 1))
        return self.gamma

    def level(self, k: int) -> float:
        """Clipping level lambda_k."""
        return math.exp(-self.gamma * (1.0 + k / 2.0)) * self.R / (120.0 * self.gamma * self.log_term)


@dataclass
class OptimizerState:
    """Iterate x^k after k steps of one optimizer."""
    x: float
    k: int
    schedule: Schedule
    overruns: int = 0


def gradient_oracle(x: float, reward: float) -> float:
    """Stochastic gradient of (x - mu)^2 / 2 from one reward sample."""
    return x - reward


def clip_level(state: OptimizerState) -> float:
    return state.schedule.level(state.k)


def clipped_update(x: float, step: float, level: float, grad_estimate: float) -> float:
    return x - step * clip(grad_estimate, level)


def sgd_step(state: OptimizerState, grad_estimate: float) -> OptimizerState:
    """One clipped-SGD step. Steps past the horizon are allowed and counted as overruns."""
    schedule = state.schedule
    k = state.k
    x = clipped_update(state.x, schedule.step_size(k), schedule.level(k), grad_estimate)
    overruns = state.overruns + (1 if k + 1 > schedule.horizon else 0)
    return OptimizerState(x=x, k=k + 1, schedule=schedule, overruns=overruns)


def g_bound(k: float, schedule: Schedule) -> float:
    """Suboptimality bound after k steps."""
    if k <= -1:
        raise PreconditionError(f"g is defined for k > -1, got {k}")
    return schedule.bound_constant / (k + 1)


def g_inverse(epsilon: float, schedule: Schedule) -> float:
    """The (continuous) step count at which g falls to epsilon."""
    if not epsilon > 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    return schedule.bound_constant / epsilon - 1.0


def batch_gradient(x: float, rewards: Sequence[float], smom_cfg: SmomConfig,
                   rng: Optional[RngStream] = None) -> float:
    """SMoM aggregate of the per-sample gradients x - reward."""
    return smom([gradient_oracle(x, r) for r in rewards], smom_cfg, rng)


def log_checkpoints(horizon: int, per_decade: int = 1) -> List[int]:
    """Powers of ten (optionally subdivided) from 10 up to and including the horizon."""
    top = math.log10(horizon)
    points = np.logspace(1, top, num=max(2, int(round((top - 1) * per_decade)) + 1))
    ks = sorted({int(round(p)) for p in points if p <= horizon} | {horizon})
    return [k for k in ks if k >= 1]


def run_clipped_sgd(mu: float, x0: float, schedule: Schedule, noise: NoiseModel, rng: RngStream,
                    checkpoints: Sequence[int], smom_cfg: SmomConfig = SmomConfig(),
                    smoothing_rng: Optional[RngStream] = None) -> np.ndarray:
    """Run clipped-SGD on (x - mu)^2 / 2 and return f(x^k) - f* at each checkpoint k.

    Rewards are mu + noise; each step consumes one SMoM batch of fresh rewards.
    """
    checkpoints = sorted(int(k) for k in checkpoints)
    if not checkpoints or checkpoints[0] < 0:
        raise PreconditionError("checkpoints must be a nonempty list of nonnegative step counts")
    steps = checkpoints[-1]
    b = smom_cfg.batch_size
    rewards = (mu + sample_many(noise, rng, steps * b)).tolist()

    state = OptimizerState(x=float(x0), k=0, schedule=schedule)
    out = np.empty(len(checkpoints))
    idx = 0
    while idx < len(checkpoints) and checkpoints[idx] == 0:
        out[idx] = 0.5 * (state.x - mu) ** 2
        idx += 1
    for k in range(steps):
        batch = rewards[k * b:(k + 1) * b]
        state = sgd_step(state, batch_gradient(state.x, batch, smom_cfg, smoothing_rng))
        while idx < len(checkpoints) and checkpoints[idx] == state.k:
            out[idx] = 0.5 * (state.x - mu) ** 2
            idx += 1
    if state.overruns:
        logger.debug(f"clipped-SGD ran {state.overruns} steps past its horizon {schedule.horizon}")
    return out


def fit_loglog_slope(ks: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(ks)."""
    ks = np.asarray(ks, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(ks) != len(values) or len(ks) < 2:
        raise PreconditionError("need at least two (k, value) pairs to fit a slope")
    if np.any(ks <= 0) or np.any(values <= 0):
        raise PreconditionError("log-log fit needs strictly positive ks and values")
    slope, _ = np.polyfit(np.log(ks), np.log(values), 1)
    return float(slope)


@dataclass
class CalibrationResult:
    """Outcome of fitting the bounding constant C on pilot runs."""
    C: float
    coverage: float
    per_seed: List[float]
    checkpoints: List[int]


def calibrate_c(noise: NoiseModel, schedule: Schedule, seeds: Sequence[int],
                checkpoints: Optional[Sequence[int]] = None, mu: float = 0.0,
                x0: Optional[float] = None, smom_cfg: SmomConfig = SmomConfig()) -> CalibrationResult:
    """Smallest C such that f(x^k) - f* <= g(k) holds at every checkpoint in at least
    a (1 - delta) fraction of the pilot seeds.

    C does not influence the iterates, so each seed is run once and its own minimal C
    is max_k (f(x^k) - f*) (k+1) / (ln(4(K+1)/delta) ln^2((K+1)R^2)).
    """
    if not seeds:
        raise PreconditionError("calibration needs at least one pilot seed")
    checkpoints = list(checkpoints) if checkpoints else log_checkpoints(schedule.horizon)
    if min(checkpoints) < 1:
        raise PreconditionError("calibration checkpoints must be positive step counts")
    start = mu + schedule.R if x0 is None else x0
    unit = Schedule(horizon=schedule.horizon, delta=schedule.delta, R=schedule.R, L=schedule.L,
                    C=1.0, lr_mode=schedule.lr_mode)
    ks = np.asarray(checkpoints, dtype=float)
    per_seed = []
    for seed in seeds:
        subopt = run_clipped_sgd(mu, start, schedule, noise, RngStream(seed, 0), checkpoints, smom_cfg,
                                 RngStream(seed, 1))
        per_seed.append(float(np.max(subopt * (ks + 1) / unit.bound_constant)))

    ordered = sorted(per_seed)
    needed = max(1, math.ceil((1.0 - schedule.delta) * len(ordered)))
    c_value = ordered[needed - 1]
    coverage = sum(1 for c in per_seed if c <= c_value) / len(per_seed)
    logger.debug(f"calibrated C={c_value:.6g} covering {coverage:.1%} of {len(per_seed)} pilot seeds")
    return CalibrationResult(C=c_value, coverage=coverage, per_seed=per_seed, checkpoints=checkpoints)
