"""
Trial execution and cross-trial aggregation.

A trial owns its RNG streams: arm i samples from RngStream(seed, i) and the policy's
internal randomness comes from RngStream(seed, POLICY_STREAM_ID). Trials are keyed by
index, so running them in a process pool gives the same report as running them inline.
"""

import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .clipped_sgd import CalibrationResult, Schedule, calibrate_c, fit_loglog_slope, log_checkpoints, run_clipped_sgd
from .distributions import NoiseModel, RngStream, sample
from .environments import EnvSpec, SweepKind, delta_grid, delta_sweep_env
from .errors import PreconditionError
from .estimators import SmomConfig
from .logger import get_logger
from .policies import PolicyConfig, make_policy
from .utils.stats import checkpoint_grid, mean_and_std, percentiles

logger = get_logger()

POLICY_STREAM_ID = 2 ** 32
DEFAULT_MAX_POINTS = 2000


@dataclass
class RegretTrace:
    """Cumulative pseudo-regret by raw pull count.

    `cumulative[t]` is R_t, so `cumulative[0] == 0`; `arms[t-1]` is the arm of pull t.
    """
    gaps: Tuple[float, ...]
    cumulative: np.ndarray
    arms: np.ndarray

    @property
    def pulls(self) -> int:
        return len(self.arms)

    def at(self, t: int) -> float:
        """R_t; pulls past the end of the trace carry the last value forward."""
        return float(self.cumulative[min(int(t), self.pulls)])

    def sample(self, checkpoints: Sequence[int]) -> np.ndarray:
        idx = np.minimum(np.asarray(checkpoints, dtype=np.int64), self.pulls)
        return self.cumulative[idx]

    def arm_pulls(self, t: Optional[int] = None) -> np.ndarray:
        """Raw pull count of every arm among the first t pulls."""
        upto = self.pulls if t is None else min(int(t), self.pulls)
        return np.bincount(self.arms[:upto], minlength=len(self.gaps))


@dataclass
class TargetHit:
    hit: bool
    time_to_hit: Optional[float] = None
    pulls_to_hit: Optional[int] = None


@dataclass
class TrialSummary:
    policy: str
    trial: int
    seed: int
    pulls: int
    checkpoints: np.ndarray
    regret: np.ndarray
    arm_pulls: List[int]
    wall_time: float
    target_hits: Dict[float, TargetHit]
    realized_regret: float
    overruns: int = 0
    trace: Optional[RegretTrace] = None

    @property
    def final_regret(self) -> float:
        return float(self.regret[-1])


class _PullRecorder:
    """Environment feed handed to the policy: draws rewards and books regret per pull."""

    def __init__(self, env: EnvSpec, seed: int, budget: int, targets: Sequence[float],
                 check_from: int, clock_start: float):
        self.means = env.means
        self.noise = env.noise
        self.gaps = env.gaps
        self.best = env.best_mean
        self.streams = [RngStream(seed, arm) for arm in range(env.n_arms)]
        self.budget = budget
        self.check_from = check_from
        self.clock_start = clock_start
        self.pending = sorted(set(float(x) for x in targets), reverse=True)
        self.hits: Dict[float, TargetHit] = {target: TargetHit(hit=False) for target in self.pending}
        self.arms: List[int] = []
        self.t = 0
        self.regret = 0.0
        self.reward_total = 0.0

    def __call__(self, arm: int) -> float:
        if self.t >= self.budget:
            raise PreconditionError(f"pull budget of {self.budget} exhausted")
        reward = self.means[arm] + sample(self.noise, self.streams[arm])
        self.t += 1
        self.arms.append(arm)
        self.regret += self.gaps[arm]
        self.reward_total += reward
        if self.pending and self.t >= self.check_from:
            self._check_targets()
        return reward

    def _check_targets(self):
        # pending is sorted descending, so hits come off the front
        while self.pending and self.regret <= self.pending[0] * self.t:
            target = self.pending.pop(0)
            self.hits[target] = TargetHit(hit=True, time_to_hit=time.perf_counter() - self.clock_start,
                                          pulls_to_hit=self.t)

    def trace(self) -> RegretTrace:
        arms = np.asarray(self.arms, dtype=np.int64)
        gaps = np.asarray(self.gaps, dtype=float)
        cumulative = np.concatenate(([0.0], np.cumsum(gaps[arms]))) if len(arms) else np.zeros(1)
        return RegretTrace(gaps=self.gaps, cumulative=cumulative, arms=arms)


def run_trial(env: EnvSpec, policy_cfg: PolicyConfig, budget: int, seed: int,
              targets: Sequence[float] = (), trial: int = 0, max_points: int = DEFAULT_MAX_POINTS,
              keep_trace: bool = False, optimizer: Optional[Dict[str, Callable]] = None) -> TrialSummary:
    """Initialize the policy, then play rounds while a full batch of pulls remains in the budget."""
    k_arms = env.n_arms
    init_pulls = k_arms * policy_cfg.p
    b = policy_cfg.batch_size
    if budget < init_pulls + b:
        raise PreconditionError(
            f"budget {budget} is too small for {policy_cfg.display_name}: "
            f"needs K*p + b = {init_pulls + b} pulls"
        )
    if any(not target > 0 for target in targets):
        raise PreconditionError(f"targets must be positive, got {list(targets)}")

    logger.trial_debug(f"{policy_cfg.display_name} trial {trial} (seed {seed}) on {env.name}")
    start = time.perf_counter()
    feed = _PullRecorder(env, seed, budget, targets, init_pulls, start)
    policy = make_policy(policy_cfg, k_arms, budget, RngStream(seed, POLICY_STREAM_ID), **(optimizer or {}))
    policy.initialize(feed)
    while budget - feed.t >= b:
        arm = policy.select_arm()
        policy.update(arm, [feed(arm) for _ in range(b)])
    wall_time = time.perf_counter() - start

    trace = feed.trace()
    checkpoints = checkpoint_grid(budget, max_points)
    overruns = policy.overruns()
    if overruns:
        logger.debug(f"{policy_cfg.display_name} trial {trial}: {overruns} optimizer steps past the horizon")
    logger.trial_debug(f"{policy_cfg.display_name} trial {trial}: R={trace.at(budget):.4g} in {wall_time:.3f}s")
    return TrialSummary(
        policy=policy_cfg.display_name,
        trial=trial,
        seed=seed,
        pulls=feed.t,
        checkpoints=checkpoints,
        regret=trace.sample(checkpoints),
        arm_pulls=trace.arm_pulls().tolist(),
        wall_time=wall_time,
        target_hits=feed.hits,
        realized_regret=feed.t * feed.best - feed.reward_total,
        overruns=overruns,
        trace=trace if keep_trace else None,
    )


def _trial_job(job: Tuple) -> TrialSummary:
    env, cfg, budget, seed, targets, trial, max_points, optimizer = job
    return run_trial(env, cfg, budget, seed, targets=targets, trial=trial, max_points=max_points,
                     optimizer=optimizer)


def _map_jobs(fn: Callable, jobs: List[Any], workers: int) -> List[Any]:
    """Results in job order, computed inline or in a process pool."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    results: Dict[int, Any] = {}
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, job): idx for idx, job in enumerate(jobs)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
    return [results[idx] for idx in range(len(jobs))]


@dataclass
class PolicyAggregate:
    """Pointwise statistics of one policy's trials at the shared checkpoints."""
    label: str
    config: Dict[str, Any]
    mean: np.ndarray
    std: np.ndarray
    fails: Dict[float, int]
    pulls_to_target: Dict[float, Dict[str, Optional[float]]]
    time_to_target: Dict[float, Dict[str, Optional[float]]]
    wall_time: Dict[str, Optional[float]]
    realized_regret_mean: float
    overruns: int

    @property
    def final_mean(self) -> float:
        return float(self.mean[-1])

    @property
    def final_std(self) -> float:
        return float(self.std[-1])


@dataclass
class ExperimentReport:
    env: EnvSpec
    budget: int
    trials: int
    base_seed: int
    targets: List[float]
    checkpoints: np.ndarray
    aggregates: List[PolicyAggregate]
    summaries: Dict[str, List[TrialSummary]] = field(default_factory=dict)

    @property
    def seeds(self) -> List[int]:
        return [self.base_seed + i for i in range(self.trials)]

    def aggregate(self, label: str) -> PolicyAggregate:
        for agg in self.aggregates:
            if agg.label == label:
                return agg
        raise KeyError(label)


def aggregate_trials(cfg: PolicyConfig, summaries: List[TrialSummary], targets: Sequence[float]) -> PolicyAggregate:
    mean, std = mean_and_std([s.regret for s in summaries])
    fails, pulls_to, time_to = {}, {}, {}
    for target in targets:
        hits = [s.target_hits[target] for s in summaries if s.target_hits[target].hit]
        fails[target] = len(summaries) - len(hits)
        pulls_to[target] = percentiles([h.pulls_to_hit for h in hits])
        time_to[target] = percentiles([h.time_to_hit for h in hits])
    return PolicyAggregate(
        label=cfg.display_name,
        config=cfg.to_dict(),
        mean=mean,
        std=std,
        fails=fails,
        pulls_to_target=pulls_to,
        time_to_target=time_to,
        wall_time=percentiles([s.wall_time for s in summaries]),
        realized_regret_mean=float(np.mean([s.realized_regret for s in summaries])),
        overruns=sum(s.overruns for s in summaries),
    )


def _check_labels(policies: Sequence[PolicyConfig]):
    labels = [cfg.display_name for cfg in policies]
    duplicates = sorted({label for label in labels if labels.count(label) > 1})
    if duplicates:
        raise PreconditionError(f"policy labels must be unique, duplicated: {duplicates}")


def run_experiment(env: EnvSpec, policies: Sequence[PolicyConfig], trials: int, budget: int,
                   base_seed: int = 0, workers: int = 1, targets: Sequence[float] = (),
                   max_points: int = DEFAULT_MAX_POINTS,
                   optimizer: Optional[Dict[str, Callable]] = None) -> ExperimentReport:
    """Run `trials` seeded trials of every policy; trial i uses seed base_seed + i for all policies.

    `optimizer` carries the step and g callables of the generic FO-UCB / ZO-UCB families.
    With workers > 1 they must be picklable (module-level functions, not lambdas).
    """
    if trials < 1:
        raise PreconditionError(f"trials must be at least 1, got {trials}")
    if not policies:
        raise PreconditionError("an experiment needs at least one policy")
    _check_labels(policies)
    targets = [float(t) for t in targets]

    jobs = [(env, cfg, budget, base_seed + i, targets, i, max_points, optimizer)
            for cfg in policies for i in range(trials)]
    logger.info(f"Running {len(policies)} policies x {trials} trials on {env.name} (budget {budget}, workers {workers})")
    results = _map_jobs(_trial_job, jobs, workers)

    summaries: Dict[str, List[TrialSummary]] = {}
    aggregates = []
    for p_idx, cfg in enumerate(policies):
        rows = results[p_idx * trials:(p_idx + 1) * trials]
        summaries[cfg.display_name] = rows
        aggregates.append(aggregate_trials(cfg, rows, targets))
    return ExperimentReport(env=env, budget=budget, trials=trials, base_seed=base_seed, targets=targets,
                            checkpoints=checkpoint_grid(budget, max_points), aggregates=aggregates,
                            summaries=summaries)


@dataclass
class BenchmarkRow:
    policy: str
    target: float
    trials: int
    fails: int
    time_p50: Optional[float]
    time_p90: Optional[float]
    pulls_p50: Optional[float]
    pulls_p90: Optional[float]


@dataclass
class BenchmarkResult:
    report: ExperimentReport
    rows: List[BenchmarkRow]


def runtime_benchmark(env: EnvSpec, policies: Sequence[PolicyConfig], targets: Sequence[float], budget: int,
                      trials: int, base_seed: int = 0, workers: int = 1) -> BenchmarkResult:
    """Fail counts and time-to-target percentiles per policy and target.

    The clock covers policy computation and environment sampling. A pool runs one trial
    per worker process at a time.
    """
    if not targets:
        raise PreconditionError("runtime benchmark needs at least one target")
    if any(not t > 0 for t in targets):
        raise PreconditionError(f"targets must be positive, got {list(targets)}")
    report = run_experiment(env, policies, trials, budget, base_seed, workers, targets)
    rows = []
    for agg in report.aggregates:
        for target in report.targets:
            times, pulls = agg.time_to_target[target], agg.pulls_to_target[target]
            rows.append(BenchmarkRow(policy=agg.label, target=target, trials=trials, fails=agg.fails[target],
                                     time_p50=times["p50"], time_p90=times["p90"],
                                     pulls_p50=pulls["p50"], pulls_p90=pulls["p90"]))
            if agg.fails[target]:
                logger.info(f"{agg.label}: {agg.fails[target]}/{trials} trials never reached R/T <= {target:g}")
    return BenchmarkResult(report=report, rows=rows)


@dataclass
class DeltaSweepResult:
    kind: SweepKind
    grid: List[float]
    budget: int
    trials: int
    base_seed: int
    final_mean: Dict[str, List[float]]
    final_std: Dict[str, List[float]]


def delta_sweep(kind: SweepKind, grid: Optional[Sequence[float]], trials: int, budget: int,
                policies: Sequence[PolicyConfig], base_seed: int = 0, workers: int = 1,
                noise: Optional[NoiseModel] = None) -> DeltaSweepResult:
    """Mean final regret of every policy at each gap of the grid (default grid when None)."""
    kind = SweepKind(kind)
    grid = list(delta_grid(kind) if grid is None else grid)
    if not grid:
        raise PreconditionError("delta sweep grid must not be empty")
    _check_labels(policies)
    final_mean = {cfg.display_name: [] for cfg in policies}
    final_std = {cfg.display_name: [] for cfg in policies}
    for gap in grid:
        report = run_experiment(delta_sweep_env(kind, gap, noise), policies, trials, budget, base_seed, workers,
                                max_points=1)
        for agg in report.aggregates:
            final_mean[agg.label].append(agg.final_mean)
            final_std[agg.label].append(agg.final_std)
        logger.debug(f"{kind.value} gap {gap:g}: " +
                     ", ".join(f"{label}={values[-1]:.4g}" for label, values in final_mean.items()))
    return DeltaSweepResult(kind=kind, grid=grid, budget=budget, trials=trials, base_seed=base_seed,
                            final_mean=final_mean, final_std=final_std)


@dataclass
class ConvergenceResult:
    checkpoints: List[int]
    median: np.ndarray
    per_seed: np.ndarray
    slope: Optional[float]
    fit_from: int


def _convergence_job(job: Tuple) -> np.ndarray:
    mu, x0, schedule, noise, seed, checkpoints, smom_cfg = job
    return run_clipped_sgd(mu, x0, schedule, noise, RngStream(seed, 0), checkpoints, smom_cfg, RngStream(seed, 1))


def sgd_convergence(noise: NoiseModel, schedule: Schedule, seeds: Sequence[int],
                    checkpoints: Optional[Sequence[int]] = None, mu: float = 0.0, x0: Optional[float] = None,
                    smom_cfg: SmomConfig = SmomConfig(), fit_from: int = 100, workers: int = 1) -> ConvergenceResult:
    """Median suboptimality of clipped-SGD over seeds, plus its log-log slope from `fit_from` on."""
    if not seeds:
        raise PreconditionError("convergence experiment needs at least one seed")
    checkpoints = sorted(checkpoints) if checkpoints else log_checkpoints(schedule.horizon, per_decade=4)
    start = mu + schedule.R if x0 is None else x0
    jobs = [(mu, start, schedule, noise, seed, checkpoints, smom_cfg) for seed in seeds]
    per_seed = np.vstack(_map_jobs(_convergence_job, jobs, workers))
    median = np.median(per_seed, axis=0)

    fit_ks = [k for k in checkpoints if k >= fit_from]
    fit_vals = [v for k, v in zip(checkpoints, median) if k >= fit_from]
    slope = None
    if len(fit_ks) >= 2 and all(v > 0 for v in fit_vals):
        slope = fit_loglog_slope(fit_ks, fit_vals)
    logger.series_debug("median suboptimality", median)
    return ConvergenceResult(checkpoints=list(checkpoints), median=median, per_seed=per_seed, slope=slope,
                             fit_from=fit_from)


def calibrate(noise: NoiseModel, schedule: Schedule, seeds: Sequence[int],
              checkpoints: Optional[Sequence[int]] = None, mu: float = 0.0, x0: Optional[float] = None,
              smom_cfg: SmomConfig = SmomConfig()) -> CalibrationResult:
    """Pilot-run calibration of the bounding constant C."""
    logger.info(f"Calibrating C on {len(seeds)} pilot seeds ({noise.label}, horizon {schedule.horizon})")
    return calibrate_c(noise, schedule, seeds, checkpoints, mu, x0, smom_cfg)
