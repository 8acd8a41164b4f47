"""Run configuration for heavy-tail-bandits experiments."""

import os
import yaml
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

from .clipped_sgd import Schedule
from .config_validator import OUTPUT_FORMATS, ConfigValidator
from .distributions import NoiseKind, NoiseModel
from .environments import EnvSpec, builtin_env, custom_env
from .errors import ConfigError, PreconditionError
from .estimators import SmomConfig
from .logger import get_logger
from .policies import PolicyConfig, RucbParams, ScheduleParams, named_policy

logger = get_logger()


@dataclass
class EnvConfig:
    """A builtin layout by name, or a custom one when `means` is given."""
    name: str = "Env1"
    means: Optional[List[float]] = None

    def build(self, noise: Optional[NoiseModel] = None) -> EnvSpec:
        if self.means is not None:
            return custom_env(self.means, noise or NoiseModel.cauchy(1.0), name=self.name)
        return builtin_env(self.name, noise)


@dataclass
class NoiseConfig:
    """Noise override; `kind=None` keeps each environment's default noise."""
    kind: Optional[str] = None
    scale: float = 1.0
    shape: float = 1.0
    weights: List[float] = field(default_factory=lambda: [0.7, 0.3])
    tail_alpha: Optional[float] = None
    tail_sigma: Optional[float] = None

    def model(self) -> Optional[NoiseModel]:
        if self.kind is None:
            return None
        return NoiseModel(NoiseKind(self.kind), scale=self.scale, shape=self.shape, weights=tuple(self.weights),
                          tail_alpha=self.tail_alpha, tail_sigma=self.tail_sigma)


@dataclass
class PolicyEntry:
    """One policy of a run: a named variant plus hyperparameter overrides."""
    name: str
    label: Optional[str] = None
    p: Optional[int] = None
    smom: Dict[str, Any] = field(default_factory=dict)
    delta_rule: Optional[str] = None
    delta: Optional[float] = None
    schedule: Dict[str, Any] = field(default_factory=dict)
    rucb: Dict[str, Any] = field(default_factory=dict)
    ucb_v: Optional[float] = None

    @property
    def display_name(self) -> str:
        return self.label or self.name

    def to_policy_config(self, light_tailed: bool = False) -> PolicyConfig:
        """Resolve to a PolicyConfig; p defaults to 1 under light-tailed noise and 3 otherwise."""
        overrides: Dict[str, Any] = {"p": self.p if self.p is not None else (1 if light_tailed else 3)}
        base = named_policy(self.name)
        if self.smom:
            overrides["smom"] = replace(base.smom, **self.smom)
        if self.schedule:
            overrides["schedule"] = ScheduleParams(**self.schedule)
        if self.rucb:
            overrides["rucb"] = RucbParams(**self.rucb)
        if self.delta_rule is not None:
            overrides["delta_rule"] = self.delta_rule
        if self.delta is not None:
            overrides["delta"] = self.delta
        if self.ucb_v is not None:
            overrides["ucb_v"] = self.ucb_v
        if self.label:
            overrides["label"] = self.label
        return named_policy(self.name, **overrides)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"name": self.name}
        for key in ("label", "p", "delta_rule", "delta", "ucb_v"):
            value = getattr(self, key)
            if value is not None:
                data[key] = value
        for key in ("smom", "schedule", "rucb"):
            if getattr(self, key):
                data[key] = dict(sorted(getattr(self, key).items()))
        return data


@dataclass
class SweepConfig:
    kind: str = "two-arm"
    grid: Optional[List[float]] = None


@dataclass
class ConvergenceConfig:
    """Standalone clipped-SGD run on (x - mu)^2 / 2."""
    horizon: int = 100000
    delta: float = 0.01
    R: float = 1.0
    L: float = 1.0
    C: float = 1.0
    lr_mode: str = "harmonic"
    mu: float = 0.0
    x0: Optional[float] = None
    seeds: int = 100
    fit_from: int = 100
    m: int = 0
    n: int = 1

    def build_schedule(self) -> Schedule:
        return Schedule(horizon=self.horizon, delta=self.delta, R=self.R, L=self.L, C=self.C, lr_mode=self.lr_mode)

    def smom_config(self) -> SmomConfig:
        return SmomConfig(m=self.m, n=self.n)


@dataclass
class CalibrationConfig:
    horizon: int = 10000
    delta: float = 0.05
    R: float = 1.0
    L: float = 1.0
    lr_mode: str = "harmonic"
    mu: float = 0.0
    x0: Optional[float] = None
    seeds: int = 50
    m: int = 0
    n: int = 1

    def build_schedule(self) -> Schedule:
        return Schedule(horizon=self.horizon, delta=self.delta, R=self.R, L=self.L, lr_mode=self.lr_mode)

    def smom_config(self) -> SmomConfig:
        return SmomConfig(m=self.m, n=self.n)


@dataclass
class OutputConfig:
    dir: str = "results"
    formats: List[str] = field(default_factory=lambda: ["csv", "json"])
    max_points: int = 2000


@dataclass
class RunConfig:
    """A complete, validated experiment description."""
    experiment: str = "curves"
    envs: List[EnvConfig] = field(default_factory=lambda: [EnvConfig()])
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    policies: List[PolicyEntry] = field(default_factory=list)
    trials: int = 100
    budget: int = 10000
    seed: int = 0
    workers: int = 1
    targets: List[float] = field(default_factory=lambda: [0.1, 0.05])
    sweep: SweepConfig = field(default_factory=SweepConfig)
    convergence: ConvergenceConfig = field(default_factory=ConvergenceConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    scale: float = 1.0

    @property
    def effective_trials(self) -> int:
        return scaled_count(self.trials, self.scale)

    def environments(self) -> List[EnvSpec]:
        noise = self.noise.model()
        return [env.build(noise) for env in self.envs]

    def policy_configs(self, env: EnvSpec) -> List[PolicyConfig]:
        light = env.noise.is_light_tailed
        return [entry.to_policy_config(light_tailed=light) for entry in self.policies]

    def noise_or(self, default: NoiseModel) -> NoiseModel:
        return self.noise.model() or default

    def to_dict(self) -> Dict[str, Any]:
        """Config echo with the effective trial count.

        Worker count and output directory do not change results and are left out.
        """
        noise = {k: v for k, v in vars(self.noise).items() if v is not None}
        return {
            "experiment": self.experiment,
            "envs": [{"name": e.name, **({"means": list(e.means)} if e.means is not None else {})} for e in self.envs],
            "noise": noise,
            "policies": [entry.to_dict() for entry in self.policies],
            "trials": self.trials,
            "effective_trials": self.effective_trials,
            "scale": self.scale,
            "budget": self.budget,
            "seed": self.seed,
            "targets": list(self.targets),
            "sweep": {"kind": self.sweep.kind, "grid": self.sweep.grid},
            "convergence": dict(vars(self.convergence)),
            "calibration": dict(vars(self.calibration)),
            "output": {"formats": list(self.output.formats), "max_points": self.output.max_points},
        }


def scaled_count(count: int, scale: float) -> int:
    return max(1, int(round(count * scale)))


class ConfigManager:
    """Loads YAML run configs into validated RunConfig objects."""

    def __init__(self, validator: Optional[ConfigValidator] = None):
        self.validator = validator or ConfigValidator()

    def load_config(self, config_path: str) -> RunConfig:
        """Load and validate a run config file."""
        if not config_path or not os.path.exists(config_path):
            raise ConfigError("config", f"config file not found: {config_path}")
        try:
            with open(config_path, 'r') as f:
                data = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ConfigError("config", f"could not parse {config_path}: {e}")
        logger.info(f"Loaded config from {config_path}")
        return self.from_dict(data if data is not None else {})

    def from_dict(self, data: Dict[str, Any]) -> RunConfig:
        """Validate a raw mapping and build the RunConfig; the first error is raised."""
        result = self.validator.validate(data)
        for warning in result.warnings:
            logger.warning(warning)
        result.raise_first()
        try:
            return self._build(data)
        except PreconditionError as e:
            raise ConfigError(None, str(e))

    def _build(self, data: Dict[str, Any]) -> RunConfig:
        envs = data.get("envs", ["Env1"])
        if isinstance(envs, str):
            envs = [envs]
        env_configs = [EnvConfig(name=e) if isinstance(e, str) else EnvConfig(**e) for e in envs]

        noise_data = dict(data.get("noise", {}))
        if "weights" in noise_data:
            noise_data["weights"] = list(noise_data["weights"])
        policies = [PolicyEntry(name=p) if isinstance(p, str) else PolicyEntry(**p) for p in data.get("policies", [])]

        output = dict(data.get("output", {}))
        if "formats" in output:
            output["formats"] = list(dict.fromkeys(output["formats"]))

        config = RunConfig(
            experiment=data.get("experiment", "curves"),
            envs=env_configs,
            noise=NoiseConfig(**noise_data),
            policies=policies,
            trials=data.get("trials", 100),
            budget=data.get("budget", 10000),
            seed=data.get("seed", 0),
            workers=data.get("workers", 1),
            targets=[float(t) for t in data.get("targets", [0.1, 0.05])],
            sweep=SweepConfig(**data.get("sweep", {})),
            convergence=ConvergenceConfig(**data.get("convergence", {})),
            calibration=CalibrationConfig(**data.get("calibration", {})),
            output=OutputConfig(**output),
            scale=float(data.get("scale", 1.0)),
        )
        # construction-time checks of the domain objects
        for env in config.environments():
            config.policy_configs(env)
        return config


def parse_config(path: str) -> RunConfig:
    return ConfigManager().load_config(path)


_OVERRIDE_CHECKS = {
    "seed": (lambda v: v >= 0, "a nonnegative integer"),
    "workers": (lambda v: v >= 1, "a positive integer"),
    "trials": (lambda v: v >= 1, "a positive integer"),
    "budget": (lambda v: v >= 1, "a positive integer"),
    "scale": (lambda v: v > 0, "a positive number"),
}


def apply_overrides(config: RunConfig, seed: Optional[int] = None, workers: Optional[int] = None,
                    out_dir: Optional[str] = None, formats: Optional[List[str]] = None,
                    scale: Optional[float] = None, trials: Optional[int] = None,
                    budget: Optional[int] = None) -> RunConfig:
    """Command-line values win over file values; unset flags leave the file value alone."""
    changes = {"seed": seed, "workers": workers, "scale": scale, "trials": trials, "budget": budget}
    changes = {key: value for key, value in changes.items() if value is not None}
    for key, value in changes.items():
        check, requirement = _OVERRIDE_CHECKS[key]
        if not check(value):
            raise ConfigError(f"--{key}", f"must be {requirement}, got {value!r}")
    output = config.output
    if out_dir is not None:
        output = replace(output, dir=out_dir)
    if formats:
        unknown = [f for f in formats if f not in OUTPUT_FORMATS]
        if unknown:
            raise ConfigError("--format", f"unknown formats {unknown}; expected a subset of {list(OUTPUT_FORMATS)}")
        output = replace(output, formats=list(dict.fromkeys(formats)))
    if changes:
        logger.debug(f"Command-line overrides: {changes}")
    return replace(config, output=output, **changes)
