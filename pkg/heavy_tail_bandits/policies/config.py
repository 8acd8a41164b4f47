"""Policy configuration: family selection, hyperparameters and the named variants."""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional

from ..clipped_sgd import LR_MODES, Schedule
from ..errors import ConfigError, PreconditionError
from ..estimators import SmomConfig


class PolicyFamily(str, Enum):
    CLIPPED_SGD_UCB = "clipped-sgd-ucb"
    VANILLA_UCB = "ucb"
    RUCB_MEDIAN = "rucb-median"
    GENERIC_FO_UCB = "generic-fo-ucb"
    GENERIC_ZO_UCB = "generic-zo-ucb"


class DeltaRule(str, Enum):
    """How the confidence level delta is chosen.

    PER_ROUND uses 1/t^2 with t the raw pulls so far; the others are fixed for a run of
    horizon T.
    """
    PER_ROUND = "per-round"
    ONE_OVER_T2 = "one-over-t2"
    ONE_OVER_T_TPLUS1 = "one-over-t-tplus1"
    FIXED = "fixed"


@dataclass(frozen=True)
class ScheduleParams:
    """Clipped-SGD schedule parameters shared by every arm; horizon and delta come at init."""
    R: float = 1.0
    L: float = 1.0
    C: float = 1.0
    lr_mode: str = "constant"

    def __post_init__(self):
        if self.lr_mode not in LR_MODES:
            raise PreconditionError(f"lr_mode must be one of {LR_MODES}, got {self.lr_mode!r}")

    def build(self, horizon: int, delta: float) -> Schedule:
        return Schedule(horizon=horizon, delta=delta, R=self.R, L=self.L, C=self.C, lr_mode=self.lr_mode)


@dataclass(frozen=True)
class RucbParams:
    """Robust UCB radius parameters: moment order alpha, moment bound v and constant c."""
    alpha: float = 1.0
    v: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise PreconditionError(f"rucb alpha must lie in (0, 1], got {self.alpha}")
        if not self.v > 0 or not self.c > 0:
            raise PreconditionError("rucb v and c must be positive")


@dataclass(frozen=True)
class PolicyConfig:
    family: PolicyFamily
    smom: SmomConfig = field(default_factory=SmomConfig)
    p: int = 3
    delta_rule: Optional[DeltaRule] = None
    delta: Optional[float] = None
    schedule: ScheduleParams = field(default_factory=ScheduleParams)
    rucb: RucbParams = field(default_factory=RucbParams)
    ucb_v: float = 1.0
    name: str = ""
    label: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, 'family', PolicyFamily(self.family))
        if not isinstance(self.p, int) or self.p < 1 or self.p % 2 == 0:
            raise PreconditionError(f"p must be a positive odd integer, got {self.p!r}")
        if self.delta_rule is not None:
            object.__setattr__(self, 'delta_rule', DeltaRule(self.delta_rule))
        if self.effective_delta_rule == DeltaRule.FIXED:
            if self.delta is None or not 0.0 < self.delta <= 1.0:
                raise PreconditionError(f"a fixed delta rule needs delta in (0, 1], got {self.delta}")
        if not self.ucb_v > 0:
            raise PreconditionError(f"ucb_v must be positive, got {self.ucb_v}")
        if not self.name:
            object.__setattr__(self, 'name', _default_name(self))

    @property
    def display_name(self) -> str:
        return self.label or self.name

    @property
    def effective_delta_rule(self) -> DeltaRule:
        if self.delta_rule is not None:
            return self.delta_rule
        if self.family == PolicyFamily.VANILLA_UCB:
            return DeltaRule.PER_ROUND
        return DeltaRule.ONE_OVER_T_TPLUS1

    @property
    def batch_size(self) -> int:
        if self.family in (PolicyFamily.VANILLA_UCB, PolicyFamily.RUCB_MEDIAN):
            return 1
        return self.smom.batch_size

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "name": self.name,
            "family": self.family.value,
            "p": self.p,
            "delta_rule": self.effective_delta_rule.value,
        }
        if self.label:
            data["label"] = self.label
        if self.delta is not None:
            data["delta"] = self.delta
        if self.family == PolicyFamily.VANILLA_UCB:
            data["ucb_v"] = self.ucb_v
        elif self.family == PolicyFamily.RUCB_MEDIAN:
            data["rucb"] = {"alpha": self.rucb.alpha, "v": self.rucb.v, "c": self.rucb.c}
        else:
            data["smom"] = {"m": self.smom.m, "n": self.smom.n, "theta": self.smom.theta}
            data["schedule"] = {"R": self.schedule.R, "L": self.schedule.L, "C": self.schedule.C,
                                "lr_mode": self.schedule.lr_mode}
        return data


# Names of the built-in variants and the settings they stand for
NAMED_VARIANTS: Dict[str, Dict[str, Any]] = {
    "SGD-UCB": {"family": PolicyFamily.CLIPPED_SGD_UCB, "smom": SmomConfig(m=0, n=1)},
    "SGD-UCB-Median": {"family": PolicyFamily.CLIPPED_SGD_UCB, "smom": SmomConfig(m=1, n=1)},
    "SGD-UCB-SMoM": {"family": PolicyFamily.CLIPPED_SGD_UCB, "smom": SmomConfig(m=1, n=2)},
    "RUCB-Median": {"family": PolicyFamily.RUCB_MEDIAN},
    "UCB": {"family": PolicyFamily.VANILLA_UCB},
}


def canonical_name(name: str) -> str:
    """Map a case-insensitive policy name onto its canonical spelling."""
    lookup = {key.lower(): key for key in NAMED_VARIANTS}
    key = lookup.get(str(name).strip().lower())
    if key is None:
        raise ConfigError("name", f"unknown policy {name!r}; expected one of {sorted(NAMED_VARIANTS)}")
    return key


def named_policy(name: str, **overrides) -> PolicyConfig:
    """Build one of the named variants, e.g. named_policy("SGD-UCB-SMoM", p=3)."""
    key = canonical_name(name)
    settings = dict(NAMED_VARIANTS[key])
    theta = overrides.pop("theta", None)
    settings.update(overrides)
    if theta is not None:
        smom = settings.get("smom", SmomConfig())
        settings["smom"] = SmomConfig(m=smom.m, n=smom.n, theta=theta)
    settings["name"] = key
    return PolicyConfig(**settings)


def _default_name(config: PolicyConfig) -> str:
    if config.family == PolicyFamily.CLIPPED_SGD_UCB:
        for key, settings in NAMED_VARIANTS.items():
            smom = settings.get("smom")
            if smom is not None and (smom.m, smom.n) == (config.smom.m, config.smom.n):
                return key
        return f"Clipped-SGD-UCB(m={config.smom.m},n={config.smom.n})"
    if config.family == PolicyFamily.VANILLA_UCB:
        return "UCB"
    if config.family == PolicyFamily.RUCB_MEDIAN:
        return "RUCB-Median"
    if config.family == PolicyFamily.GENERIC_FO_UCB:
        return "FO-UCB"
    return "ZO-UCB"
