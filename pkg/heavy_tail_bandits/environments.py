"""
Test environments: arm means, reward generation mu_i + xi and gap bookkeeping.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .distributions import NoiseModel, RngStream, sample
from .errors import PreconditionError


@dataclass(frozen=True)
class EnvSpec:
    """An immutable K-armed environment."""
    means: Tuple[float, ...]
    noise: NoiseModel
    name: str = "custom"

    def __post_init__(self):
        means = tuple(float(m) for m in self.means)
        if len(means) < 2:
            raise PreconditionError(f"an environment needs at least 2 arms, got {len(means)}")
        if not all(np.isfinite(means)):
            raise PreconditionError("arm means must be finite")
        object.__setattr__(self, 'means', means)

    @property
    def n_arms(self) -> int:
        return len(self.means)

    @property
    def best_mean(self) -> float:
        return max(self.means)

    @property
    def gaps(self) -> Tuple[float, ...]:
        best = self.best_mean
        return tuple(best - m for m in self.means)

    @property
    def best_arms(self) -> List[int]:
        return [i for i, gap in enumerate(self.gaps) if gap == 0.0]

    def shifted(self, c: float) -> 'EnvSpec':
        """Same environment with every mean moved by c."""
        return replace(self, means=tuple(m + c for m in self.means), name=f"{self.name}+{c:g}")

    def with_noise(self, noise: NoiseModel) -> 'EnvSpec':
        return replace(self, noise=noise)

    def pull(self, arm: int, rng: RngStream) -> float:
        return pull(self, arm, rng)

    def to_dict(self) -> Dict:
        return {"name": self.name, "means": list(self.means), "noise": self.noise.to_dict()}


def pull(env: EnvSpec, arm: int, rng: RngStream) -> float:
    """One reward mu_arm + xi."""
    if not 0 <= arm < len(env.means):
        raise PreconditionError(f"arm index {arm} out of range for {len(env.means)} arms")
    return env.means[arm] + sample(env.noise, rng)


def _layout(count: int, divisor: float) -> Tuple[float, ...]:
    return tuple(i / divisor for i in range(count))


# name -> (arm count, mean divisor, default noise)
_BUILTIN = {
    "Env1": (10, 1.0, NoiseModel.cauchy(1.0)),
    "Env2": (10, 10.0, NoiseModel.cauchy(1.0)),
    "Env3": (100, 50.0, NoiseModel.cauchy(1.0)),
    "Gauss1": (10, 10.0, NoiseModel.gaussian()),
    "Gauss2": (10, 50.0, NoiseModel.gaussian()),
    "Gauss3": (100, 50.0, NoiseModel.gaussian()),
}

BUILTIN_ENVS = tuple(_BUILTIN)


def builtin_env(name: str, noise: Optional[NoiseModel] = None) -> EnvSpec:
    """One of the built-in mean layouts; `noise` replaces the layout's default noise."""
    if name not in _BUILTIN:
        raise PreconditionError(f"unknown environment {name!r}; expected one of {list(BUILTIN_ENVS)}")
    count, divisor, default_noise = _BUILTIN[name]
    return EnvSpec(means=_layout(count, divisor), noise=noise or default_noise, name=name)


def custom_env(means: Sequence[float], noise: NoiseModel, name: str = "custom") -> EnvSpec:
    return EnvSpec(means=tuple(means), noise=noise, name=name)


class SweepKind(str, Enum):
    """Environments with hardly distinguishable arms."""
    TWO_ARM = "two-arm"
    FIVE_ARM = "five-arm"


# kind -> (grid stop, grid step, noise)
_SWEEPS = {
    SweepKind.TWO_ARM: (1.0, 0.04, NoiseModel.gaussian()),
    SweepKind.FIVE_ARM: (10.0, 0.4, NoiseModel.cauchy(1.0)),
}


def delta_sweep_env(kind: SweepKind, delta: float, noise: Optional[NoiseModel] = None) -> EnvSpec:
    """TwoArm: means {0, delta}; FiveArm: means {0, 0, 0, 0, delta}."""
    kind = SweepKind(kind)
    if delta < 0:
        raise PreconditionError(f"gap must be nonnegative, got {delta}")
    means = (0.0, delta) if kind == SweepKind.TWO_ARM else (0.0, 0.0, 0.0, 0.0, delta)
    return EnvSpec(means=means, noise=noise or _SWEEPS[kind][2], name=f"{kind.value}(delta={delta:g})")


def delta_grid(kind: SweepKind) -> List[float]:
    """The 26-point gap grid starting at 0."""
    stop, step, _ = _SWEEPS[SweepKind(kind)]
    count = int(round(stop / step)) + 1
    return [round(i * step, 10) for i in range(count)]
