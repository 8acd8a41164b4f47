"""
Seedable noise laws for bandit rewards.

Every sampler is an inverse transform of uniforms drawn from an `RngStream`, so a
stream's output depends only on its (seed, stream_id) pair and the order of calls.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from scipy.special import ndtr, ndtri

from .errors import PreconditionError, UnsupportedOperationError

ArrayLike = Union[float, np.ndarray]

_UINT64_MAX = 2 ** 64 - 1
# integers k in [0, 2^52) map to (2k+1)·2^-53: strictly inside (0, 1)
_UNIFORM_BITS = 2 ** 52
_UNIFORM_SCALE = 2.0 ** -52

PARETO_SCALE = 1.5
PARETO_TAIL = 3.0


class NoiseKind(str, Enum):
    """Supported noise laws, named as in config files."""
    CAUCHY = "cauchy"
    FRECHET = "frechet"
    CAUCHY_EXP = "cauchy-exp"
    CAUCHY_PARETO = "cauchy-pareto"
    GAUSSIAN = "gaussian"
    ZERO = "zero"


MIXTURE_KINDS = (NoiseKind.CAUCHY_EXP, NoiseKind.CAUCHY_PARETO)


class RngStream:
    """A reproducible stream of uniforms backed by numpy's counter-based Philox generator.

    Streams with distinct `stream_id` under one `seed` are keyed independently through
    `SeedSequence([seed, stream_id])`, so trials and arms never share a sequence.
    """

    BLOCK = 4096

    def __init__(self, seed: int, stream_id: int = 0):
        for name, value in (("seed", seed), ("stream_id", stream_id)):
            if not isinstance(value, (int, np.integer)) or not 0 <= int(value) <= _UINT64_MAX:
                raise PreconditionError(f"{name} must be an integer in [0, 2^64), got {value!r}")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        bit_generator = np.random.Philox(np.random.SeedSequence([self.seed, self.stream_id]))
        self._generator = np.random.Generator(bit_generator)
        self._buffer: List[float] = []
        self._pos = 0

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def _refill(self):
        raw = self._generator.integers(0, _UNIFORM_BITS, size=self.BLOCK, dtype=np.int64)
        self._buffer = ((raw.astype(np.float64) + 0.5) * _UNIFORM_SCALE).tolist()
        self._pos = 0

    def uniform(self) -> float:
        """Next uniform in the open interval (0, 1)."""
        if self._pos >= len(self._buffer):
            self._refill()
        u = self._buffer[self._pos]
        self._pos += 1
        return u

    def uniforms(self, size: int) -> np.ndarray:
        """The next `size` uniforms, identical to `size` calls of `uniform()`."""
        out = np.empty(size, dtype=np.float64)
        filled = 0
        while filled < size:
            if self._pos >= len(self._buffer):
                self._refill()
            take = min(size - filled, len(self._buffer) - self._pos)
            out[filled:filled + take] = self._buffer[self._pos:self._pos + take]
            self._pos += take
            filled += take
        return out

    def normal(self) -> float:
        """Standard Gaussian draw (Gaussian quantile of one uniform)."""
        return float(ndtri(self.uniform()))

    def normals(self, size: int) -> np.ndarray:
        return ndtri(self.uniforms(size))


@dataclass(frozen=True)
class NoiseModel:
    """A reward-noise law plus optional tail metadata (alpha, sigma of the moment bound)."""
    kind: NoiseKind
    scale: float = 1.0      # Cauchy scale, also used by the Cauchy component of mixtures
    shape: float = 1.0      # Frechet shape
    weights: Tuple[float, float] = (0.7, 0.3)
    tail_alpha: Optional[float] = None
    tail_sigma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', NoiseKind(self.kind))
        object.__setattr__(self, 'weights', tuple(float(w) for w in self.weights))
        if not self.scale > 0:
            raise PreconditionError(f"noise scale must be positive, got {self.scale}")
        if not self.shape > 0:
            raise PreconditionError(f"noise shape must be positive, got {self.shape}")
        if len(self.weights) != 2 or min(self.weights) < 0 or not math.isclose(sum(self.weights), 1.0):
            raise PreconditionError(f"mixture weights must be two nonnegative numbers summing to 1, got {self.weights}")
        if self.tail_alpha is not None and not self.tail_alpha > 0:
            raise PreconditionError(f"tail_alpha must be positive, got {self.tail_alpha}")
        if self.tail_sigma is not None and not self.tail_sigma > 0:
            raise PreconditionError(f"tail_sigma must be positive, got {self.tail_sigma}")

    @classmethod
    def cauchy(cls, scale: float = 1.0) -> 'NoiseModel':
        return cls(NoiseKind.CAUCHY, scale=scale)

    @classmethod
    def frechet(cls, shape: float = 1.0) -> 'NoiseModel':
        return cls(NoiseKind.FRECHET, shape=shape)

    @classmethod
    def cauchy_exp(cls) -> 'NoiseModel':
        return cls(NoiseKind.CAUCHY_EXP)

    @classmethod
    def cauchy_pareto(cls) -> 'NoiseModel':
        return cls(NoiseKind.CAUCHY_PARETO)

    @classmethod
    def gaussian(cls) -> 'NoiseModel':
        return cls(NoiseKind.GAUSSIAN)

    @classmethod
    def zero(cls) -> 'NoiseModel':
        return cls(NoiseKind.ZERO)

    @property
    def is_mixture(self) -> bool:
        return self.kind in MIXTURE_KINDS

    @property
    def is_light_tailed(self) -> bool:
        return self.kind in (NoiseKind.GAUSSIAN, NoiseKind.ZERO)

    @property
    def label(self) -> str:
        if self.kind == NoiseKind.CAUCHY:
            return f"cauchy({self.scale:g})"
        if self.kind == NoiseKind.FRECHET:
            return f"frechet({self.shape:g})"
        return self.kind.value

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.kind in (NoiseKind.CAUCHY,) + MIXTURE_KINDS:
            data["scale"] = self.scale
        if self.kind == NoiseKind.FRECHET:
            data["shape"] = self.shape
        if self.is_mixture:
            data["weights"] = list(self.weights)
        if self.tail_alpha is not None:
            data["tail_alpha"] = self.tail_alpha
        if self.tail_sigma is not None:
            data["tail_sigma"] = self.tail_sigma
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'NoiseModel':
        kwargs = dict(data)
        kind = NoiseKind(kwargs.pop("kind"))
        if "weights" in kwargs:
            kwargs["weights"] = tuple(kwargs["weights"])
        return cls(kind, **kwargs)


def _cauchy(scale: float, u: float) -> float:
    return scale * math.tan(math.pi * (u - 0.5))


def _frechet(shape: float, u: float) -> float:
    return (-math.log(u)) ** (-1.0 / shape)


def _shifted_exp(u: float) -> float:
    # density e^{-(x+1)} on x >= -1
    return -1.0 - math.log(u)


def _shifted_pareto(u: float) -> float:
    return PARETO_SCALE * u ** (-1.0 / PARETO_TAIL) - PARETO_SCALE


def sample(model: NoiseModel, rng: RngStream) -> float:
    """Draw one noise value from `model`."""
    kind = model.kind
    if kind == NoiseKind.CAUCHY:
        return _cauchy(model.scale, rng.uniform())
    if kind == NoiseKind.GAUSSIAN:
        return rng.normal()
    if kind == NoiseKind.FRECHET:
        return _frechet(model.shape, rng.uniform())
    if kind == NoiseKind.ZERO:
        return 0.0
    pick = rng.uniform()
    u = rng.uniform()
    if pick < model.weights[0]:
        return _cauchy(model.scale, u)
    if kind == NoiseKind.CAUCHY_EXP:
        return _shifted_exp(u)
    return _shifted_pareto(u)


def sample_many(model: NoiseModel, rng: RngStream, size: int) -> np.ndarray:
    """Vectorised `sample`: consumes the stream exactly as `size` scalar calls would."""
    kind = model.kind
    if kind == NoiseKind.ZERO:
        return np.zeros(size)
    if not model.is_mixture:
        return _inverse_cdf(model, rng.uniforms(size))
    pairs = rng.uniforms(2 * size).reshape(size, 2)
    pick, u = pairs[:, 0], pairs[:, 1]
    heavy = model.scale * np.tan(np.pi * (u - 0.5))
    if kind == NoiseKind.CAUCHY_EXP:
        other = -1.0 - np.log(u)
    else:
        other = PARETO_SCALE * u ** (-1.0 / PARETO_TAIL) - PARETO_SCALE
    return np.where(pick < model.weights[0], heavy, other)


def _inverse_cdf(model: NoiseModel, q: ArrayLike) -> ArrayLike:
    kind = model.kind
    if kind == NoiseKind.CAUCHY:
        return model.scale * np.tan(np.pi * (np.asarray(q) - 0.5))
    if kind == NoiseKind.FRECHET:
        return (-np.log(q)) ** (-1.0 / model.shape)
    if kind == NoiseKind.GAUSSIAN:
        return ndtri(q)
    return np.zeros_like(np.asarray(q, dtype=float))


def quantile(model: NoiseModel, q: float) -> float:
    """Exact inverse CDF at `q` for the non-mixture laws."""
    if not 0.0 < q < 1.0:
        raise PreconditionError(f"quantile level must lie in (0, 1), got {q}")
    if model.is_mixture:
        raise UnsupportedOperationError(
            f"{model.kind.value} has no closed-form quantile; compare against cdf() instead"
        )
    return float(_inverse_cdf(model, q))


def cdf(model: NoiseModel, x: ArrayLike) -> ArrayLike:
    """Analytic CDF of `model`; mixtures are assembled from their component CDFs."""
    x = np.asarray(x, dtype=float)
    kind = model.kind
    if kind == NoiseKind.CAUCHY:
        out = _cauchy_cdf(model.scale, x)
    elif kind == NoiseKind.FRECHET:
        positive = np.where(x > 0, x, 1.0)
        out = np.where(x > 0, np.exp(-positive ** (-model.shape)), 0.0)
    elif kind == NoiseKind.GAUSSIAN:
        out = ndtr(x)
    elif kind == NoiseKind.ZERO:
        out = np.where(x >= 0, 1.0, 0.0)
    else:
        w_heavy, w_other = model.weights
        if kind == NoiseKind.CAUCHY_EXP:
            other = np.where(x >= -1.0, -np.expm1(-(np.maximum(x, -1.0) + 1.0)), 0.0)
        else:
            shifted = np.maximum(x, 0.0) + PARETO_SCALE
            other = np.where(x >= 0.0, 1.0 - (PARETO_SCALE / shifted) ** PARETO_TAIL, 0.0)
        out = w_heavy * _cauchy_cdf(model.scale, x) + w_other * other
    return out if out.ndim else float(out)


def _cauchy_cdf(scale: float, x: np.ndarray) -> np.ndarray:
    return 0.5 + np.arctan(x / scale) / np.pi
