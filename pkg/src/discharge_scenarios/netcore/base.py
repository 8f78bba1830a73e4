"""
Types for the recurrent network: its configuration, its learnable
parameters, and the sequences it emits.
"""

from dataclasses import asdict, dataclass, fields

import numpy as np

from discharge_scenarios.exceptions import ConfigError, DataError, ShapeMismatch

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


# Order matters: checkpoints, gradient checks and optimizer state all walk
# the parameters in this order.
PARAM_NAMES = (
    "W_in_p",
    "W_in_t",
    "W_z",
    "U_z",
    "W_r",
    "U_r",
    "W_h",
    "U_h",
    "W_mu",
    "W_sigma",
    "W_theta",
    "b_mu",
    "b_sigma",
    "b_theta",
)

SIGMA_FLOOR = 1e-4


@dataclass(frozen=True)
class ModelConfig:
    n_precip_cells: int
    n_temp_cells: int
    n_plants: int
    embedding_dim: int = 32
    hidden_dim: int = 64

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, np.integer)) or value <= 0:
                raise ConfigError(f"{f.name} must be a positive integer, got {value!r}")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown model config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def to_dict(self):
        return asdict(self)

    def shapes(self):
        e, h, p = self.embedding_dim, self.hidden_dim, self.n_plants
        return {
            "W_in_p": (e, self.n_precip_cells),
            "W_in_t": (e, self.n_temp_cells),
            "W_z": (h, e),
            "U_z": (h, h),
            "W_r": (h, e),
            "U_r": (h, h),
            "W_h": (h, e),
            "U_h": (h, h),
            "W_mu": (p, h),
            "W_sigma": (p, h),
            "W_theta": (p, h),
            "b_mu": (p,),
            "b_sigma": (p,),
            "b_theta": (p,),
        }


class ParamArrays:
    """A fixed set of named float arrays, one per entry of PARAM_NAMES."""

    def __init__(self, config, arrays):
        self.config = config
        shapes = config.shapes()
        missing = set(PARAM_NAMES) - set(arrays)
        if missing:
            raise ConfigError(f"missing parameter arrays: {', '.join(sorted(missing))}")
        self.arrays = {}
        for name in PARAM_NAMES:
            value = np.array(arrays[name], dtype=float)
            if value.shape != shapes[name]:
                raise ShapeMismatch(f"{name} has shape {value.shape}, expected {shapes[name]}")
            self.arrays[name] = value

    def __getattr__(self, name):
        arrays = self.__dict__.get("arrays")
        if arrays is not None and name in arrays:
            return arrays[name]
        raise AttributeError(name)

    def __getitem__(self, name):
        return self.arrays[name]

    def items(self):
        return ((name, self.arrays[name]) for name in PARAM_NAMES)

    def copy(self):
        return type(self)(self.config, {name: value.copy() for name, value in self.items()})

    def equals(self, other):
        return self.config == other.config and all(np.array_equal(value, other[name]) for name, value in self.items())

    @classmethod
    def zeros_like(cls, other):
        return cls(other.config, {name: np.zeros_like(value) for name, value in other.items()})


class ModelParams(ParamArrays):
    """
    Every learnable weight. ``W_in_p`` (precipitation embedding) is kept
    non-negative by :func:`discharge_scenarios.netcore.project_nonneg`.
    """

    def check_finite(self):
        for name, value in self.items():
            if not np.all(np.isfinite(value)):
                return name
        return None


class Gradients(ParamArrays):
    """Gradient of a scalar loss with respect to every ModelParams field."""


@dataclass
class HiddenSeq:
    """GRU hidden states indexed (month, hidden_dim)."""

    h: np.ndarray


@dataclass
class DistSeq:
    """Three-parameter log-normal parameters indexed (month, plant)."""

    mu: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray
    months: list = None

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float)
        if not (self.mu.shape == self.sigma.shape == self.theta.shape):
            raise ShapeMismatch(f"mu/sigma/theta shapes differ: {self.mu.shape}, {self.sigma.shape}, {self.theta.shape}")
        if np.any(~(self.sigma > 0)):
            raise DataError("sigma must be strictly positive")
        if self.months is not None and len(self.months) != self.mu.shape[0]:
            raise ShapeMismatch(f"{len(self.months)} months for {self.mu.shape[0]} rows")

    @property
    def shape(self):
        return self.mu.shape

    def slice(self, i0, i1):
        months = None if self.months is None else self.months[i0:i1]
        return DistSeq(mu=self.mu[i0:i1], sigma=self.sigma[i0:i1], theta=self.theta[i0:i1], months=months)


@dataclass
class DistGrad:
    """Gradient of a scalar loss with respect to a DistSeq's three fields."""

    mu: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray

    @classmethod
    def zeros(cls, shape):
        return cls(mu=np.zeros(shape), sigma=np.zeros(shape), theta=np.zeros(shape))

    def padded(self, n_months, i0):
        """Embed this gradient at rows ``i0..`` of an all-zero ``n_months`` gradient."""
        out = DistGrad.zeros((n_months,) + self.mu.shape[1:])
        i1 = i0 + self.mu.shape[0]
        out.mu[i0:i1] = self.mu
        out.sigma[i0:i1] = self.sigma
        out.theta[i0:i1] = self.theta
        return out
