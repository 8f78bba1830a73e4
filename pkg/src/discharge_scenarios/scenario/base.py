from dataclasses import dataclass, field, fields

import numpy as np

from discharge_scenarios.exceptions import ConfigError, DataError, NumericFault, ShapeMismatch

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


SCENARIO_FLOOR = 1e-3
DEFAULT_SHRINKAGE = 0.1


@dataclass
class GenerateConfig:
    n_scen: int = 30
    reorder: bool = True
    diagonal: bool = False
    shrinkage: float = DEFAULT_SHRINKAGE
    workers: int = 1

    def __post_init__(self):
        if self.n_scen < 1:
            raise ConfigError(f"n_scen must be at least 1, got {self.n_scen}")
        if not 0.0 <= self.shrinkage <= 1.0:
            raise ConfigError(f"shrinkage must lie in [0, 1], got {self.shrinkage}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {f.name for f in fields(cls)}
        if unknown:
            raise ConfigError(f"unknown generate config keys: {', '.join(sorted(unknown))}")
        return cls(**data)


@dataclass
class ScenarioSet:
    """Discharge scenarios (m³/s) indexed (trajectory, scenario, month, plant)."""

    values: np.ndarray
    months: list
    plants: list
    labels: list
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        self.months = [(int(y), int(m)) for y, m in self.months]
        self.plants = [str(p) for p in self.plants]
        self.labels = [str(label) for label in self.labels]
        if self.values.ndim != 4:
            raise ShapeMismatch(f"scenario values must be 4-D, got shape {self.values.shape}")
        expected = (len(self.labels), self.values.shape[1], len(self.months), len(self.plants))
        if self.values.shape != expected:
            raise ShapeMismatch(f"scenario values have shape {self.values.shape}, expected {expected}")
        if not np.all(self.values >= SCENARIO_FLOOR):
            raise DataError(f"scenario values must be at least {SCENARIO_FLOOR}")

    @property
    def n_traj(self):
        return self.values.shape[0]

    @property
    def n_scen(self):
        return self.values.shape[1]

    @property
    def horizon(self):
        return self.values.shape[2]

    def with_values(self, values, **provenance):
        return ScenarioSet(values=values, months=self.months, plants=self.plants, labels=self.labels, provenance={**self.provenance, **provenance})


@dataclass
class SerialModel:
    """
    Lag-one regression ``y(t) = c + phi_y y(t-1) + phi_h h(t-1) + e`` with
    residual covariance ``theta``. ``phi_y`` is always stored as a full
    plant x plant matrix; in diagonal mode its off-diagonal entries are 0.
    """

    intercept: np.ndarray
    phi_y: np.ndarray
    phi_h: np.ndarray
    theta: np.ndarray
    shrinkage: float = DEFAULT_SHRINKAGE
    diagonal: bool = False

    def __post_init__(self):
        self.intercept = np.asarray(self.intercept, dtype=float)
        self.phi_y = np.asarray(self.phi_y, dtype=float)
        self.phi_h = np.asarray(self.phi_h, dtype=float)
        self.theta = np.atleast_2d(np.asarray(self.theta, dtype=float))
        n_plants = self.intercept.shape[0]
        if self.phi_y.shape != (n_plants, n_plants) or self.theta.shape != (n_plants, n_plants):
            raise ShapeMismatch(f"phi_y {self.phi_y.shape} and theta {self.theta.shape} must be {n_plants}x{n_plants}")
        if self.phi_h.ndim != 2 or self.phi_h.shape[0] != n_plants:
            raise ShapeMismatch(f"phi_h has shape {self.phi_h.shape}, expected ({n_plants}, hidden_dim)")
        if not np.array_equal(self.theta, self.theta.T):
            raise NumericFault("residual covariance is not symmetric")
        if np.linalg.eigvalsh(self.theta).min() <= 0:
            raise NumericFault("residual covariance is not positive definite")
        self.theta_inv = np.linalg.inv(self.theta)
        # the inverse of a symmetric matrix is symmetric; drop round-off
        self.theta_inv = 0.5 * (self.theta_inv + self.theta_inv.T)

    @property
    def n_plants(self):
        return self.intercept.shape[0]

    @property
    def hidden_dim(self):
        return self.phi_h.shape[1]

    def predict(self, y_prev, h_prev):
        """Predicted next month for each row of ``y_prev`` given a shared ``h_prev``."""
        return self.intercept + np.asarray(y_prev) @ self.phi_y.T + self.phi_h @ np.asarray(h_prev)

    def to_dict(self):
        return {
            "intercept": self.intercept.tolist(),
            "phi_y": self.phi_y.tolist(),
            "phi_h": self.phi_h.tolist(),
            "theta": self.theta.tolist(),
            "shrinkage": self.shrinkage,
            "diagonal": self.diagonal,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(**data)
