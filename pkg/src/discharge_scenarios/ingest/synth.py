"""
Synthetic basins with a known generative law, used as test oracles.

Discharge follows

    y(t, p) = b[month(t), p] * (1 + sum_c w[c, p] * P[c, t - L]) * exp(s*z - s**2/2)

with z standard normal, so y is log-normal with location parameter
``log(b * (1 + w.P)) - s**2/2``, scale ``s`` and zero shift, and its mean
equals the deterministic part. Precipitation before the first month is
taken as zero when ``L = 1``.
"""

from dataclasses import asdict, dataclass, field, fields
import json

import numpy as np

from discharge_scenarios.exceptions import ConfigError
from discharge_scenarios.ingest.base import DischargeHistory, EnsembleSet, ForcingSeries, month_range
from discharge_scenarios.probloss.base import DEFAULT_LEVELS, QuantileSet


def _seasonal(mean, amplitude):
    phase = 2.0 * np.pi * np.arange(12) / 12.0
    return (mean + amplitude * np.cos(phase)).tolist()


@dataclass
class SynthSpec:
    grid_shape: list
    n_plants: int
    horizon: int
    base: list
    weights: list
    noise: float
    lag: int = 0
    start: list = field(default_factory=lambda: [1981, 1])
    precip_mean: list = field(default_factory=lambda: _seasonal(120.0, 80.0))
    precip_shape: float = 2.0
    temp_mean: list = field(default_factory=lambda: _seasonal(24.0, 3.0))
    temp_noise: float = 1.0
    plant_ids: list = None
    levels: list = field(default_factory=lambda: list(DEFAULT_LEVELS))

    def __post_init__(self):
        if len(self.grid_shape) != 2 or min(self.grid_shape) < 1:
            raise ConfigError(f"grid_shape must be two positive integers, got {self.grid_shape!r}")
        self.grid_shape = [int(n) for n in self.grid_shape]
        if self.n_plants < 1:
            raise ConfigError("n_plants must be at least 1")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1 month")
        if self.lag not in (0, 1):
            raise ConfigError(f"lag must be 0 or 1, got {self.lag}")
        if not self.noise > 0:
            raise ConfigError(f"noise scale must be positive, got {self.noise}")
        if np.any(self.base_matrix() <= 0):
            raise ConfigError("seasonal base values must be positive")
        if np.any(self.weight_matrix() < 0):
            raise ConfigError("sensitivity weights must be non-negative")
        if len(self.precip_mean) != 12 or np.any(np.asarray(self.precip_mean) <= 0):
            raise ConfigError("precip_mean needs 12 positive monthly values")
        if len(self.temp_mean) != 12:
            raise ConfigError("temp_mean needs 12 monthly values")
        if not self.precip_shape > 0 or self.temp_noise < 0:
            raise ConfigError("precip_shape must be positive and temp_noise non-negative")
        if self.plant_ids is None:
            self.plant_ids = [f"PLANT_{i + 1:02d}" for i in range(self.n_plants)]
        if len(self.plant_ids) != self.n_plants:
            raise ConfigError(f"plant_ids has {len(self.plant_ids)} entries, n_plants is {self.n_plants}")
        QuantileSet(self.levels)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown synth spec keys: {', '.join(sorted(unknown))}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"invalid synth spec: {e}")

    @classmethod
    def from_json(cls, path, **defaults):
        """Load a standalone spec file; keys it omits fall back to ``defaults``."""
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"synth spec not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: the synth spec must be a JSON object")
        return cls.from_dict({**defaults, **data})

    def to_dict(self):
        return asdict(self)

    @property
    def n_cells(self):
        return self.grid_shape[0] * self.grid_shape[1]

    def base_matrix(self):
        """(12, n_plants): one seasonal cycle shared or one per plant."""
        base = np.asarray(self.base, dtype=float)
        if base.shape == (12,):
            base = np.repeat(base[:, None], self.n_plants, axis=1)
        if base.shape != (12, self.n_plants):
            raise ConfigError(f"base must have 12 values or 12 x {self.n_plants}, got shape {base.shape}")
        return base

    def weight_matrix(self):
        """(cells, n_plants), cells row-major."""
        w = np.asarray(self.weights, dtype=float)
        if w.shape == tuple(self.grid_shape) + (self.n_plants,):
            w = w.reshape(self.n_cells, self.n_plants)
        if w.shape != (self.n_cells, self.n_plants):
            raise ConfigError(f"weights must be {self.n_cells} x {self.n_plants}, got shape {w.shape}")
        return w


@dataclass
class GroundTruth:
    """Exact parameters and quantiles of the generative law per (month, plant)."""

    months: list
    plants: list
    levels: list
    mu: np.ndarray
    sigma: np.ndarray
    theta: np.ndarray
    mean: np.ndarray
    quantiles: np.ndarray

    def to_dict(self):
        return {
            "months": [list(m) for m in self.months],
            "plants": list(self.plants),
            "levels": list(self.levels),
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "theta": self.theta.tolist(),
            "mean": self.mean.tolist(),
            "quantiles": self.quantiles.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        arrays = {k: np.asarray(data[k], dtype=float) for k in ("mu", "sigma", "theta", "mean", "quantiles")}
        return cls(months=[tuple(m) for m in data["months"]], plants=data["plants"], levels=data["levels"], **arrays)

    @classmethod
    def load(cls, path):
        with open(path, "r") as f:
            return cls.from_dict(json.load(f))

    def write(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=1)
            f.write("\n")


def _draw_forcing(spec, rng, months):
    rows, cols = spec.grid_shape
    cal = np.array([m - 1 for _, m in months])
    scale = np.asarray(spec.precip_mean)[cal] / spec.precip_shape
    precip = rng.gamma(spec.precip_shape, 1.0, size=(len(months), rows, cols)) * scale[:, None, None]
    temp = np.asarray(spec.temp_mean)[cal][:, None, None] + spec.temp_noise * rng.standard_normal((len(months), rows, cols))
    return ForcingSeries(months=months, grid_shape=(rows, cols), precip=precip, temp=temp, mask=np.ones((rows, cols), dtype=bool))


def deterministic_discharge(spec, forcing):
    """``b * (1 + w.P)`` per (month, plant), with the configured lag."""
    cells = forcing.precip_cells()
    if spec.lag == 1:
        cells = np.vstack([np.zeros((1, cells.shape[1])), cells[:-1]])
    cal = np.array([m - 1 for _, m in forcing.months])
    return spec.base_matrix()[cal] * (1.0 + cells @ spec.weight_matrix())


def apply_noise(drive, noise, z):
    """Multiplicative mean-one log-normal noise."""
    return drive * np.exp(noise * z - 0.5 * noise**2)


def synth_generate(spec, seed):
    """Return (ForcingSeries, DischargeHistory, GroundTruth) for ``spec``."""
    rng = np.random.default_rng(seed)
    months = month_range(tuple(spec.start), spec.horizon)
    forcing = _draw_forcing(spec, rng, months)
    drive = deterministic_discharge(spec, forcing)
    z = rng.standard_normal(drive.shape)
    history = DischargeHistory(plants=spec.plant_ids, months=months, values=apply_noise(drive, spec.noise, z))

    qs = QuantileSet(spec.levels)
    mu = np.log(drive) - 0.5 * spec.noise**2
    sigma = np.full_like(mu, spec.noise)
    truth = GroundTruth(
        months=months,
        plants=list(spec.plant_ids),
        levels=list(qs.levels),
        mu=mu,
        sigma=sigma,
        theta=np.zeros_like(mu),
        mean=drive,
        quantiles=np.exp(mu[..., None] + sigma[..., None] * qs.z_values),
    )
    return forcing, history, truth


def synth_ensemble(spec, seed, n_traj, horizon, start, source_label="synthetic"):
    """Forecast-like trajectories drawn from the synthetic basin's climate."""
    months = month_range(tuple(start), horizon)
    streams = np.random.SeedSequence([int(seed), 0xE5E]).spawn(n_traj)
    trajectories = [_draw_forcing(spec, np.random.default_rng(s), months) for s in streams]
    return EnsembleSet(trajectories=trajectories, start=tuple(start), source_label=source_label)
