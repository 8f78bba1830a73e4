"""
Domain types for basin data: forcing grids, discharge histories, forecast
ensembles and normalization statistics.
"""

from dataclasses import dataclass, field

import numpy as np

from discharge_scenarios.exceptions import (
    AlignmentError,
    ConfigError,
    DataError,
    ShapeMismatch,
)

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


# Zero-variance cells (e.g. desert cells that never rain) get this floor.
STD_FLOOR = 1e-6


def month_ordinal(year, month):
    return int(year) * 12 + int(month) - 1


def ordinal_to_month(ordinal):
    return (int(ordinal) // 12, int(ordinal) % 12 + 1)


def month_range(start, n):
    first = month_ordinal(*start)
    return [ordinal_to_month(first + i) for i in range(n)]


def format_month(ym):
    return f"{ym[0]:04d}-{ym[1]:02d}"


def check_consecutive(months):
    """Raise DataError naming the first gap or repetition in ``months``."""
    for prev, curr in zip(months, months[1:]):
        if month_ordinal(*curr) != month_ordinal(*prev) + 1:
            raise DataError(f"month gap between {format_month(prev)} and {format_month(curr)}")


@dataclass(frozen=True)
class YearWindow:
    """Inclusive range of calendar years, e.g. ``YearWindow(1981, 2018)``."""

    start_year: int
    end_year: int

    def __post_init__(self):
        if self.end_year < self.start_year:
            raise ConfigError(f"window end {self.end_year} is before start {self.start_year}")

    @classmethod
    def from_value(cls, value):
        if isinstance(value, YearWindow):
            return value
        if value is None or len(value) != 2:
            raise ConfigError(f"a window must be a [start_year, end_year] pair, got {value!r}")
        return cls(int(value[0]), int(value[1]))

    def overlaps(self, other):
        return not (self.end_year < other.start_year or other.end_year < self.start_year)

    def indices(self, months):
        """
        Return the half-open index range ``(i0, i1)`` of ``months`` that falls
        inside the window. ``months`` must be consecutive, so the range is
        contiguous.
        """
        inside = [i for i, (y, _) in enumerate(months) if self.start_year <= y <= self.end_year]
        if not inside:
            raise DataError(f"empty window {self.start_year}-{self.end_year}")
        return inside[0], inside[-1] + 1

    def to_list(self):
        return [self.start_year, self.end_year]


@dataclass
class ForcingSeries:
    """
    Monthly precipitation (mm/month) and temperature (degrees C) grids over a
    basin. Cells outside ``mask`` hold NaN and are ignored everywhere.
    """

    months: list
    grid_shape: tuple
    precip: np.ndarray
    temp: np.ndarray
    mask: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.months = [(int(y), int(m)) for y, m in self.months]
        self.grid_shape = tuple(int(n) for n in self.grid_shape)
        self.precip = np.asarray(self.precip, dtype=float)
        self.temp = np.asarray(self.temp, dtype=float)
        self.mask = np.asarray(self.mask, dtype=bool)
        expected = (len(self.months),) + self.grid_shape
        for name in ("precip", "temp"):
            if getattr(self, name).shape != expected:
                raise ShapeMismatch(f"{name} has shape {getattr(self, name).shape}, expected {expected}")
        if self.mask.shape != self.grid_shape:
            raise ShapeMismatch(f"mask has shape {self.mask.shape}, expected {self.grid_shape}")
        if not self.mask.any():
            raise DataError("forcing mask selects no cells")
        check_consecutive(self.months)
        for name in ("precip", "temp"):
            if not np.all(np.isfinite(getattr(self, name)[:, self.mask])):
                raise DataError(f"{name} has non-finite values inside the basin mask")
        if not self.normalized and np.any(self.precip[:, self.mask] < 0):
            raise DataError("negative precipitation inside the basin mask")

    @property
    def n_months(self):
        return len(self.months)

    @property
    def n_cells(self):
        return int(self.mask.sum())

    def cells(self):
        """(row, col) of every basin cell, row-major."""
        return [tuple(int(i) for i in rc) for rc in np.argwhere(self.mask)]

    def precip_cells(self):
        """Precipitation as a (month, cell) matrix over the masked cells."""
        return self.precip[:, self.mask]

    def temp_cells(self):
        return self.temp[:, self.mask]

    def slice(self, i0, i1):
        return ForcingSeries(
            months=self.months[i0:i1],
            grid_shape=self.grid_shape,
            precip=self.precip[i0:i1],
            temp=self.temp[i0:i1],
            mask=self.mask,
            normalized=self.normalized,
        )

    def same_grid(self, other):
        return self.grid_shape == other.grid_shape and np.array_equal(self.mask, other.mask)


@dataclass
class DischargeHistory:
    """Observed discharge (m³/s) indexed (month, plant)."""

    plants: list
    months: list
    values: np.ndarray

    def __post_init__(self):
        self.plants = [str(p) for p in self.plants]
        self.months = [(int(y), int(m)) for y, m in self.months]
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.months), len(self.plants)):
            raise ShapeMismatch(f"discharge values have shape {self.values.shape}, expected {(len(self.months), len(self.plants))}")
        if len(set(self.plants)) != len(self.plants):
            raise DataError("duplicate plant ids in discharge history")
        check_consecutive(self.months)
        if not np.all(np.isfinite(self.values)) or np.any(self.values <= 0):
            raise DataError("discharge must be finite and strictly positive")

    @property
    def n_months(self):
        return len(self.months)

    @property
    def n_plants(self):
        return len(self.plants)

    def check_aligned(self, forcing):
        if self.months != forcing.months:
            raise AlignmentError(
                f"discharge months {format_month(self.months[0])}..{format_month(self.months[-1])} do not match "
                f"forcing months {format_month(forcing.months[0])}..{format_month(forcing.months[-1])}"
            )

    def slice(self, i0, i1):
        return DischargeHistory(plants=self.plants, months=self.months[i0:i1], values=self.values[i0:i1])


@dataclass
class EnsembleSet:
    """Forecast trajectories sharing a grid, a mask and a month axis."""

    trajectories: list
    start: tuple
    source_label: str = ""
    labels: list = field(default=None)

    def __post_init__(self):
        if not self.trajectories:
            raise DataError("an ensemble needs at least one trajectory")
        self.start = (int(self.start[0]), int(self.start[1]))
        if self.labels is None:
            self.labels = [f"traj_{i:03d}" for i in range(len(self.trajectories))]
        if len(self.labels) != len(self.trajectories) or len(set(self.labels)) != len(self.labels):
            raise DataError("ensemble labels must be unique, one per trajectory")
        first = self.trajectories[0]
        if first.months[0] != self.start:
            raise DataError(f"ensemble starts at {format_month(first.months[0])}, manifest says {format_month(self.start)}")
        for label, traj in zip(self.labels, self.trajectories):
            if not traj.same_grid(first) or traj.months != first.months:
                raise DataError(f"trajectory {label} does not share grid, mask and months with {self.labels[0]}")

    @property
    def horizon(self):
        return self.trajectories[0].n_months

    @property
    def months(self):
        return self.trajectories[0].months

    def __len__(self):
        return len(self.trajectories)


@dataclass
class NormStats:
    """Per-cell mean and standard deviation, full-grid shaped."""

    precip_mean: np.ndarray
    precip_std: np.ndarray
    temp_mean: np.ndarray
    temp_std: np.ndarray

    def __post_init__(self):
        for name in ("precip_mean", "precip_std", "temp_mean", "temp_std"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float))
        shape = self.precip_mean.shape
        for name in ("precip_std", "temp_mean", "temp_std"):
            if getattr(self, name).shape != shape:
                raise ShapeMismatch(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if np.any(self.precip_std <= 0) or np.any(self.temp_std <= 0):
            raise DataError("normalization standard deviations must be positive")

    @property
    def grid_shape(self):
        return tuple(self.precip_mean.shape)

    def to_dict(self):
        return {
            "grid_shape": list(self.grid_shape),
            "precip_mean": self.precip_mean.ravel().tolist(),
            "precip_std": self.precip_std.ravel().tolist(),
            "temp_mean": self.temp_mean.ravel().tolist(),
            "temp_std": self.temp_std.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        shape = tuple(data["grid_shape"])
        return cls(**{k: np.asarray(data[k], dtype=float).reshape(shape) for k in ("precip_mean", "precip_std", "temp_mean", "temp_std")})
