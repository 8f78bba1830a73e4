from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import ConfigError, DataError, ParseError

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


# The three reported bands come first; the two gaps between them close the
# partition of every month.
BANDS = ("mid", "below", "above", "lower_gap", "upper_gap")
REPORTED_BANDS = BANDS[:3]


@dataclass
class CoverageReport:
    """
    Observed band counts per plant over ``n_months`` months. With quantile
    curves Q1 < Q2 < Q3 < Q4 the bands are ``Q2 < y < Q3`` (mid),
    ``y < Q1`` (below), ``y > Q4`` (above), and the two gaps in between.
    """

    plants: list
    levels: tuple
    counts: np.ndarray
    n_months: int
    window: object = None

    def __post_init__(self):
        self.levels = tuple(float(q) for q in self.levels)
        if len(self.levels) != 4:
            raise ConfigError(f"coverage needs exactly four quantile levels, got {len(self.levels)}")
        self.counts = np.asarray(self.counts, dtype=int)
        if self.counts.shape != (len(self.plants), len(BANDS)):
            raise DataError(f"coverage counts have shape {self.counts.shape}, expected {(len(self.plants), len(BANDS))}")
        if self.n_months < 1:
            raise DataError("coverage over an empty window")
        if np.any(self.counts.sum(axis=1) != self.n_months):
            raise DataError("coverage counts do not partition the window")

    @property
    def reference(self):
        """Reference probabilities (%) of the mid, below and above bands."""
        q1, q2, q3, q4 = self.levels
        return np.round(np.array([(q3 - q2) * 100.0, q1 * 100.0, (1.0 - q4) * 100.0]), 10)

    @property
    def frequencies(self):
        """Observed frequencies (%) per plant of every band in BANDS."""
        return self.counts / self.n_months * 100.0

    def observed(self):
        """Observed frequencies (%) of the three reported bands."""
        return self.frequencies[:, :3]


@dataclass
class ProductivityTable:
    """Productivity factor (MW per m³/s) per plant, optionally grouped into subsystems."""

    factors: dict
    subsystems: dict = field(default_factory=dict)

    def __post_init__(self):
        self.factors = {str(k): float(v) for k, v in self.factors.items()}
        for plant, factor in self.factors.items():
            if not factor > 0:
                raise DataError(f"productivity of {plant} must be positive, got {factor}")
        self.subsystems = {str(k): str(v) for k, v in (self.subsystems or {}).items()}
        unknown = set(self.subsystems) - set(self.factors)
        if unknown:
            raise DataError(f"subsystem given for plants without productivity: {', '.join(sorted(unknown))}")

    def subsystem_names(self):
        return sorted(set(self.subsystems.values()))

    def vector(self, plants, subsystem=None):
        """Factors aligned with ``plants``; plants outside ``subsystem`` weigh 0."""
        missing = [p for p in plants if p not in self.factors]
        if missing:
            raise DataError(f"no productivity factor for plant(s) {', '.join(missing)}")
        if subsystem is not None and subsystem not in self.subsystem_names():
            raise ConfigError(f"unknown subsystem {subsystem!r}")
        return np.array([self.factors[p] if subsystem is None or self.subsystems.get(p) == subsystem else 0.0 for p in plants])


def load_productivity(path):
    """Read a ``plant_id,productivity[,subsystem]`` CSV."""
    try:
        table = pd.read_csv(path, dtype=str, keep_default_na=False)
    except OSError as e:
        raise DataError(f"cannot read productivity table: {e}")
    except pd.errors.ParserError as e:
        raise ParseError(str(e), path=path)
    columns = list(table.columns)
    if columns not in (["plant_id", "productivity"], ["plant_id", "productivity", "subsystem"]):
        raise ParseError("expected columns plant_id,productivity[,subsystem]", path=path, line=1)
    factors = {}
    subsystems = {}
    for idx, row in table.iterrows():
        plant = row["plant_id"].strip()
        if plant in factors:
            raise ParseError(f"duplicate plant {plant}", path=path, line=idx + 2)
        try:
            factors[plant] = float(row["productivity"])
        except ValueError:
            raise ParseError(f"productivity {row['productivity']!r} is not a number", path=path, line=idx + 2)
        if "subsystem" in columns and row["subsystem"].strip():
            subsystems[plant] = row["subsystem"].strip()
    return ProductivityTable(factors=factors, subsystems=subsystems)
