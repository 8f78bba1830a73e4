import numpy as np

from discharge_scenarios.exceptions import ConfigError, DomainError
from discharge_scenarios.probloss.special import std_normal_quantile

DEFAULT_LEVELS = (0.10, 0.25, 0.60, 0.95)


class QuantileSet:
    """
    Monitored quantile levels together with their standard normal
    quantiles, which are computed once and reused by every loss evaluation.
    """

    def __init__(self, levels=DEFAULT_LEVELS):
        levels = tuple(float(q) for q in levels)
        if not levels:
            raise ConfigError("at least one quantile level is required")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ConfigError(f"quantile levels must be strictly increasing, got {list(levels)}")
        try:
            z_values = std_normal_quantile(np.asarray(levels))
        except DomainError as e:
            raise ConfigError(str(e))
        self.levels = levels
        self.q = np.asarray(levels)
        self.z_values = np.asarray(z_values, dtype=float)

    def __len__(self):
        return len(self.levels)

    def __eq__(self, other):
        return isinstance(other, QuantileSet) and self.levels == other.levels

    def __repr__(self):
        return f"QuantileSet({list(self.levels)})"
