"""
This package holds the probabilistic output: quantiles and samples of the
three-parameter log-normal, the inverse error function they rely on, and
the multi-quantile pinball loss with its exact gradient.
"""

from .base import DEFAULT_LEVELS, QuantileSet  # noqa: F401
from .lognormal import ln3_cdf, ln3_quantile, ln3_quantiles, ln3_sample  # noqa: F401
from .pinball import pinball_loss, pinball_terms  # noqa: F401
from .special import erfinv, std_normal_quantile  # noqa: F401

__all__ = [
    "DEFAULT_LEVELS",
    "QuantileSet",
    "erfinv",
    "ln3_cdf",
    "ln3_quantile",
    "ln3_quantiles",
    "ln3_sample",
    "pinball_loss",
    "pinball_terms",
    "std_normal_quantile",
]
