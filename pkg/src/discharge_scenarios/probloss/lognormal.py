"""
The three-parameter log-normal: ``X = exp(mu + sigma*Z) + theta`` with
``Z`` standard normal. ``theta`` is the lower bound of the support.
"""

import numpy as np
from scipy import special

from discharge_scenarios.exceptions import DomainError
from discharge_scenarios.probloss.special import std_normal_quantile


def _check_sigma(sigma):
    if np.any(~(np.asarray(sigma) > 0)):
        raise DomainError("sigma must be strictly positive")


def ln3_quantile(mu, sigma, theta, q):
    _check_sigma(sigma)
    z = std_normal_quantile(q)
    return np.exp(mu + sigma * z) + theta


def ln3_quantiles(dist, qs):
    """Quantile curves for every level of ``qs``: shape ``dist.shape + (len(qs),)``."""
    return np.exp(dist.mu[..., None] + dist.sigma[..., None] * qs.z_values) + dist.theta[..., None]


def ln3_sample(mu, sigma, theta, rng, size=None):
    if size is None:
        size = np.broadcast(np.asarray(mu), np.asarray(sigma), np.asarray(theta)).shape
    z = rng.standard_normal(size)
    return np.exp(mu + sigma * z) + theta


def ln3_cdf(y, mu, sigma, theta):
    _check_sigma(sigma)
    y = np.asarray(y, dtype=float)
    shifted = y - theta
    with np.errstate(divide="ignore", invalid="ignore"):
        standardized = (np.log(np.where(shifted > 0, shifted, 1.0)) - mu) / sigma
    return np.where(shifted > 0, special.ndtr(standardized), 0.0)
