"""
Per-cell standardization of forcing grids.

Temperature is standardized as ``(value - mean) / std``. Precipitation is
standardized the same way and then shifted by ``mean / std`` so that raw
0 mm lands on 0, the bottom of its standardized range; a month without
rain therefore feeds nothing into the non-negative precipitation
embedding.
"""

import numpy as np

from discharge_scenarios.exceptions import ShapeMismatch
from discharge_scenarios.ingest.base import STD_FLOOR, ForcingSeries, NormStats


def compute_norm_stats(series, window=None):
    """Statistics over ``window`` (a YearWindow) only, or the whole series."""
    if window is not None:
        series = series.slice(*window.indices(series.months))
    mask = series.mask

    def cell_stats(values):
        mean = np.zeros(series.grid_shape)
        std = np.ones(series.grid_shape)
        mean[mask] = values[:, mask].mean(axis=0)
        std[mask] = np.maximum(values[:, mask].std(axis=0), STD_FLOOR)
        return mean, std

    precip_mean, precip_std = cell_stats(series.precip)
    temp_mean, temp_std = cell_stats(series.temp)
    return NormStats(precip_mean=precip_mean, precip_std=precip_std, temp_mean=temp_mean, temp_std=temp_std)


def _check_shape(series, stats):
    if series.grid_shape != stats.grid_shape:
        raise ShapeMismatch(f"normalization stats are for grid {stats.grid_shape}, forcing grid is {series.grid_shape}")


def normalize(series, stats):
    _check_shape(series, stats)
    if series.normalized:
        return series
    precip = (series.precip - stats.precip_mean) / stats.precip_std
    precip = precip + stats.precip_mean / stats.precip_std
    temp = (series.temp - stats.temp_mean) / stats.temp_std
    return ForcingSeries(months=series.months, grid_shape=series.grid_shape, precip=precip, temp=temp, mask=series.mask, normalized=True)


def denormalize(series, stats):
    _check_shape(series, stats)
    if not series.normalized:
        return series
    precip = (series.precip - stats.precip_mean / stats.precip_std) * stats.precip_std + stats.precip_mean
    # round-off can push raw zeros a hair below 0
    precip = np.maximum(precip, 0.0)
    temp = series.temp * stats.temp_std + stats.temp_mean
    return ForcingSeries(months=series.months, grid_shape=series.grid_shape, precip=precip, temp=temp, mask=series.mask, normalized=False)
