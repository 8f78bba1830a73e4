"""
Inflow energy: discharge weighted by plant productivity and summed over
plants, reported as annual means in percent of a historical average.
"""

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import ConfigError, DataError
from discharge_scenarios.ingest.base import DischargeHistory


def energy_series(values, plants, productivity, subsystem=None):
    """``sum_p rho_p * y[..., p]`` over the last axis of ``values``."""
    return np.asarray(values, dtype=float) @ productivity.vector(plants, subsystem)


def historical_baseline(history, productivity, window=None, subsystem=None):
    """Mean monthly inflow energy of ``history`` over ``window``."""
    values = history.values
    if window is not None:
        i0, i1 = window.indices(history.months)
        values = values[i0:i1]
    baseline = float(energy_series(values, history.plants, productivity, subsystem).mean())
    if not baseline > 0:
        raise DataError("historical inflow energy baseline is not positive")
    return baseline


def _annual_means(energy, months):
    """Annual means along the last axis of ``energy``: (years, array)."""
    years = np.array([y for y, _ in months])
    unique = np.unique(years)
    return unique, np.stack([energy[..., years == y].mean(axis=-1) for y in unique], axis=-1)


def inflow_energy(source, productivity, baseline=None, subsystem=None):
    """
    Annual mean inflow energy of a DischargeHistory or a ScenarioSet, in
    percent of ``baseline``. For a history the baseline defaults to its own
    mean; scenarios need one. Scenario results have one row per
    (trajectory, scenario, year).
    """
    if isinstance(source, DischargeHistory):
        if baseline is None:
            baseline = historical_baseline(source, productivity, subsystem=subsystem)
        energy = energy_series(source.values, source.plants, productivity, subsystem)
        years, annual = _annual_means(energy, source.months)
        return pd.DataFrame({"year": years, "energy": annual, "energy_pct": annual / baseline * 100.0})

    if baseline is None:
        raise ConfigError("scenario inflow energy needs a historical baseline")
    # (trajectory, scenario, month)
    energy = energy_series(source.values, source.plants, productivity, subsystem)
    years, annual = _annual_means(energy, source.months)
    k, s, y = np.indices(annual.shape).reshape(3, -1)
    return pd.DataFrame(
        {
            "year": years[y],
            "trajectory": np.asarray(source.labels, dtype=object)[k],
            "scenario": s,
            "energy": annual.ravel(),
            "energy_pct": annual.ravel() / baseline * 100.0,
        }
    )


def energy_summary(frame, levels=(0.10, 0.50, 0.90)):
    """Per-year quantiles of ``energy_pct`` across scenario rows."""
    grouped = frame.groupby("year", sort=True)["energy_pct"]
    mean = grouped.mean()
    summary = {"year": mean.index.to_numpy()}
    for q in levels:
        summary[f"p{round(q * 100):02d}"] = grouped.quantile(q).to_numpy()
    summary["mean"] = mean.to_numpy()
    return pd.DataFrame(summary)
