"""
Calibration of predicted quantile curves against observed discharge, and the
reference bands they are compared with.
"""

import logging

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import DataError, ShapeMismatch
from discharge_scenarios.evaluation.base import BANDS, REPORTED_BANDS, CoverageReport
from discharge_scenarios.netcore import forward
from discharge_scenarios.probloss import QuantileSet, ln3_quantiles

logger = logging.getLogger(__name__)


def coverage_from_quantiles(observed, quantiles, plants, levels, window=None):
    """
    ``observed`` is (month, plant) and ``quantiles`` (month, plant, 4).
    Band membership uses strict inequalities.
    """
    observed = np.asarray(observed, dtype=float)
    quantiles = np.asarray(quantiles, dtype=float)
    if quantiles.shape != observed.shape + (4,):
        raise ShapeMismatch(f"quantile curves have shape {quantiles.shape}, expected {observed.shape + (4,)}")
    q1, q2, q3, q4 = np.moveaxis(quantiles, -1, 0)
    masks = {
        "mid": (observed > q2) & (observed < q3),
        "below": observed < q1,
        "above": observed > q4,
        "lower_gap": (observed >= q1) & (observed <= q2),
        "upper_gap": (observed >= q3) & (observed <= q4),
    }
    counts = np.stack([masks[band].sum(axis=0) for band in BANDS], axis=1)
    return CoverageReport(plants=list(plants), levels=tuple(levels), counts=counts, n_months=observed.shape[0], window=window)


def coverage_table(model, forcing, history, window, qs=None):
    """
    Coverage of the model's quantile curves over ``window``. The network runs
    in eval mode over the normalized ``forcing`` from its first month.
    """
    qs = qs or QuantileSet()
    history.check_aligned(forcing)
    i0, i1 = window.indices(history.months)
    dist, _ = forward(model, forcing.slice(0, i1))
    curves = ln3_quantiles(dist.slice(i0, i1), qs)
    return coverage_from_quantiles(history.values[i0:i1], curves, history.plants, qs.levels, window=window)


def coverage_frame(reports):
    """
    Table with one row per (plant, reported band): the reference probability
    and one column of observed frequencies per entry of ``reports``
    (a mapping such as ``{"train": ..., "valid": ...}``).
    """
    names = list(reports)
    first = reports[names[0]]
    rows = []
    for p, plant in enumerate(first.plants):
        for b, band in enumerate(REPORTED_BANDS):
            row = {"plant_id": plant, "band": band, "reference": first.reference[b]}
            for name in names:
                if reports[name].plants != first.plants or reports[name].levels != first.levels:
                    raise DataError(f"coverage report {name!r} is not comparable with {names[0]!r}")
                row[name] = reports[name].observed()[p, b]
            rows.append(row)
    return pd.DataFrame(rows, columns=["plant_id", "band", "reference"] + names)


def write_coverage(reports, path):
    coverage_frame(reports).to_csv(path, index=False, float_format="%.1f", lineterminator="\n")
    logger.debug("Wrote coverage table to %s", path)


def coverage_density_pairs(report, history):
    """(plant, mean discharge, observed band frequencies) rows for density views."""
    values = history.values
    if report.window is not None:
        i0, i1 = report.window.indices(history.months)
        values = values[i0:i1]
    if list(history.plants) != list(report.plants):
        raise DataError("coverage report and history list different plants")
    freq = report.observed()
    return pd.DataFrame(
        {
            "plant_id": report.plants,
            "mean_discharge": values.mean(axis=0),
            "mid": freq[:, 0],
            "below": freq[:, 1],
            "above": freq[:, 2],
        }
    )


def climatology_quantiles(history, window, levels, months):
    """
    Empirical quantiles of ``history`` per calendar month and plant, taken
    over ``window``, laid out along ``months``: shape (len(months), plant, level).
    """
    i0, i1 = window.indices(history.months)
    calendar = np.array([m for _, m in history.months[i0:i1]])
    values = history.values[i0:i1]
    by_month = {}
    for m in sorted({m for _, m in months}):
        sample = values[calendar == m]
        if sample.shape[0] == 0:
            raise DataError(f"window {window.to_list()} has no observations for calendar month {m}")
        by_month[m] = np.moveaxis(np.quantile(sample, list(levels), axis=0), 0, -1)
    return np.stack([by_month[m] for _, m in months])


def scenario_band(scenarios, levels):
    """Per (month, plant) quantiles pooled over every trajectory and scenario."""
    pooled = scenarios.values.reshape((-1,) + scenarios.values.shape[2:])
    return np.moveaxis(np.quantile(pooled, list(levels), axis=0), 0, -1)
