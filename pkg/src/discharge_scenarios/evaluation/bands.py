"""
Per-plant quantile band exports: a CSV and an SVG chart for each plant.

CSV columns are ``year, month, Q1..Qn`` followed, when given, by the
climatology quantiles ``clim_Q1..clim_Qn``, the observation, and 0/1 flags
telling whether the observation fell below the lowest or above the highest
band of the model and of the climatology.
"""

import logging
import os
import re

import matplotlib
import numpy as np
import pandas as pd
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from discharge_scenarios.exceptions import DataError, ShapeMismatch
from discharge_scenarios.ingest.base import format_month

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.9g"
SVG_SALT = "discharge-scenarios"
OUTER_COLOR = "#f4a582"
INNER_COLOR = "#d6604d"


def _safe_name(plant):
    return re.sub(r"[^A-Za-z0-9_.-]", "_", plant)


def band_frame(months, band, observed=None, climatology=None):
    """One plant's band table. ``band`` and ``climatology`` are (month, level)."""
    n_levels = band.shape[1]
    frame = {"year": [y for y, _ in months], "month": [m for _, m in months]}
    for i in range(n_levels):
        frame[f"Q{i + 1}"] = band[:, i]
    if climatology is not None:
        for i in range(n_levels):
            frame[f"clim_Q{i + 1}"] = climatology[:, i]
    if observed is not None:
        frame["observed"] = observed
        frame["below_band"] = (observed < band[:, 0]).astype(int)
        frame["above_band"] = (observed > band[:, -1]).astype(int)
        if climatology is not None:
            frame["below_climatology"] = (observed < climatology[:, 0]).astype(int)
            frame["above_climatology"] = (observed > climatology[:, -1]).astype(int)
    return pd.DataFrame(frame)


def _chart(path, plant, months, levels, band, observed=None, climatology=None):
    fig = Figure(figsize=(8.0, 3.5))
    FigureCanvasSVG(fig)
    ax = fig.add_subplot()
    x = np.arange(len(months))
    ax.fill_between(x, band[:, 0], band[:, -1], color=OUTER_COLOR, linewidth=0, label=f"q{levels[0]:g} to q{levels[-1]:g}")
    if band.shape[1] >= 4:
        ax.fill_between(x, band[:, 1], band[:, -2], color=INNER_COLOR, linewidth=0, label=f"q{levels[1]:g} to q{levels[-2]:g}")
    if climatology is not None:
        ax.plot(x, climatology[:, 0], linestyle="--", color="0.35", linewidth=0.8, label="climatology")
        ax.plot(x, climatology[:, -1], linestyle="--", color="0.35", linewidth=0.8)
    if observed is not None:
        ax.plot(x, observed, color="k", linewidth=1.0, label="observed")
    step = max(1, len(months) // 8)
    ax.set_xticks(x[::step])
    ax.set_xticklabels([format_month(m) for m in months[::step]], fontsize="small")
    ax.set_ylabel("discharge (m³/s)")
    ax.set_title(plant)
    ax.legend(loc="upper left", fontsize="small", frameon=False)
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})


def band_export(bands, months, plants, levels, out_dir, observed=None, climatology=None, prefix="band"):
    """
    Write ``<prefix>_<plant>.csv`` and ``<prefix>_<plant>.svg`` for every
    plant. ``bands`` and ``climatology`` are (month, plant, level) and
    ``observed`` (month, plant). Returns the written paths.
    """
    bands = np.asarray(bands, dtype=float)
    expected = (len(months), len(plants), len(levels))
    if bands.shape != expected:
        raise ShapeMismatch(f"bands have shape {bands.shape}, expected {expected}")
    if np.any(np.diff(bands, axis=-1) < 0):
        raise DataError("quantile bands cross")
    if climatology is not None and np.shape(climatology) != expected:
        raise ShapeMismatch(f"climatology has shape {np.shape(climatology)}, expected {expected}")
    if observed is not None and np.shape(observed) != expected[:2]:
        raise ShapeMismatch(f"observations have shape {np.shape(observed)}, expected {expected[:2]}")

    os.makedirs(out_dir, exist_ok=True)
    written = []
    for p, plant in enumerate(plants):
        obs = None if observed is None else np.asarray(observed, dtype=float)[:, p]
        clim = None if climatology is None else np.asarray(climatology, dtype=float)[:, p]
        stem = os.path.join(out_dir, f"{prefix}_{_safe_name(plant)}")
        band_frame(months, bands[:, p], obs, clim).to_csv(stem + ".csv", index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        _chart(stem + ".svg", plant, months, levels, bands[:, p], obs, clim)
        written += [stem + ".csv", stem + ".svg"]
        logger.debug("Wrote band export for %s", plant)
    return written
