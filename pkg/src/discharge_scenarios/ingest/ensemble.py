"""
Ensemble directories: one forcing CSV per trajectory (``traj_000.csv`` …)
plus ``manifest.json`` with ``start_year``, ``start_month`` and ``horizon``
(and an optional free-text ``source_label``).
"""

import json
import logging
import os
import re

from discharge_scenarios.exceptions import DataError
from discharge_scenarios.ingest.base import EnsembleSet, format_month
from discharge_scenarios.ingest.forcing import load_forcing, write_forcing

MANIFEST_NAME = "manifest.json"
TRAJECTORY_PATTERN = re.compile(r"^traj_(\d+)\.csv$")

logger = logging.getLogger(__name__)


def load_manifest(directory):
    path = os.path.join(directory, MANIFEST_NAME)
    if not os.path.exists(path):
        raise DataError(f"Ensemble manifest not found: {path}")
    try:
        with open(path, "r") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as e:
        raise DataError(f"Ensemble manifest is not valid JSON: {path}: {e}")
    for key in ("start_year", "start_month", "horizon"):
        if key not in manifest:
            raise DataError(f"Ensemble manifest is missing '{key}': {path}")
    return manifest


def load_ensemble(directory, grid_shape=None):
    manifest = load_manifest(directory)
    names = sorted(n for n in os.listdir(directory) if TRAJECTORY_PATTERN.match(n))
    if not names:
        raise DataError(f"No traj_*.csv files found in ensemble directory: {directory}")

    start = (int(manifest["start_year"]), int(manifest["start_month"]))
    horizon = int(manifest["horizon"])
    trajectories = []
    for name in names:
        traj = load_forcing(os.path.join(directory, name), grid_shape=grid_shape)
        if traj.months[0] != start or traj.n_months != horizon:
            raise DataError(
                f"{name} covers {format_month(traj.months[0])} + {traj.n_months} months, " f"manifest says {format_month(start)} + {horizon}"
            )
        trajectories.append(traj)

    logger.debug("Loaded ensemble %s: %d trajectories", directory, len(names))
    return EnsembleSet(
        trajectories=trajectories,
        start=start,
        source_label=str(manifest.get("source_label", "")),
        labels=[os.path.splitext(n)[0] for n in names],
    )


def write_ensemble(ensemble, directory):
    os.makedirs(directory, exist_ok=True)
    for label, traj in zip(ensemble.labels, ensemble.trajectories):
        write_forcing(traj, os.path.join(directory, f"{label}.csv"))
    manifest = {
        "start_year": ensemble.start[0],
        "start_month": ensemble.start[1],
        "horizon": ensemble.horizon,
        "source_label": ensemble.source_label,
    }
    with open(os.path.join(directory, MANIFEST_NAME), "w") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Wrote ensemble: %s", directory)
