"""
Scenario files: a CSV with one row per (trajectory, scenario, month, plant)
and a JSON sidecar next to it carrying the provenance.
"""

import json
import logging
import os

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import DataError, ParseError
from discharge_scenarios.ingest.base import month_range, ordinal_to_month
from discharge_scenarios.scenario.base import ScenarioSet

logger = logging.getLogger(__name__)

SCENARIO_COLUMNS = ["trajectory", "scenario", "year", "month", "plant_id", "discharge_m3s"]
FLOAT_FORMAT = "%.9g"


def sidecar_path(path):
    return os.path.splitext(path)[0] + ".json"


def scenario_frame(scenarios):
    k, s, t, p = np.indices(scenarios.values.shape).reshape(4, -1)
    years = np.array([y for y, _ in scenarios.months])
    months = np.array([m for _, m in scenarios.months])
    return pd.DataFrame(
        {
            "trajectory": np.asarray(scenarios.labels, dtype=object)[k],
            "scenario": s,
            "year": years[t],
            "month": months[t],
            "plant_id": np.asarray(scenarios.plants, dtype=object)[p],
            "discharge_m3s": scenarios.values.ravel(),
        },
        columns=SCENARIO_COLUMNS,
    )


def write_scenarios(scenarios, path):
    scenario_frame(scenarios).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    sidecar = {
        "shape": list(scenarios.values.shape),
        "labels": scenarios.labels,
        "plants": scenarios.plants,
        "provenance": scenarios.provenance,
    }
    with open(sidecar_path(path), "w") as f:
        json.dump(sidecar, f, indent=2, sort_keys=True)
        f.write("\n")
    logger.debug("Wrote %d scenario rows to %s", scenarios.values.size, path)


def load_scenarios(path):
    try:
        table = pd.read_csv(path, dtype={"trajectory": str, "plant_id": str})
    except (OSError, pd.errors.ParserError) as e:
        raise ParseError(str(e), path=path)
    if list(table.columns) != SCENARIO_COLUMNS:
        raise ParseError(f"expected columns {','.join(SCENARIO_COLUMNS)}", path=path, line=1)

    labels = list(dict.fromkeys(table["trajectory"]))
    plants = list(dict.fromkeys(table["plant_id"]))
    ordinals = table["year"].to_numpy() * 12 + table["month"].to_numpy() - 1
    first = int(ordinals.min())
    n_months = int(ordinals.max()) - first + 1
    n_scen = int(table["scenario"].max()) + 1
    shape = (len(labels), n_scen, n_months, len(plants))
    if len(table) != np.prod(shape):
        raise DataError(f"{path}: {len(table)} rows do not fill a {shape} scenario block")

    values = np.full(shape, np.nan)
    k = table["trajectory"].map({label: i for i, label in enumerate(labels)}).to_numpy()
    p = table["plant_id"].map({plant: i for i, plant in enumerate(plants)}).to_numpy()
    values[k, table["scenario"].to_numpy(), ordinals - first, p] = table["discharge_m3s"].to_numpy(dtype=float)
    if np.isnan(values).any():
        raise DataError(f"{path}: duplicate or missing scenario rows")

    provenance = {}
    if os.path.exists(sidecar_path(path)):
        with open(sidecar_path(path)) as f:
            provenance = json.load(f).get("provenance", {})
    months = month_range(ordinal_to_month(first), n_months)
    return ScenarioSet(values=values, months=months, plants=plants, labels=labels, provenance=provenance)
