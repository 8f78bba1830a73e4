"""
Discharge CSV reading and writing (``year,month,plant_id,discharge_m3s``).
Plants keep the order of their first appearance in the file.
"""

import logging

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import ParseError
from discharge_scenarios.ingest.base import DischargeHistory, format_month
from discharge_scenarios.ingest.forcing import FLOAT_FORMAT, month_axis, read_table

DISCHARGE_COLUMNS = ["year", "month", "plant_id", "discharge_m3s"]

logger = logging.getLogger(__name__)


def load_discharge(path):
    table = read_table(path, DISCHARGE_COLUMNS, {"year", "month"}, {"discharge_m3s"})
    if table.empty:
        raise ParseError("no data rows", path=path)

    non_positive = table["discharge_m3s"] <= 0
    if non_positive.any():
        raise ParseError("non-positive discharge", path=path, line=int(np.flatnonzero(non_positive.to_numpy())[0]) + 2)

    months, t_idx = month_axis(table, path)
    plants = list(pd.unique(table["plant_id"]))
    p_idx = pd.Index(plants).get_indexer(table["plant_id"])

    flat = t_idx * len(plants) + p_idx
    seen, first = np.unique(flat, return_index=True)
    if seen.size != flat.size:
        dup = np.setdiff1d(np.arange(flat.size), first)[0]
        raise ParseError("malformed row: duplicate (month, plant_id)", path=path, line=int(dup) + 2)

    values = np.full((len(months), len(plants)), np.nan)
    values[t_idx, p_idx] = table["discharge_m3s"].to_numpy()
    missing = np.argwhere(np.isnan(values))
    if missing.size:
        t, p = (int(i) for i in missing[0])
        raise ParseError(f"plant {plants[p]} is missing for month {format_month(months[t])}", path=path)

    logger.debug("Loaded discharge %s: %d months, %d plants", path, len(months), len(plants))
    return DischargeHistory(plants=plants, months=months, values=values)


def write_discharge(history, path):
    n_plants = history.n_plants
    frame = pd.DataFrame(
        {
            "year": np.repeat([y for y, _ in history.months], n_plants),
            "month": np.repeat([m for _, m in history.months], n_plants),
            "plant_id": np.tile(history.plants, history.n_months),
            "discharge_m3s": history.values.ravel(),
        },
        columns=DISCHARGE_COLUMNS,
    )
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Wrote discharge: %s", path)
