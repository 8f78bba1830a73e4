"""
Forcing CSV reading and writing.

The file has the header ``year,month,row,col,precip_mm,temp_c`` and one line
per (month, cell). Cells that never appear are outside the basin mask; a cell
that appears in some months must appear in all of them.
"""

import logging

import numpy as np
import pandas as pd

from discharge_scenarios.exceptions import ParseError
from discharge_scenarios.ingest.base import (
    ForcingSeries,
    format_month,
    ordinal_to_month,
)

FORCING_COLUMNS = ["year", "month", "row", "col", "precip_mm", "temp_c"]
FLOAT_FORMAT = "%.9g"

logger = logging.getLogger(__name__)


def read_table(path, columns, integer_columns, float_columns):
    """
    Read a CSV with an exact header into a DataFrame of numbers.

    Everything is read as text first so that a malformed field can be
    reported with the line number it came from (the header is line 1).
    """
    try:
        raw = pd.read_csv(path, dtype=str, keep_default_na=False, skip_blank_lines=False)
    except pd.errors.EmptyDataError:
        raise ParseError("file is empty", path=path)
    except pd.errors.ParserError as e:
        raise ParseError(f"malformed row: {e}", path=path)

    if list(raw.columns) != columns:
        raise ParseError(f"expected header {','.join(columns)}, got {','.join(raw.columns)}", path=path, line=1)

    out = pd.DataFrame(index=raw.index)
    for name in columns:
        if name in integer_columns or name in float_columns:
            values = pd.to_numeric(raw[name].str.strip(), errors="coerce")
            bad = values.isna() | ~np.isfinite(values)
            if name in integer_columns:
                bad |= values != values.round()
            if bad.any():
                idx = int(np.flatnonzero(bad.to_numpy())[0])
                raise ParseError(f"malformed row: bad {name} value {raw[name].iloc[idx]!r}", path=path, line=idx + 2)
            out[name] = values.astype(int) if name in integer_columns else values.astype(float)
        else:
            text = raw[name].str.strip()
            empty = text == ""
            if empty.any():
                idx = int(np.flatnonzero(empty.to_numpy())[0])
                raise ParseError(f"malformed row: empty {name}", path=path, line=idx + 2)
            out[name] = text

    bad_month = (out["month"] < 1) | (out["month"] > 12)
    if bad_month.any():
        idx = int(np.flatnonzero(bad_month.to_numpy())[0])
        raise ParseError(f"malformed row: month {out['month'].iloc[idx]} out of range", path=path, line=idx + 2)
    return out


def month_axis(table, path):
    """
    Return (months, month index per row). Months must form a gap-free
    sequence; the error names the first line of the month after a gap.
    """
    ordinals = table["year"].to_numpy() * 12 + table["month"].to_numpy() - 1
    unique = np.unique(ordinals)
    gaps = np.flatnonzero(np.diff(unique) != 1)
    if gaps.size:
        before, after = ordinal_to_month(unique[gaps[0]]), ordinal_to_month(unique[gaps[0] + 1])
        line = int(np.flatnonzero(ordinals == unique[gaps[0] + 1])[0]) + 2
        raise ParseError(f"month gap between {format_month(before)} and {format_month(after)}", path=path, line=line)
    months = [ordinal_to_month(o) for o in unique]
    return months, np.searchsorted(unique, ordinals)


def load_forcing(path, grid_shape=None):
    table = read_table(path, FORCING_COLUMNS, {"year", "month", "row", "col"}, {"precip_mm", "temp_c"})
    if table.empty:
        raise ParseError("no data rows", path=path)

    negative = table["precip_mm"] < 0
    if negative.any():
        raise ParseError("negative precipitation", path=path, line=int(np.flatnonzero(negative.to_numpy())[0]) + 2)
    if (table["row"] < 0).any() or (table["col"] < 0).any():
        idx = int(np.flatnonzero(((table["row"] < 0) | (table["col"] < 0)).to_numpy())[0])
        raise ParseError("malformed row: negative cell index", path=path, line=idx + 2)

    months, t_idx = month_axis(table, path)
    rows = table["row"].to_numpy()
    cols = table["col"].to_numpy()
    if grid_shape is None:
        grid_shape = (int(rows.max()) + 1, int(cols.max()) + 1)
    elif rows.max() >= grid_shape[0] or cols.max() >= grid_shape[1]:
        idx = int(np.flatnonzero((rows >= grid_shape[0]) | (cols >= grid_shape[1]))[0])
        raise ParseError(f"malformed row: cell outside grid {grid_shape}", path=path, line=idx + 2)

    flat = (t_idx * grid_shape[0] + rows) * grid_shape[1] + cols
    seen, first = np.unique(flat, return_index=True)
    if seen.size != flat.size:
        dup = np.setdiff1d(np.arange(flat.size), first)[0]
        raise ParseError("malformed row: duplicate (month, cell)", path=path, line=int(dup) + 2)

    shape = (len(months),) + tuple(grid_shape)
    precip = np.full(shape, np.nan)
    temp = np.full(shape, np.nan)
    precip[t_idx, rows, cols] = table["precip_mm"].to_numpy()
    temp[t_idx, rows, cols] = table["temp_c"].to_numpy()

    present = ~np.isnan(precip)
    mask = present.any(axis=0)
    incomplete = mask & ~present.all(axis=0)
    if incomplete.any():
        r, c = (int(i) for i in np.argwhere(incomplete)[0])
        t = int(np.flatnonzero(~present[:, r, c])[0])
        raise ParseError(f"cell ({r}, {c}) is missing for month {format_month(months[t])}", path=path)

    logger.debug("Loaded forcing %s: %d months, %d cells", path, len(months), int(mask.sum()))
    return ForcingSeries(months=months, grid_shape=grid_shape, precip=precip, temp=temp, mask=mask)


def forcing_frame(series):
    cells = series.cells()
    n_cells = len(cells)
    years = np.repeat([y for y, _ in series.months], n_cells)
    months = np.repeat([m for _, m in series.months], n_cells)
    rows = np.tile([r for r, _ in cells], series.n_months)
    cols = np.tile([c for _, c in cells], series.n_months)
    return pd.DataFrame(
        {
            "year": years,
            "month": months,
            "row": rows,
            "col": cols,
            "precip_mm": series.precip_cells().ravel(),
            "temp_c": series.temp_cells().ravel(),
        },
        columns=FORCING_COLUMNS,
    )


def write_forcing(series, path):
    forcing_frame(series).to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug("Wrote forcing: %s", path)

