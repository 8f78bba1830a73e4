"""
This package holds the reports: quantile-band coverage against reference
probabilities, climatology and scenario bands, inflow energy, and per-plant
band exports.
"""

from .bands import band_export, band_frame  # noqa: F401
from .base import BANDS, REPORTED_BANDS, CoverageReport, ProductivityTable, load_productivity  # noqa: F401
from .coverage import (  # noqa: F401
    climatology_quantiles,
    coverage_density_pairs,
    coverage_frame,
    coverage_from_quantiles,
    coverage_table,
    scenario_band,
    write_coverage,
)
from .energy import energy_series, energy_summary, historical_baseline, inflow_energy  # noqa: F401

__all__ = [
    "BANDS",
    "REPORTED_BANDS",
    "CoverageReport",
    "ProductivityTable",
    "band_export",
    "band_frame",
    "climatology_quantiles",
    "coverage_density_pairs",
    "coverage_frame",
    "coverage_from_quantiles",
    "coverage_table",
    "energy_series",
    "energy_summary",
    "historical_baseline",
    "inflow_energy",
    "load_productivity",
    "scenario_band",
    "write_coverage",
]
