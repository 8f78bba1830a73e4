"""
This package loads, validates and normalizes basin data: forcing grids,
discharge histories and forecast ensembles. It also builds synthetic basins
whose generative law is known exactly.
"""

from .base import (  # noqa: F401
    DischargeHistory,
    EnsembleSet,
    ForcingSeries,
    NormStats,
    YearWindow,
    month_range,
)
from .discharge import load_discharge, write_discharge  # noqa: F401
from .ensemble import load_ensemble, write_ensemble  # noqa: F401
from .forcing import load_forcing, write_forcing  # noqa: F401
from .normalize import compute_norm_stats, denormalize, normalize  # noqa: F401
from .synth import GroundTruth, SynthSpec, synth_ensemble, synth_generate  # noqa: F401

__all__ = [
    "DischargeHistory",
    "EnsembleSet",
    "ForcingSeries",
    "GroundTruth",
    "NormStats",
    "SynthSpec",
    "YearWindow",
    "compute_norm_stats",
    "denormalize",
    "load_discharge",
    "load_ensemble",
    "load_forcing",
    "month_range",
    "normalize",
    "synth_ensemble",
    "synth_generate",
    "write_discharge",
    "write_ensemble",
    "write_forcing",
]
