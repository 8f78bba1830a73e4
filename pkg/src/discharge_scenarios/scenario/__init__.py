"""
This package turns a trained model and a forecast ensemble into discharge
scenarios, and restores month-to-month dependence between them by
relabeling scenarios through a lag-one regression and linear assignment.
"""

from .assignment import assignment_solve, assignment_total  # noqa: F401
from .base import SCENARIO_FLOOR, GenerateConfig, ScenarioSet, SerialModel  # noqa: F401
from .generation import generate, scenario_rng, spinup_state  # noqa: F401
from .io import load_scenarios, write_scenarios  # noqa: F401
from .serial import (  # noqa: F401
    fit_serial_model,
    fit_serial_regression,
    mahalanobis_cost,
    reorder,
)

__all__ = [
    "SCENARIO_FLOOR",
    "GenerateConfig",
    "ScenarioSet",
    "SerialModel",
    "assignment_solve",
    "assignment_total",
    "fit_serial_model",
    "fit_serial_regression",
    "generate",
    "load_scenarios",
    "mahalanobis_cost",
    "reorder",
    "scenario_rng",
    "spinup_state",
    "write_scenarios",
]
