"""
This package holds the optimization loop: full-sequence Adam steps on the
pinball loss, projection of the precipitation embedding after every step,
and early stopping on a held-out window.
"""

from .base import EpochRecord, TrainConfig, TrainReport  # noqa: F401
from .loop import evaluate_loss, train  # noqa: F401
from .optimizer import Adam  # noqa: F401

__all__ = [
    "Adam",
    "EpochRecord",
    "TrainConfig",
    "TrainReport",
    "evaluate_loss",
    "train",
]
