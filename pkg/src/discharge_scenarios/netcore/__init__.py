"""
This package holds the differentiable network: a non-negative precipitation
embedding, one GRU layer with dropout on its input, and three linear heads
emitting log-normal parameters, with exact reverse-mode gradients.
"""

from .base import (  # noqa: F401
    PARAM_NAMES,
    SIGMA_FLOOR,
    DistGrad,
    DistSeq,
    Gradients,
    HiddenSeq,
    ModelConfig,
    ModelParams,
)
from .network import (  # noqa: F401
    ForwardTape,
    backward,
    embed,
    forward,
    forward_tape,
    gru_cell,
    init_heads_from_history,
    init_model,
    project_nonneg,
)
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint  # noqa: F401

__all__ = [
    "PARAM_NAMES",
    "SIGMA_FLOOR",
    "Checkpoint",
    "DistGrad",
    "DistSeq",
    "ForwardTape",
    "Gradients",
    "HiddenSeq",
    "ModelConfig",
    "ModelParams",
    "backward",
    "embed",
    "forward",
    "forward_tape",
    "gru_cell",
    "init_heads_from_history",
    "init_model",
    "load_checkpoint",
    "project_nonneg",
    "save_checkpoint",
]
