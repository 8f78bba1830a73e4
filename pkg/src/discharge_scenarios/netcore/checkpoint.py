"""
JSON checkpoints. A checkpoint holds the model configuration, the plant
list, the grid shape and basin mask the model was trained on, the
normalization statistics, and every parameter array as a flat row-major
list. Floats are written with ``repr`` precision, so a save/load round trip
is exact.
"""

import json
import logging

import numpy as np

from discharge_scenarios.exceptions import CheckpointError, ConfigError
from discharge_scenarios.ingest.base import NormStats
from discharge_scenarios.netcore.base import PARAM_NAMES, ModelConfig, ModelParams

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "discharge-scenarios-checkpoint"
CHECKPOINT_VERSION = 1


class Checkpoint:
    """A trained model together with what is needed to feed it."""

    def __init__(self, params, plants, mask, norm_stats):
        self.params = params
        self.plants = list(plants)
        self.mask = np.asarray(mask, dtype=bool)
        self.norm_stats = norm_stats
        if len(self.plants) != params.config.n_plants:
            raise CheckpointError(f"{len(self.plants)} plant ids for a model with {params.config.n_plants} plants")
        if int(self.mask.sum()) != params.config.n_precip_cells:
            raise CheckpointError(f"mask selects {int(self.mask.sum())} cells, model expects {params.config.n_precip_cells}")
        if norm_stats.grid_shape != self.mask.shape:
            raise CheckpointError(f"normalization grid {norm_stats.grid_shape} does not match mask {self.mask.shape}")

    @property
    def grid_shape(self):
        return tuple(self.mask.shape)

    def to_dict(self):
        return {
            "format": CHECKPOINT_FORMAT,
            "version": CHECKPOINT_VERSION,
            "config": self.params.config.to_dict(),
            "plants": self.plants,
            "grid_shape": list(self.grid_shape),
            "mask": self.mask.astype(int).ravel().tolist(),
            "norm_stats": self.norm_stats.to_dict(),
            "params": {name: {"shape": list(value.shape), "data": value.ravel().tolist()} for name, value in self.params.items()},
        }

    @classmethod
    def from_dict(cls, data):
        if data.get("format") != CHECKPOINT_FORMAT:
            raise CheckpointError(f"not a checkpoint document (format {data.get('format')!r})")
        if data.get("version") != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {data.get('version')!r}")
        try:
            config = ModelConfig.from_dict(data["config"])
            arrays = {}
            for name in PARAM_NAMES:
                entry = data["params"][name]
                arrays[name] = np.asarray(entry["data"], dtype=float).reshape(entry["shape"])
            mask = np.asarray(data["mask"], dtype=bool).reshape(data["grid_shape"])
            norm_stats = NormStats.from_dict(data["norm_stats"])
            params = ModelParams(config, arrays)
        except (KeyError, TypeError, ValueError, ConfigError) as e:
            raise CheckpointError(f"malformed checkpoint: {e}")
        return cls(params, data["plants"], mask, norm_stats)


def save_checkpoint(checkpoint, path):
    with open(path, "w") as f:
        json.dump(checkpoint.to_dict(), f)
        f.write("\n")
    logger.debug("Wrote checkpoint to %s", path)


def load_checkpoint(path):
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise CheckpointError(f"{path}: not valid JSON: {e}")
    return Checkpoint.from_dict(data)
