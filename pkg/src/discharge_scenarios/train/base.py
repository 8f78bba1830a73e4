from dataclasses import dataclass, field, fields

import pandas as pd

from discharge_scenarios.exceptions import ConfigError
from discharge_scenarios.ingest.base import YearWindow
from discharge_scenarios.probloss.base import DEFAULT_LEVELS, QuantileSet

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


@dataclass
class TrainConfig:
    train_window: YearWindow
    valid_window: YearWindow
    learning_rate: float = 1e-3
    max_epochs: int = 2000
    patience: int = 50
    dropout_rate: float = 0.2
    levels: list = field(default_factory=lambda: list(DEFAULT_LEVELS))
    seed: int = 0

    def __post_init__(self):
        self.train_window = YearWindow.from_value(self.train_window)
        self.valid_window = YearWindow.from_value(self.valid_window)
        if self.train_window.overlaps(self.valid_window):
            raise ConfigError(f"validation window {self.valid_window.to_list()} overlaps training window {self.train_window.to_list()}")
        if self.valid_window.start_year <= self.train_window.end_year:
            raise ConfigError("validation window must come after the training window")
        if not self.learning_rate >= 0:
            raise ConfigError(f"learning_rate must be non-negative, got {self.learning_rate}")
        if self.max_epochs < 0:
            raise ConfigError(f"max_epochs must be non-negative, got {self.max_epochs}")
        if self.patience < 1:
            raise ConfigError(f"patience must be at least 1, got {self.patience}")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")
        # validates the levels
        self.quantiles = QuantileSet(self.levels)
        self.levels = list(self.quantiles.levels)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown train config keys: {', '.join(sorted(unknown))}")
        missing = {"train_window", "valid_window"} - set(data)
        if missing:
            raise ConfigError(f"train config is missing {', '.join(sorted(missing))}")
        return cls(**data)

    def to_dict(self):
        return {
            "train_window": self.train_window.to_list(),
            "valid_window": self.valid_window.to_list(),
            "learning_rate": self.learning_rate,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "dropout_rate": self.dropout_rate,
            "levels": list(self.levels),
            "seed": self.seed,
        }


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    valid_loss: float


@dataclass
class TrainReport:
    """
    One record per epoch. Epoch 0 holds the losses of the initial parameters;
    for later epochs ``train_loss`` is the train-mode loss the step was taken
    on and ``valid_loss`` the eval-mode loss after the step.
    """

    epochs: list
    selected_epoch: int
    stopped_early: bool
    wall_time: float = field(default=0.0, compare=False)

    @property
    def selected(self):
        return self.epochs[self.selected_epoch]

    def to_frame(self):
        return pd.DataFrame(
            {
                "epoch": [r.epoch for r in self.epochs],
                "train_loss": [r.train_loss for r in self.epochs],
                "valid_loss": [r.valid_loss for r in self.epochs],
            }
        )

    def write_csv(self, path):
        self.to_frame().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
