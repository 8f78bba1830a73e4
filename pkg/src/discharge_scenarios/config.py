"""
The JSON run configuration shared by every subcommand.

A minimal configuration only names sections it needs; every path defaults to
a file under ``paths.output``. Relative paths resolve against the directory
holding the configuration file.
"""

import json
import os
from dataclasses import dataclass, field, fields

from discharge_scenarios.exceptions import ConfigError
from discharge_scenarios.ingest.synth import SynthSpec
from discharge_scenarios.probloss.base import DEFAULT_LEVELS, QuantileSet
from discharge_scenarios.scenario.base import GenerateConfig
from discharge_scenarios.train.base import TrainConfig

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


SECTIONS = ("paths", "synth", "model", "train", "generate", "report", "quantiles", "seed")

# path key -> default location under the output directory
DEFAULT_PATHS = {
    "forcing": "forcing.csv",
    "history": "discharge.csv",
    "ensemble": "ensemble",
    "checkpoint": "checkpoint.json",
    "scenarios": "scenarios.csv",
    "productivity": None,
}


def _reject_unknown(section, data, known):
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown {section} keys: {', '.join(sorted(unknown))}")


def _resolve(base_dir, path):
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


@dataclass
class PathsConfig:
    output: str
    forcing: str
    history: str
    ensemble: str
    checkpoint: str
    scenarios: str
    productivity: str = None

    @classmethod
    def from_dict(cls, data, base_dir):
        _reject_unknown("paths", data, ["output"] + list(DEFAULT_PATHS))

        output = _resolve(base_dir, data.get("output", "out"))
        resolved = {"output": output}
        for key, default in DEFAULT_PATHS.items():
            if data.get(key) is not None:
                resolved[key] = _resolve(base_dir, data[key])
            elif default is not None:
                resolved[key] = os.path.join(output, default)
            else:
                resolved[key] = None
        return cls(**resolved)

    def output_file(self, *parts):
        return os.path.join(self.output, *parts)


@dataclass
class SynthEnsembleConfig:
    n_traj: int = 51
    horizon: int = 6
    start: list = None

    def __post_init__(self):
        if self.n_traj < 1 or self.horizon < 1:
            raise ConfigError("synthetic ensemble needs at least one trajectory and one month")


@dataclass
class ReportConfig:
    charts: bool = True
    # months covered by band exports: "train", "valid" or "all"
    band_window: str = "valid"
    energy_levels: list = field(default_factory=lambda: [0.10, 0.50, 0.90])

    def __post_init__(self):
        if self.band_window not in ("train", "valid", "all"):
            raise ConfigError(f"report.band_window must be train, valid or all, got {self.band_window!r}")


@dataclass
class RunConfig:
    paths: PathsConfig
    seed: int = 0
    levels: list = field(default_factory=lambda: list(DEFAULT_LEVELS))
    synth: SynthSpec = None
    synth_ensemble: SynthEnsembleConfig = None
    model: dict = field(default_factory=dict)
    train: dict = None
    generate: GenerateConfig = field(default_factory=GenerateConfig)
    report: ReportConfig = field(default_factory=ReportConfig)

    @classmethod
    def from_dict(cls, data, base_dir=".", seed=None, no_reorder=False):
        _reject_unknown("config", data, SECTIONS)
        run_seed = int(data.get("seed", 0) if seed is None else seed)
        levels = list(QuantileSet(data.get("quantiles", DEFAULT_LEVELS)).levels)

        synth = None
        synth_ensemble = None
        if isinstance(data.get("synth"), str):
            # a standalone spec file, without the ensemble section
            synth = SynthSpec.from_json(_resolve(base_dir, data["synth"]), levels=levels)
        elif data.get("synth") is not None:
            synth_data = dict(data["synth"])
            ensemble_data = synth_data.pop("ensemble", None)
            synth_data.setdefault("levels", levels)
            synth = SynthSpec.from_dict(synth_data)
            if ensemble_data is not None:
                _reject_unknown("synth.ensemble", ensemble_data, [f.name for f in fields(SynthEnsembleConfig)])
                synth_ensemble = SynthEnsembleConfig(**ensemble_data)

        model = dict(data.get("model", {}))
        _reject_unknown("model", model, ["embedding_dim", "hidden_dim"])

        train = data.get("train")
        if train is not None:
            for key in ("seed", "levels"):
                if key in train:
                    raise ConfigError(f"train.{key} is not allowed; set the top-level {'seed' if key == 'seed' else 'quantiles'} instead")

        generate = GenerateConfig.from_dict(dict(data.get("generate", {})))
        if no_reorder:
            generate.reorder = False

        report_data = dict(data.get("report", {}))
        _reject_unknown("report", report_data, [f.name for f in fields(ReportConfig)])

        return cls(
            paths=PathsConfig.from_dict(dict(data.get("paths", {})), base_dir),
            seed=run_seed,
            levels=levels,
            synth=synth,
            synth_ensemble=synth_ensemble,
            model=model,
            train=train,
            generate=generate,
            report=ReportConfig(**report_data),
        )

    @classmethod
    def load(cls, path, seed=None, no_reorder=False):
        try:
            with open(path, "r") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"configuration file not found: {path}")
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: not valid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: the configuration must be a JSON object")
        try:
            return cls.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)), seed=seed, no_reorder=no_reorder)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{path}: {e}")

    @property
    def quantiles(self):
        return QuantileSet(self.levels)

    def train_config(self):
        if self.train is None:
            raise ConfigError("the configuration has no train section")
        return TrainConfig.from_dict({**self.train, "seed": self.seed, "levels": self.levels})
