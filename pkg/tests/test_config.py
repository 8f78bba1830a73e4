import json
import os

import pytest

from discharge_scenarios.config import RunConfig
from discharge_scenarios.exceptions import ConfigError

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"

TINY_SYNTH = {"grid_shape": [1, 1], "n_plants": 1, "horizon": 12, "base": [1.0] * 12, "weights": [[0.0]], "noise": 0.1}


def test_paths_default_under_output(tmp_path):
    cfg = RunConfig.from_dict({"paths": {"output": "results"}}, base_dir=str(tmp_path))
    output = os.path.join(str(tmp_path), "results")
    assert cfg.paths.output == output
    assert cfg.paths.forcing == os.path.join(output, "forcing.csv")
    assert cfg.paths.ensemble == os.path.join(output, "ensemble")
    assert cfg.paths.productivity is None
    assert cfg.paths.output_file("bands") == os.path.join(output, "bands")


def test_paths_resolve_against_config_dir(tmp_path):
    cfg = RunConfig.from_dict({"paths": {"forcing": "../data/forcing.csv", "history": "/abs/discharge.csv"}}, base_dir=str(tmp_path))
    assert cfg.paths.forcing == os.path.normpath(os.path.join(str(tmp_path), "..", "data", "forcing.csv"))
    assert cfg.paths.history == "/abs/discharge.csv"


def test_seed_and_levels_flow_into_train_config():
    cfg = RunConfig.from_dict(
        {"seed": 4, "quantiles": [0.05, 0.25, 0.75, 0.95], "train": {"train_window": [2000, 2003], "valid_window": [2004, 2005]}},
        seed=9,
    )
    train = cfg.train_config()
    assert train.seed == 9
    assert train.levels == [0.05, 0.25, 0.75, 0.95]
    assert cfg.quantiles.levels == (0.05, 0.25, 0.75, 0.95)


def test_no_reorder_flag():
    assert RunConfig.from_dict({}).generate.reorder
    assert not RunConfig.from_dict({}, no_reorder=True).generate.reorder


@pytest.mark.parametrize(
    "data, exc_substr",
    [
        ({"paths": {"scratch": "x"}}, "unknown paths keys: scratch"),
        ({"train": {"train_window": [2000, 2003], "valid_window": [2004, 2005], "seed": 1}}, "train.seed is not allowed"),
        ({"train": {"train_window": [2000, 2003], "valid_window": [2004, 2005], "levels": [0.5]}}, "set the top-level quantiles"),
        ({"report": {"band_window": "test"}}, "report.band_window must be train, valid or all"),
        ({"report": {"colour": True}}, "unknown report keys: colour"),
        ({"quantiles": [0.6, 0.2]}, "strictly increasing"),
        ({"synth": {**TINY_SYNTH, "ensemble": {"size": 3}}}, "unknown synth.ensemble keys: size"),
    ],
    ids=["paths", "train-seed", "train-levels", "band-window", "report-key", "quantiles", "ensemble-key"],
)
def test_config_errors(data, exc_substr):
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_dict(data)
    assert exc_substr in str(exc.value)


def test_load_reports_type_errors(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"generate": {"n_scen": "three"}}))
    with pytest.raises(ConfigError) as exc:
        RunConfig.load(str(path))
    assert str(path) in str(exc.value)
    path.write_text("[1, 2]")
    with pytest.raises(ConfigError, match="must be a JSON object"):
        RunConfig.load(str(path))
