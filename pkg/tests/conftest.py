"""
Fixtures for discharge-scenarios tests
"""

import json

import numpy as np
import pytest

from discharge_scenarios.ingest import SynthSpec, YearWindow, compute_norm_stats, normalize, synth_generate
from discharge_scenarios.netcore import ModelConfig, init_model

SEASONAL_BASE = [400.0, 420.0, 380.0, 300.0, 220.0, 160.0, 120.0, 100.0, 110.0, 160.0, 250.0, 340.0]


def basin_spec(horizon=72, n_plants=2, grid_shape=(2, 2), noise=0.3, lag=0, start=(2000, 1), **kwargs):
    """A small synthetic basin; weights differ per plant so plants are distinguishable."""
    n_cells = grid_shape[0] * grid_shape[1]
    weights = [[0.001 * (1 + (c + p) % 4) for p in range(n_plants)] for c in range(n_cells)]
    return SynthSpec(
        grid_shape=list(grid_shape),
        n_plants=n_plants,
        horizon=horizon,
        base=SEASONAL_BASE,
        weights=weights,
        noise=noise,
        lag=lag,
        start=list(start),
        **kwargs,
    )


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(str(v) for v in row) + "\n")
    return path


@pytest.fixture
def small_spec():
    return basin_spec()


@pytest.fixture
def small_basin(small_spec):
    """(forcing, history, truth) for six years starting 2000-01."""
    return synth_generate(small_spec, seed=11)


@pytest.fixture
def normalized_basin(small_basin):
    forcing, history, truth = small_basin
    stats = compute_norm_stats(forcing, YearWindow(2000, 2003))
    return normalize(forcing, stats), history, stats


@pytest.fixture
def tiny_model():
    """Untrained parameters on a 2x2 grid with 2 plants."""
    return init_model(ModelConfig(n_precip_cells=4, n_temp_cells=4, n_plants=2, embedding_dim=3, hidden_dim=4), seed=5)


@pytest.fixture
def run_config(tmp_path):
    """
    Write a complete run configuration for a small synthetic basin and return
    a function that dumps it (optionally modified) to ``tmp_path``.
    """

    def make(**overrides):
        spec = basin_spec(horizon=72)
        synth = {k: v for k, v in spec.to_dict().items() if k not in ("levels",)}
        synth["ensemble"] = {"n_traj": 4, "horizon": 6}
        config = {
            "seed": 3,
            "paths": {"output": "out"},
            "synth": synth,
            "model": {"embedding_dim": 3, "hidden_dim": 4},
            "train": {"train_window": [2000, 2003], "valid_window": [2004, 2005], "max_epochs": 5, "patience": 3, "learning_rate": 0.01},
            "generate": {"n_scen": 3},
        }
        for key, value in overrides.items():
            if value is None:
                config.pop(key, None)
            else:
                config[key] = value
        path = tmp_path / "run.json"
        path.write_text(json.dumps(config, indent=1))
        return path

    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
