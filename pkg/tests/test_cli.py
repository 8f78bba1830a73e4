import json
import os
import shutil

import numpy as np
import pandas as pd
import pytest

from conftest import basin_spec, write_csv
from discharge_scenarios.cli import main
from discharge_scenarios.exceptions import TrainingDiverged
from discharge_scenarios.ingest import GroundTruth
from discharge_scenarios.scenario import load_scenarios

__author__ = "discharge-scenarios developers"
__copyright__ = "(c) 2024 discharge-scenarios developers"
__license__ = "MIT"


def _run(capsys, command, config, *extra):
    rc = main(["--nocolor", command, "--config", str(config), *extra])
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def _pipeline(capsys, config, *commands):
    for command in commands:
        rc, out, err = _run(capsys, command, config)
        assert rc == 0, out + err


@pytest.fixture
def productivity_config(run_config, tmp_path):
    write_csv(tmp_path / "prod.csv", "plant_id,productivity,subsystem", [("PLANT_01", 0.9, "north"), ("PLANT_02", 1.4, "south")])
    return run_config(paths={"output": "out", "productivity": "prod.csv"})


def test_synth(capsys, run_config, tmp_path):
    rc, out, _ = _run(capsys, "synth", run_config())
    assert rc == 0
    assert "[OK   ] Wrote 72 months of forcing to" in out
    assert "[OK   ] Wrote 4 ensemble trajectories of 6 months to" in out
    out_dir = tmp_path / "out"
    assert sorted(os.listdir(out_dir)) == ["discharge.csv", "ensemble", "forcing.csv", "ground_truth.json"]
    assert sorted(os.listdir(out_dir / "ensemble")) == ["manifest.json", "traj_000.csv", "traj_001.csv", "traj_002.csv", "traj_003.csv"]
    # the ensemble starts right after the record
    with open(out_dir / "ensemble" / "traj_000.csv") as f:
        f.readline()
        assert f.readline().startswith("2006,1,")
    truth = GroundTruth.load(str(out_dir / "ground_truth.json"))
    assert len(truth.months) == 72 and truth.months[0] == (2000, 1)
    assert truth.plants == ["PLANT_01", "PLANT_02"]
    assert truth.mean.shape == (72, 2)


def test_synth_from_standalone_spec(capsys, run_config, tmp_path):
    synth = {k: v for k, v in basin_spec(horizon=24).to_dict().items() if k != "levels"}
    (tmp_path / "basin.json").write_text(json.dumps(synth))
    rc, out, _ = _run(capsys, "synth", run_config(synth="basin.json"))
    assert rc == 0
    assert "[OK   ] Wrote 24 months of forcing to" in out
    assert not os.path.exists(tmp_path / "out" / "ensemble")
    rc, _, err = _run(capsys, "synth", run_config(synth="missing.json"))
    assert rc == 2
    assert "synth spec not found" in err


def test_full_pipeline(capsys, productivity_config, tmp_path):
    _pipeline(capsys, productivity_config, "synth")

    rc, out, _ = _run(capsys, "train", productivity_config)
    assert rc == 0
    assert "[OK   ] Selected epoch" in out
    report = pd.read_csv(tmp_path / "out" / "train_report.csv")
    assert list(report.columns) == ["epoch", "train_loss", "valid_loss"]
    assert report["epoch"].iloc[0] == 0

    rc, out, _ = _run(capsys, "generate", productivity_config)
    assert rc == 0
    assert "[OK   ] Wrote 144 scenario rows (4 trajectories x 3 scenarios)" in out
    scenarios = load_scenarios(str(tmp_path / "out" / "scenarios.csv"))
    assert scenarios.values.shape == (4, 3, 6, 2)
    assert scenarios.provenance["reordered"]
    assert scenarios.provenance["spinup"]
    assert len(scenarios.provenance["checkpoint_sha256"]) == 64
    assert os.path.exists(tmp_path / "out" / "serial_model.json")

    rc, out, _ = _run(capsys, "report", productivity_config)
    assert rc == 0
    assert "[NOTE ] PLANT_01 valid: mid" in out
    coverage = pd.read_csv(tmp_path / "out" / "coverage.csv")
    assert list(coverage.columns) == ["plant_id", "band", "reference", "train", "valid"]
    assert coverage["reference"].tolist() == [35.0, 10.0, 5.0] * 2
    bands = sorted(os.listdir(tmp_path / "out" / "bands"))
    assert "band_PLANT_01.svg" in bands and "scenario_band_PLANT_02.csv" in bands
    energy = pd.read_csv(tmp_path / "out" / "inflow_energy_scenarios.csv")
    assert sorted(set(energy["subsystem"])) == ["SYSTEM", "north", "south"]
    assert list(energy.columns) == ["subsystem", "year", "p10", "p50", "p90", "mean"]
    history_energy = pd.read_csv(tmp_path / "out" / "inflow_energy_history.csv")
    assert history_energy[history_energy["subsystem"] == "SYSTEM"]["year"].tolist() == list(range(2000, 2006))


def test_pipeline_is_deterministic(capsys, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth", "train", "generate")
    out_dir = tmp_path / "out"
    first = {name: (out_dir / name).read_bytes() for name in ("checkpoint.json", "scenarios.csv", "train_report.csv")}
    shutil.rmtree(out_dir)
    _pipeline(capsys, config, "synth", "train", "generate")
    for name, content in first.items():
        assert (out_dir / name).read_bytes() == content, name


def test_serial_model_is_cached(capsys, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth", "train", "generate")
    first = (tmp_path / "out" / "scenarios.csv").read_bytes()
    cache = tmp_path / "out" / "serial_model.json"
    stamp = cache.stat().st_mtime_ns
    _pipeline(capsys, config, "generate")
    assert cache.stat().st_mtime_ns == stamp
    assert (tmp_path / "out" / "scenarios.csv").read_bytes() == first


def test_no_reorder_keeps_marginals(capsys, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth", "train", "generate")
    reordered = load_scenarios(str(tmp_path / "out" / "scenarios.csv"))

    rc, out, _ = _run(capsys, "generate", config, "--no-reorder")
    assert rc == 0
    assert "[NOTE ] Scenario reordering disabled" in out
    plain = load_scenarios(str(tmp_path / "out" / "scenarios.csv"))
    assert not plain.provenance["reordered"]
    assert np.array_equal(np.sort(plain.values, axis=1), np.sort(reordered.values, axis=1))
    assert np.array_equal(plain.values[:, :, 0], reordered.values[:, :, 0])


def test_seed_override(capsys, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth", "train", "generate")
    first = (tmp_path / "out" / "scenarios.csv").read_bytes()
    rc, _, _ = _run(capsys, "generate", config, "--seed", "99")
    assert rc == 0
    assert (tmp_path / "out" / "scenarios.csv").read_bytes() != first
    assert load_scenarios(str(tmp_path / "out" / "scenarios.csv")).provenance["seed"] == 99


@pytest.mark.parametrize(
    "overrides, command, exp_stdout_substr, exp_stderr_substr, exp_rc",
    [
        (
            {"train": {"train_window": [2000, 2003], "valid_window": [2003, 2005]}},
            "train",
            "",
            "[ERROR] Configuration error: validation window [2003, 2005] overlaps training window [2000, 2003]",
            2,
        ),
        ({"bogus": 1}, "synth", "", "[ERROR] Configuration error: unknown config keys: bogus", 2),
        ({"synth": None}, "synth", "", "the configuration has no synth section", 2),
        ({"train": None}, "train", "", "the configuration has no train section", 2),
        ({"model": {"hidden_dim": 4, "layers": 2}}, "train", "", "unknown model keys: layers", 2),
        ({"generate": {"n_scen": 0}}, "generate", "", "n_scen must be at least 1", 2),
        ({}, "train", "run the synth subcommand", "[ERROR] Data error: forcing file not found", 3),
        ({}, "generate", "Run the train subcommand first", "[ERROR] Data error: checkpoint not found", 3),
        ({}, "report", "--debug global flag", "checkpoint not found", 3),
    ],
    ids=["overlap", "unknown-key", "no-synth", "no-train", "model-key", "n-scen", "no-forcing", "no-checkpoint", "report-no-checkpoint"],
)
def test_exit_codes(capsys, run_config, overrides, command, exp_stdout_substr, exp_stderr_substr, exp_rc):
    rc, out, err = _run(capsys, command, run_config(**overrides))
    assert exp_stdout_substr in out
    assert exp_stderr_substr in err
    assert rc == exp_rc


def test_config_errors(capsys, tmp_path):
    rc, _, err = _run(capsys, "synth", tmp_path / "missing.json")
    assert rc == 2
    assert "configuration file not found" in err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    rc, _, err = _run(capsys, "synth", bad)
    assert rc == 2
    assert "not valid JSON" in err


def test_overlapping_windows_fail_before_training(capsys, run_config, tmp_path):
    good = run_config()
    _pipeline(capsys, good, "synth")
    bad = run_config(train={"train_window": [2000, 2004], "valid_window": [2004, 2005]})
    rc, _, _ = _run(capsys, "train", bad)
    assert rc == 2
    assert not os.path.exists(tmp_path / "out" / "checkpoint.json")


def test_malformed_forcing_is_a_data_error(capsys, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth")
    with open(tmp_path / "out" / "forcing.csv", "a") as f:
        f.write("2006,1,0,0,-5.0,20.0\n")
    rc, _, err = _run(capsys, "train", config)
    assert rc == 3
    assert "[ERROR] Data error:" in err


def test_unwritable_output_is_a_data_error(capsys, run_config, tmp_path):
    (tmp_path / "blocker").write_text("a regular file\n")
    rc, _, err = _run(capsys, "synth", run_config(paths={"output": "blocker/out"}))
    assert rc == 3
    assert "[ERROR] Data error:" in err
    assert "Not a directory" in err


def test_full_size_ensemble(capsys, run_config, tmp_path):
    synth = {k: v for k, v in basin_spec(horizon=72).to_dict().items() if k != "levels"}
    synth["ensemble"] = {"n_traj": 51, "horizon": 6}
    config = run_config(synth=synth, generate={"n_scen": 30})
    _pipeline(capsys, config, "synth", "train")

    rc, out, _ = _run(capsys, "generate", config)
    assert rc == 0
    assert "[OK   ] Wrote 18360 scenario rows (51 trajectories x 30 scenarios)" in out
    path = tmp_path / "out" / "scenarios.csv"
    with open(path) as f:
        assert sum(1 for _ in f) == 1 + 51 * 30 * 6 * 2
    first = path.read_bytes()
    _pipeline(capsys, config, "generate")
    assert path.read_bytes() == first


def test_diverged_training_is_a_numeric_fault(capsys, mocker, run_config, tmp_path):
    config = run_config()
    _pipeline(capsys, config, "synth")
    mocker.patch("discharge_scenarios.cli.train", side_effect=TrainingDiverged("epoch 3: training loss is nan", epoch=3))
    rc, _, err = _run(capsys, "train", config)
    assert rc == 4
    assert "[ERROR] Numeric fault: epoch 3: training loss is nan" in err
    assert not os.path.exists(tmp_path / "out" / "checkpoint.json")


def test_color_output(capsys, monkeypatch, run_config):
    monkeypatch.delenv("NO_COLOR", raising=False)
    rc = main(["synth", "--config", str(run_config())])
    out = capsys.readouterr().out
    assert rc == 0
    assert "[\033[92mOK   \033[0m] Wrote 72 months of forcing" in out


@pytest.mark.slow
def test_calibration_on_synthetic_basin(capsys, run_config, tmp_path):
    # 456 training months and a 60-month held-out window
    synth = {k: v for k, v in basin_spec(horizon=516, start=(1981, 1)).to_dict().items() if k != "levels"}
    config = run_config(
        synth=synth,
        model={"embedding_dim": 6, "hidden_dim": 8},
        train={"train_window": [1981, 2018], "valid_window": [2019, 2023], "max_epochs": 300, "patience": 60, "learning_rate": 0.01},
        report={"charts": False},
    )
    frames = []
    for seed in range(5):
        for command in ("synth", "train", "report"):
            rc, out, err = _run(capsys, command, config, "--seed", str(seed))
            assert rc == 0, out + err
        frames.append(pd.read_csv(tmp_path / "out" / "coverage.csv"))
    coverage = pd.concat(frames)
    observed = coverage.groupby(["plant_id", "band"], sort=False)["valid"].mean()
    reference = coverage.groupby(["plant_id", "band"], sort=False)["reference"].first()
    assert np.all(np.abs(observed - reference) <= 5.0), observed
